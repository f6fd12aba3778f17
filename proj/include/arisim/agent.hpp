#pragma once

#include <complex>
#include <cstdint>
#include <deque>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "arisim/neuralnet.hpp"
#include "arisim/phy.hpp"
#include "arisim/rng.hpp"

namespace arisim {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

/// Unitary DFT matrix, W(m,n) = exp(-j 2 pi m n / N) / sqrt(N). The same
/// convention is used for the states and the action set.
MatrixXcd unitary_dft(int n);

/// DQN input: s1 concatenates the per-user spatial spectra of the combined
/// RIS observation, s2 is the spatial spectrum of the phase shift vector.
struct AgentState {
    VectorXd s1; // N*K entries, user blocks in order
    VectorXd s2; // N entries
};

/// s1 block k = |DFT{ conj(y_R) .* v .* y_k }|, s2 = |DFT{ v }|.
AgentState build_state(const VectorXcd& y_r, std::span<const VectorXcd> y_ue,
                       const PhaseShiftVector& v);

/// Candidate phase-update directions, one column per action. Default: the
/// columns of the unitary DFT matrix (N_a = N, a full basis, so consecutive
/// actions can compose into any direction).
struct ActionSet {
    MatrixXcd directions; // N x N_a

    int num_actions() const { return static_cast<int>(directions.cols()); }
};

ActionSet make_dft_action_set(int n);

/// One-hot vector at the maximum element, ties to the lowest index.
VectorXd one_hot_indicator(const VectorXd& q);

int argmax_lowest(const VectorXd& q);

/// Epsilon-greedy: uniform random action with probability epsilon, argmax
/// otherwise.
int select_action(const VectorXd& q, double epsilon, Rng& rng);

/// eta = 0.1 |delta_rate| + 0.01.
double adaptive_eta(double delta_rate);

/// v' = exp(j angle(v + eta * directions * e_a)). Entries whose update lands
/// exactly on zero keep their previous phase.
PhaseShiftVector update_phase(const PhaseShiftVector& v, int action, double eta,
                              const ActionSet& actions);

/// r = rate_next / rate_prev; rate_prev below `floor_rate` is clamped to it
/// (and the caller logs the anomaly).
double reward_ratio(double rate_next, double rate_prev, double floor_rate = 1e-9);

/// Target Q vector: copy of q with [a] = r + gamma * max(q_next).
VectorXd target_q(const VectorXd& q, const VectorXd& q_next, int action, double reward,
                  double gamma);

/// Normalized target (eta / std) * (q_tilde - mean) + 1/(1-gamma), population
/// standard deviation. Zero variance collapses to the constant 1/(1-gamma).
VectorXd normalize_target(const VectorXd& q_tilde, double eta, double gamma);

/// Loss |[q_check - q_pred]_a|^2; only index a carries gradient.
double td_loss(const VectorXd& q_check, const VectorXd& q_pred, int action);

/// Replay entry, Q vectors frozen at decision time.
struct Transition {
    AgentState state;
    AgentState next_state;
    int action = 0;
    double reward = 1.0;
    VectorXd q;      // at `state`, decision time
    VectorXd q_next; // at `next_state`, decision time
    double eta = 0.01;
};

struct AgentConfig {
    double gamma = 0.9;
    double epsilon_init = 1.0;
    double epsilon_decay = 0.99;
    double epsilon_floor = 0.05;
    int replay_capacity = 2048;
    int batch_size = 64;
    int train_period = 32;
    int train_passes = 2;
    double learning_rate = 1e-3;
    bool recompute_q_at_train = false;

    void validate() const;
};

class ReplayBuffer {
  public:
    explicit ReplayBuffer(size_t capacity) : capacity_(capacity) {}

    void push(Transition t);
    size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }
    const Transition& operator[](size_t i) const { return entries_[i]; }

  private:
    size_t capacity_;
    std::deque<Transition> entries_;
};

struct TrainStats {
    int minibatches = 0;
    double mean_loss = 0.0;
};

/// One training cycle: shuffle the buffer, consume it in minibatches
/// (`train_passes` passes), recompute q_tilde from the stored snapshots,
/// normalize per transition with its stored eta, and take one optimizer step
/// per minibatch. Empty buffer is a no-op.
TrainStats train_cycle(const ReplayBuffer& buffer, nn::Network& net, const AgentConfig& cfg,
                       Rng& rng);

} // namespace arisim
