#include "arisim/agent.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "arisim/errors.hpp"

namespace arisim {

MatrixXcd unitary_dft(int n) {
    MatrixXcd w(n, n);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (int m = 0; m < n; ++m)
        for (int k = 0; k < n; ++k) {
            const double phase = -2.0 * M_PI * static_cast<double>(m) * k / n;
            w(m, k) = std::polar(scale, phase);
        }
    return w;
}

AgentState build_state(const VectorXcd& y_r, std::span<const VectorXcd> y_ue,
                       const PhaseShiftVector& v) {
    const Eigen::Index n = v.size();
    if (y_r.size() != n)
        throw config_error("build_state: observation length mismatch");
    const MatrixXcd dft = unitary_dft(static_cast<int>(n));

    AgentState state;
    state.s1.resize(n * static_cast<Eigen::Index>(y_ue.size()));
    for (size_t k = 0; k < y_ue.size(); ++k) {
        if (y_ue[k].size() != n)
            throw config_error("build_state: observation length mismatch");
        const VectorXcd combined = y_r.conjugate().cwiseProduct(v.v).cwiseProduct(y_ue[k]);
        state.s1.segment(static_cast<Eigen::Index>(k) * n, n) = (dft * combined).cwiseAbs();
    }
    state.s2 = (dft * v.v).cwiseAbs();
    return state;
}

ActionSet make_dft_action_set(int n) { return {unitary_dft(n)}; }

int argmax_lowest(const VectorXd& q) {
    if (q.size() == 0)
        throw config_error("argmax of an empty vector");
    int best = 0;
    for (int i = 1; i < q.size(); ++i)
        if (q[i] > q[best])
            best = i;
    return best;
}

VectorXd one_hot_indicator(const VectorXd& q) {
    VectorXd e = VectorXd::Zero(q.size());
    e[argmax_lowest(q)] = 1.0;
    return e;
}

int select_action(const VectorXd& q, double epsilon, Rng& rng) {
    if (epsilon < 0.0 || epsilon > 1.0)
        throw config_error("epsilon must be in [0,1]");
    if (rng.uniform() < epsilon)
        return static_cast<int>(rng.uniform_index(static_cast<uint64_t>(q.size())));
    return argmax_lowest(q);
}

double adaptive_eta(double delta_rate) { return 0.1 * std::abs(delta_rate) + 0.01; }

PhaseShiftVector update_phase(const PhaseShiftVector& v, int action, double eta,
                              const ActionSet& actions) {
    if (action < 0 || action >= actions.num_actions())
        throw config_error("update_phase: action index out of range");
    if (v.size() != actions.directions.rows())
        throw config_error("update_phase: dimension mismatch");
    const VectorXcd moved = v.v + eta * actions.directions.col(action);
    PhaseShiftVector out;
    out.v.resize(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        // a zero-magnitude sum has no angle; keep the previous phase
        const std::complex<double>& m = moved[i];
        const double ref = m == std::complex<double>(0.0, 0.0) ? std::arg(v.v[i]) : std::arg(m);
        out.v[i] = std::polar(1.0, ref);
    }
    return out;
}

double reward_ratio(double rate_next, double rate_prev, double floor_rate) {
    if (rate_prev < floor_rate)
        rate_prev = floor_rate;
    return rate_next / rate_prev;
}

VectorXd target_q(const VectorXd& q, const VectorXd& q_next, int action, double reward,
                  double gamma) {
    if (q.size() != q_next.size())
        throw config_error("target_q: vector length mismatch");
    if (action < 0 || action >= q.size())
        throw config_error("target_q: action index out of range");
    VectorXd out = q;
    // q_next^T [[q_next]]_inf is exactly max(q_next)
    out[action] = reward + gamma * q_next.dot(one_hot_indicator(q_next));
    return out;
}

VectorXd normalize_target(const VectorXd& q_tilde, double eta, double gamma) {
    const Eigen::Index n = q_tilde.size();
    if (n < 2)
        throw config_error("normalize_target: need at least two actions");
    const double offset = 1.0 / (1.0 - gamma);
    const double mean = q_tilde.mean();
    const double var = (q_tilde.array() - mean).square().sum() / static_cast<double>(n);
    const double sd = std::sqrt(var);
    if (sd == 0.0)
        return VectorXd::Constant(n, offset);
    return ((q_tilde.array() - mean) * (eta / sd) + offset).matrix();
}

double td_loss(const VectorXd& q_check, const VectorXd& q_pred, int action) {
    if (q_check.size() != q_pred.size())
        throw config_error("td_loss: vector length mismatch");
    if (action < 0 || action >= q_check.size())
        throw config_error("td_loss: action index out of range");
    const double d = q_check[action] - q_pred[action];
    return d * d;
}

void AgentConfig::validate() const {
    if (gamma < 0.0 || gamma >= 1.0)
        throw config_error("gamma must be in [0,1)");
    if (epsilon_init < 0.0 || epsilon_init > 1.0 || epsilon_floor < 0.0 ||
        epsilon_floor > 1.0 || epsilon_decay <= 0.0 || epsilon_decay > 1.0)
        throw config_error("bad epsilon schedule");
    if (replay_capacity < 1 || batch_size < 1 || train_period < 1 || train_passes < 1)
        throw config_error("replay/batch/train settings must be >= 1");
    if (!(learning_rate > 0.0))
        throw config_error("learning_rate must be positive");
}

void ReplayBuffer::push(Transition t) {
    entries_.push_back(std::move(t));
    while (entries_.size() > capacity_)
        entries_.pop_front();
}

TrainStats train_cycle(const ReplayBuffer& buffer, nn::Network& net, const AgentConfig& cfg,
                       Rng& rng) {
    TrainStats stats;
    if (buffer.empty())
        return stats;

    const int na = net.spec().num_actions;
    std::vector<size_t> order(buffer.size());
    std::iota(order.begin(), order.end(), size_t{0});

    nn::OptimizerConfig opt;
    opt.learning_rate = cfg.learning_rate;

    double loss_acc = 0.0;
    for (int pass = 0; pass < cfg.train_passes; ++pass) {
        // Fisher-Yates on the run's own stream
        for (size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[rng.uniform_index(i)]);

        for (size_t start = 0; start < order.size(); start += static_cast<size_t>(cfg.batch_size)) {
            const size_t count = std::min(static_cast<size_t>(cfg.batch_size),
                                          order.size() - start);
            const Eigen::Index b = static_cast<Eigen::Index>(count);
            Eigen::MatrixXd s1(net.spec().s1_dim, b), s2(net.spec().s2_dim, b);
            Eigen::MatrixXd targets(na, b);
            std::vector<int> actions(count);

            for (size_t i = 0; i < count; ++i) {
                const Transition& tr = buffer[order[start + i]];
                s1.col(static_cast<Eigen::Index>(i)) = tr.state.s1;
                s2.col(static_cast<Eigen::Index>(i)) = tr.state.s2;
                actions[i] = tr.action;
                VectorXd q = tr.q;
                VectorXd q_next = tr.q_next;
                if (cfg.recompute_q_at_train) {
                    q = net.forward_eval(tr.state.s1, tr.state.s2);
                    q_next = net.forward_eval(tr.next_state.s1, tr.next_state.s2);
                }
                const VectorXd tq = target_q(q, q_next, tr.action, tr.reward, cfg.gamma);
                targets.col(static_cast<Eigen::Index>(i)) =
                    normalize_target(tq, tr.eta, cfg.gamma);
            }

            nn::Cache cache;
            const Eigen::MatrixXd q_pred = net.forward_train(s1, s2, rng, cache);
            Eigen::MatrixXd upstream = Eigen::MatrixXd::Zero(na, b);
            double batch_loss = 0.0;
            for (size_t i = 0; i < count; ++i) {
                const Eigen::Index col = static_cast<Eigen::Index>(i);
                const double diff = q_pred(actions[i], col) - targets(actions[i], col);
                batch_loss += diff * diff;
                upstream(actions[i], col) = 2.0 * diff / static_cast<double>(count);
            }
            batch_loss /= static_cast<double>(count);

            const nn::Gradients grads = net.backward(cache, upstream);
            net.apply_gradients(grads, opt);
            net.commit_running_stats(cache);

            loss_acc += batch_loss;
            stats.minibatches += 1;
        }
    }
    if (stats.minibatches > 0)
        stats.mean_loss = loss_acc / stats.minibatches;
    return stats;
}

} // namespace arisim
