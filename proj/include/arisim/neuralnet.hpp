#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "arisim/rng.hpp"

namespace arisim::nn {

using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class LayerKind : uint32_t { Dense = 0, BatchNorm = 1, LeakyRelu = 2, Dropout = 3 };

/// One layer of a pipeline. `out` is the feature width of the layer output;
/// dense layers also carry `in`. `hyper` is the leaky slope / dropout rate /
/// batch-norm epsilon, `hyper2` the batch-norm running-stat momentum.
struct LayerSpec {
    LayerKind kind = LayerKind::Dense;
    int in = 0;
    int out = 0;
    double hyper = 0.0;
    double hyper2 = 0.0;

    bool operator==(const LayerSpec&) const = default;
};

/// The two-pipeline topology: pipe1 consumes s1, pipe2 consumes s2, their
/// outputs concatenate and pass through the head.
struct NetworkSpec {
    int s1_dim = 0;
    int s2_dim = 0;
    int num_actions = 0;
    std::vector<LayerSpec> pipe1, pipe2, head;

    bool operator==(const NetworkSpec&) const = default;
    void validate() const;
    int concat_dim() const;

    /// dense->batch_norm->leaky_relu->dropout per input pipeline, then
    /// dense->leaky_relu->dense(num_actions) as the head.
    static NetworkSpec standard(int s1_dim, int s2_dim, int num_actions, int hidden1 = 128,
                                int hidden2 = 64, int head_hidden = 128, double slope = 0.01,
                                double dropout = 0.2);
};

enum class ForwardMode { Train, Eval };

/// Per-layer parameter block; fields are empty for kinds that do not use them.
struct LayerParams {
    MatrixXd W; // dense
    VectorXd b;
    VectorXd scale, shift, running_mean, running_var; // batch norm
};

struct Gradients {
    std::vector<LayerParams> pipe1, pipe2, head;
};

/// Activation cache captured by a train-mode forward pass; holds everything
/// backward needs, including the dropout masks (reused verbatim when a cache
/// is passed back in as `frozen_masks`).
struct LayerCache {
    MatrixXd input;
    MatrixXd mask;          // dropout, includes the 1/(1-rate) survivor scaling
    VectorXd mu, var;       // batch norm batch statistics
    MatrixXd xhat;
    bool used_running = false; // single-sample fallback
};

struct Cache {
    std::vector<LayerCache> pipe1, pipe2, head;
    MatrixXd s1, s2;
    MatrixXd out1, out2; // pipeline outputs feeding the concat
    Eigen::Index batch = 0;
    uint64_t params_version = 0;
};

struct OptimizerConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// Mutable view of one trainable tensor (contiguous storage).
struct TensorView {
    std::string name;
    double* data = nullptr;
    Eigen::Index size = 0;
};

/// q = f(s1, s2): the two-pipeline feedforward network with hand-derived
/// gradients. Samples are columns. Parameters, batch-norm running statistics
/// and the optimizer moment buffers all live here.
class Network {
  public:
    Network(NetworkSpec spec, Rng& rng);

    const NetworkSpec& spec() const { return spec_; }
    uint64_t params_version() const { return version_; }

    /// Deterministic inference with running batch-norm statistics.
    MatrixXd forward_eval(const MatrixXd& s1, const MatrixXd& s2) const;
    VectorXd forward_eval(const VectorXd& s1, const VectorXd& s2) const;

    /// Train-mode pass: batch statistics, active dropout. Fresh masks come
    /// from `rng` unless `frozen_masks` replays a previous cache. Running
    /// statistics are not touched; commit_running_stats applies them.
    MatrixXd forward_train(const MatrixXd& s1, const MatrixXd& s2, Rng& rng, Cache& cache,
                           const Cache* frozen_masks = nullptr) const;

    /// Exact parameter gradients for the scalar loss whose derivative w.r.t.
    /// the network output is `upstream` (num_actions x batch). Throws when the
    /// cache predates the latest parameter update.
    Gradients backward(const Cache& cache, const MatrixXd& upstream) const;

    /// Momentum update of the batch-norm running statistics from the batch
    /// statistics recorded in `cache`.
    void commit_running_stats(const Cache& cache);

    /// Adam step. Throws numeric_error on non-finite gradients.
    void apply_gradients(const Gradients& grads, const OptimizerConfig& opt);

    /// Trainable tensors in declaration order (pipe1, pipe2, head; W before b,
    /// scale before shift). Running statistics are not trainable.
    std::vector<TensorView> trainable_views();
    std::vector<TensorView> trainable_views(Gradients& grads) const;

    uint64_t adam_step_count() const { return adam_t_; }

    /// Versioned binary checkpoint; bit-exact round trip of parameters,
    /// running statistics and optimizer moments. Layout documented in the
    /// README. load() refuses version or architecture mismatches.
    void save(std::ostream& out) const;
    static Network load(std::istream& in, const NetworkSpec* expected = nullptr);
    void save_file(const std::string& path) const;
    static Network load_file(const std::string& path, const NetworkSpec* expected = nullptr);

  private:
    Network() = default;
    void allocate_adam();

    NetworkSpec spec_;
    std::vector<LayerParams> pipe1_, pipe2_, head_;
    std::vector<VectorXd> adam_m_, adam_v_;
    uint64_t adam_t_ = 0;
    uint64_t version_ = 0;
};

/// Process-wide count of Network constructions (instrumentation for the
/// agent-free experiment arm).
uint64_t network_construction_count();

/// Central-difference verification of backward() over every trainable
/// parameter of `spec`, frozen dropout masks, double precision.
struct GradCheckReport {
    double max_rel_error = 0.0;
    std::string worst_tensor;
    Eigen::Index worst_index = 0;
    Eigen::Index checked = 0;
};

GradCheckReport finite_difference_check(const NetworkSpec& spec, int batch = 4,
                                        uint64_t seed = 2024, double step = 1e-5);

} // namespace arisim::nn
