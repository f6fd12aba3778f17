#include "arisim/neuralnet.hpp"

#include <atomic>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "arisim/errors.hpp"

namespace arisim::nn {

namespace {

std::atomic<uint64_t> g_network_constructions{0};

constexpr char kMagic[4] = {'A', 'R', 'N', 'N'};
constexpr uint32_t kFormatVersion = 1;

int pipeline_out_dim(const std::vector<LayerSpec>& layers, int in_dim) {
    int cur = in_dim;
    for (const auto& l : layers)
        cur = l.out;
    return cur;
}

void validate_pipeline(const std::vector<LayerSpec>& layers, int in_dim, const char* what) {
    int cur = in_dim;
    for (const auto& l : layers) {
        switch (l.kind) {
        case LayerKind::Dense:
            if (l.in != cur || l.out < 1)
                throw config_error(std::string(what) + ": dense layer width mismatch");
            cur = l.out;
            break;
        case LayerKind::BatchNorm:
            if (l.out != cur || !(l.hyper > 0.0) || !(l.hyper2 > 0.0) || l.hyper2 > 1.0)
                throw config_error(std::string(what) + ": bad batch-norm spec");
            break;
        case LayerKind::LeakyRelu:
            if (l.out != cur || !(l.hyper > 0.0))
                throw config_error(std::string(what) + ": leaky slope must be positive");
            break;
        case LayerKind::Dropout:
            if (l.out != cur || l.hyper < 0.0 || l.hyper >= 1.0)
                throw config_error(std::string(what) + ": dropout rate must be in [0,1)");
            break;
        }
    }
}

} // namespace

void NetworkSpec::validate() const {
    if (s1_dim < 1 || s2_dim < 1 || num_actions < 1)
        throw config_error("network spec: input/output dimensions must be >= 1");
    validate_pipeline(pipe1, s1_dim, "pipe1");
    validate_pipeline(pipe2, s2_dim, "pipe2");
    validate_pipeline(head, concat_dim(), "head");
    if (pipeline_out_dim(head, concat_dim()) != num_actions)
        throw config_error("network spec: head must end at num_actions");
}

int NetworkSpec::concat_dim() const {
    return pipeline_out_dim(pipe1, s1_dim) + pipeline_out_dim(pipe2, s2_dim);
}

NetworkSpec NetworkSpec::standard(int s1_dim, int s2_dim, int num_actions, int hidden1,
                                  int hidden2, int head_hidden, double slope, double dropout) {
    const double bn_eps = 1e-5;
    const double bn_momentum = 0.1;
    NetworkSpec spec;
    spec.s1_dim = s1_dim;
    spec.s2_dim = s2_dim;
    spec.num_actions = num_actions;
    spec.pipe1 = {{LayerKind::Dense, s1_dim, hidden1, 0.0, 0.0},
                  {LayerKind::BatchNorm, 0, hidden1, bn_eps, bn_momentum},
                  {LayerKind::LeakyRelu, 0, hidden1, slope, 0.0},
                  {LayerKind::Dropout, 0, hidden1, dropout, 0.0}};
    spec.pipe2 = {{LayerKind::Dense, s2_dim, hidden2, 0.0, 0.0},
                  {LayerKind::BatchNorm, 0, hidden2, bn_eps, bn_momentum},
                  {LayerKind::LeakyRelu, 0, hidden2, slope, 0.0},
                  {LayerKind::Dropout, 0, hidden2, dropout, 0.0}};
    spec.head = {{LayerKind::Dense, hidden1 + hidden2, head_hidden, 0.0, 0.0},
                 {LayerKind::LeakyRelu, 0, head_hidden, slope, 0.0},
                 {LayerKind::Dense, head_hidden, num_actions, 0.0, 0.0}};
    return spec;
}

Network::Network(NetworkSpec spec, Rng& rng) : spec_(std::move(spec)) {
    spec_.validate();
    g_network_constructions.fetch_add(1, std::memory_order_relaxed);

    auto init_pipeline = [&rng](const std::vector<LayerSpec>& specs) {
        std::vector<LayerParams> out;
        for (const auto& l : specs) {
            LayerParams p;
            if (l.kind == LayerKind::Dense) {
                const double bound = std::sqrt(6.0 / static_cast<double>(l.in));
                p.W.resize(l.out, l.in);
                for (Eigen::Index j = 0; j < p.W.cols(); ++j)
                    for (Eigen::Index i = 0; i < p.W.rows(); ++i)
                        p.W(i, j) = rng.uniform(-bound, bound);
                p.b = VectorXd::Zero(l.out);
            } else if (l.kind == LayerKind::BatchNorm) {
                p.scale = VectorXd::Ones(l.out);
                p.shift = VectorXd::Zero(l.out);
                p.running_mean = VectorXd::Zero(l.out);
                p.running_var = VectorXd::Ones(l.out);
            }
            out.push_back(std::move(p));
        }
        return out;
    };
    pipe1_ = init_pipeline(spec_.pipe1);
    pipe2_ = init_pipeline(spec_.pipe2);
    head_ = init_pipeline(spec_.head);
    allocate_adam();
}

void Network::allocate_adam() {
    adam_m_.clear();
    adam_v_.clear();
    for (const auto& t : trainable_views()) {
        adam_m_.push_back(VectorXd::Zero(t.size));
        adam_v_.push_back(VectorXd::Zero(t.size));
    }
    adam_t_ = 0;
}

namespace {

MatrixXd run_pipeline(const std::vector<LayerSpec>& specs, const std::vector<LayerParams>& params,
                      MatrixXd x, ForwardMode mode, Rng* rng, std::vector<LayerCache>* cache,
                      const std::vector<LayerCache>* frozen) {
    for (size_t i = 0; i < specs.size(); ++i) {
        const auto& spec = specs[i];
        const auto& p = params[i];
        LayerCache lc;
        switch (spec.kind) {
        case LayerKind::Dense: {
            if (cache)
                lc.input = x;
            x = (p.W * x).colwise() + p.b;
            break;
        }
        case LayerKind::BatchNorm: {
            const Eigen::Index batch = x.cols();
            const double eps = spec.hyper;
            if (mode == ForwardMode::Train && batch > 1) {
                const VectorXd mu = x.rowwise().mean();
                const MatrixXd centered = x.colwise() - mu;
                const VectorXd var = centered.array().square().rowwise().mean();
                const Eigen::ArrayXd inv_std = (var.array() + eps).sqrt().inverse();
                MatrixXd xhat = centered.array().colwise() * inv_std;
                x = (xhat.array().colwise() * p.scale.array()).colwise() + p.shift.array();
                if (cache) {
                    lc.mu = mu;
                    lc.var = var;
                    lc.xhat = std::move(xhat);
                    lc.used_running = false;
                }
            } else {
                // eval mode, or a single-sample train batch (falls back to the
                // running statistics so the variance stays well defined)
                const Eigen::ArrayXd inv_std = (p.running_var.array() + eps).sqrt().inverse();
                MatrixXd xhat = (x.colwise() - p.running_mean).array().colwise() * inv_std;
                x = (xhat.array().colwise() * p.scale.array()).colwise() + p.shift.array();
                if (cache) {
                    lc.xhat = std::move(xhat);
                    lc.used_running = true;
                }
            }
            break;
        }
        case LayerKind::LeakyRelu: {
            if (cache)
                lc.input = x;
            x = x.array().max(spec.hyper * x.array());
            break;
        }
        case LayerKind::Dropout: {
            if (mode == ForwardMode::Train && spec.hyper > 0.0) {
                if (frozen) {
                    lc.mask = (*frozen)[i].mask;
                } else {
                    const double keep_scale = 1.0 / (1.0 - spec.hyper);
                    lc.mask.resize(x.rows(), x.cols());
                    for (Eigen::Index c = 0; c < x.cols(); ++c)
                        for (Eigen::Index r = 0; r < x.rows(); ++r)
                            lc.mask(r, c) = rng->uniform() >= spec.hyper ? keep_scale : 0.0;
                }
                x = x.cwiseProduct(lc.mask);
            }
            break;
        }
        }
        if (cache)
            (*cache)[i] = std::move(lc);
    }
    return x;
}

MatrixXd concat_rows(const MatrixXd& a, const MatrixXd& b) {
    MatrixXd c(a.rows() + b.rows(), a.cols());
    c.topRows(a.rows()) = a;
    c.bottomRows(b.rows()) = b;
    return c;
}

} // namespace

MatrixXd Network::forward_eval(const MatrixXd& s1, const MatrixXd& s2) const {
    if (s1.rows() != spec_.s1_dim || s2.rows() != spec_.s2_dim || s1.cols() != s2.cols())
        throw config_error("forward: input dimensions do not match the architecture");
    MatrixXd a = run_pipeline(spec_.pipe1, pipe1_, s1, ForwardMode::Eval, nullptr, nullptr, nullptr);
    MatrixXd b = run_pipeline(spec_.pipe2, pipe2_, s2, ForwardMode::Eval, nullptr, nullptr, nullptr);
    return run_pipeline(spec_.head, head_, concat_rows(a, b), ForwardMode::Eval, nullptr, nullptr,
                        nullptr);
}

VectorXd Network::forward_eval(const VectorXd& s1, const VectorXd& s2) const {
    return forward_eval(MatrixXd(s1), MatrixXd(s2)).col(0);
}

MatrixXd Network::forward_train(const MatrixXd& s1, const MatrixXd& s2, Rng& rng, Cache& cache,
                                const Cache* frozen_masks) const {
    if (s1.rows() != spec_.s1_dim || s2.rows() != spec_.s2_dim || s1.cols() != s2.cols())
        throw config_error("forward: input dimensions do not match the architecture");
    cache = Cache{};
    cache.batch = s1.cols();
    cache.params_version = version_;
    cache.s1 = s1;
    cache.s2 = s2;
    cache.pipe1.resize(spec_.pipe1.size());
    cache.pipe2.resize(spec_.pipe2.size());
    cache.head.resize(spec_.head.size());
    cache.out1 = run_pipeline(spec_.pipe1, pipe1_, s1, ForwardMode::Train, &rng, &cache.pipe1,
                              frozen_masks ? &frozen_masks->pipe1 : nullptr);
    cache.out2 = run_pipeline(spec_.pipe2, pipe2_, s2, ForwardMode::Train, &rng, &cache.pipe2,
                              frozen_masks ? &frozen_masks->pipe2 : nullptr);
    return run_pipeline(spec_.head, head_, concat_rows(cache.out1, cache.out2),
                        ForwardMode::Train, &rng, &cache.head,
                        frozen_masks ? &frozen_masks->head : nullptr);
}

namespace {

// walks one pipeline backward; returns the gradient w.r.t. the pipeline input
MatrixXd backprop_pipeline(const std::vector<LayerSpec>& specs,
                           const std::vector<LayerParams>& params,
                           const std::vector<LayerCache>& cache, MatrixXd dy,
                           std::vector<LayerParams>& grads) {
    grads.resize(specs.size());
    for (size_t ii = specs.size(); ii-- > 0;) {
        const auto& spec = specs[ii];
        const auto& p = params[ii];
        const auto& lc = cache[ii];
        LayerParams& g = grads[ii];
        switch (spec.kind) {
        case LayerKind::Dense: {
            g.W.noalias() = dy * lc.input.transpose();
            g.b = dy.rowwise().sum();
            dy = p.W.transpose() * dy;
            break;
        }
        case LayerKind::BatchNorm: {
            g.scale = dy.cwiseProduct(lc.xhat).rowwise().sum();
            g.shift = dy.rowwise().sum();
            const double eps = spec.hyper;
            if (lc.used_running) {
                const Eigen::ArrayXd inv_std = (p.running_var.array() + eps).sqrt().inverse();
                dy = dy.array().colwise() * (p.scale.array() * inv_std);
            } else {
                const Eigen::Index batch = lc.xhat.cols();
                const double inv_b = 1.0 / static_cast<double>(batch);
                const Eigen::ArrayXd inv_std = (lc.var.array() + eps).sqrt().inverse();
                const MatrixXd dxhat = dy.array().colwise() * p.scale.array();
                const MatrixXd centered = lc.xhat.array().colwise() / inv_std;
                const VectorXd dvar =
                    (dxhat.cwiseProduct(centered).rowwise().sum().array() * (-0.5) *
                     inv_std.pow(3))
                        .matrix();
                const VectorXd dmu =
                    (-(dxhat.rowwise().sum().array()) * inv_std +
                     dvar.array() * (-2.0 * inv_b) * centered.rowwise().sum().array())
                        .matrix();
                dy = (dxhat.array().colwise() * inv_std +
                      (centered.array().colwise() * dvar.array()) * (2.0 * inv_b))
                         .matrix();
                dy = (dy.array().colwise() + dmu.array() * inv_b).matrix();
            }
            break;
        }
        case LayerKind::LeakyRelu: {
            dy = dy.cwiseProduct(
                (lc.input.array() > 0.0).select(MatrixXd::Ones(dy.rows(), dy.cols()),
                                                MatrixXd::Constant(dy.rows(), dy.cols(),
                                                                   spec.hyper)));
            break;
        }
        case LayerKind::Dropout: {
            if (lc.mask.size() > 0)
                dy = dy.cwiseProduct(lc.mask);
            break;
        }
        }
    }
    return dy;
}

} // namespace

Gradients Network::backward(const Cache& cache, const MatrixXd& upstream) const {
    if (cache.params_version != version_)
        throw config_error("backward: cache is stale, parameters changed since the forward pass");
    if (upstream.rows() != spec_.num_actions || upstream.cols() != cache.batch)
        throw config_error("backward: upstream gradient has the wrong shape");

    Gradients grads;
    MatrixXd d_concat = backprop_pipeline(spec_.head, head_, cache.head, upstream, grads.head);
    const Eigen::Index h1 = cache.out1.rows();
    backprop_pipeline(spec_.pipe1, pipe1_, cache.pipe1, d_concat.topRows(h1), grads.pipe1);
    backprop_pipeline(spec_.pipe2, pipe2_, cache.pipe2, d_concat.bottomRows(d_concat.rows() - h1),
                      grads.pipe2);
    return grads;
}

void Network::commit_running_stats(const Cache& cache) {
    auto commit = [](const std::vector<LayerSpec>& specs, std::vector<LayerParams>& params,
                     const std::vector<LayerCache>& lcs, Eigen::Index batch) {
        for (size_t i = 0; i < specs.size(); ++i) {
            if (specs[i].kind != LayerKind::BatchNorm || lcs[i].used_running)
                continue;
            const double m = specs[i].hyper2;
            // unbiased batch variance feeds the running estimate
            const double bessel = static_cast<double>(batch) / static_cast<double>(batch - 1);
            params[i].running_mean = (1.0 - m) * params[i].running_mean + m * lcs[i].mu;
            params[i].running_var =
                (1.0 - m) * params[i].running_var + m * bessel * lcs[i].var;
        }
    };
    commit(spec_.pipe1, pipe1_, cache.pipe1, cache.batch);
    commit(spec_.pipe2, pipe2_, cache.pipe2, cache.batch);
    commit(spec_.head, head_, cache.head, cache.batch);
}

std::vector<TensorView> Network::trainable_views() {
    std::vector<TensorView> views;
    auto add = [&views](const std::string& prefix, std::vector<LayerParams>& params,
                        const std::vector<LayerSpec>& specs) {
        for (size_t i = 0; i < params.size(); ++i) {
            const std::string base = prefix + "." + std::to_string(i);
            if (specs[i].kind == LayerKind::Dense) {
                views.push_back({base + ".W", params[i].W.data(), params[i].W.size()});
                views.push_back({base + ".b", params[i].b.data(), params[i].b.size()});
            } else if (specs[i].kind == LayerKind::BatchNorm) {
                views.push_back({base + ".scale", params[i].scale.data(), params[i].scale.size()});
                views.push_back({base + ".shift", params[i].shift.data(), params[i].shift.size()});
            }
        }
    };
    add("pipe1", pipe1_, spec_.pipe1);
    add("pipe2", pipe2_, spec_.pipe2);
    add("head", head_, spec_.head);
    return views;
}

std::vector<TensorView> Network::trainable_views(Gradients& grads) const {
    // gradients mirror the parameter layout; reuse the same traversal
    std::vector<TensorView> views;
    auto add = [&views](const std::string& prefix, std::vector<LayerParams>& params,
                        const std::vector<LayerSpec>& specs) {
        for (size_t i = 0; i < params.size(); ++i) {
            const std::string base = prefix + "." + std::to_string(i);
            if (specs[i].kind == LayerKind::Dense) {
                views.push_back({base + ".W", params[i].W.data(), params[i].W.size()});
                views.push_back({base + ".b", params[i].b.data(), params[i].b.size()});
            } else if (specs[i].kind == LayerKind::BatchNorm) {
                views.push_back({base + ".scale", params[i].scale.data(), params[i].scale.size()});
                views.push_back({base + ".shift", params[i].shift.data(), params[i].shift.size()});
            }
        }
    };
    add("pipe1", grads.pipe1, spec_.pipe1);
    add("pipe2", grads.pipe2, spec_.pipe2);
    add("head", grads.head, spec_.head);
    return views;
}

void Network::apply_gradients(const Gradients& grads, const OptimizerConfig& opt) {
    Gradients& g = const_cast<Gradients&>(grads);
    const auto grad_views = trainable_views(g);
    const auto param_views = trainable_views();
    if (grad_views.size() != param_views.size())
        throw config_error("apply_gradients: gradient layout mismatch");

    adam_t_ += 1;
    const double corr1 = 1.0 - std::pow(opt.beta1, static_cast<double>(adam_t_));
    const double corr2 = 1.0 - std::pow(opt.beta2, static_cast<double>(adam_t_));
    for (size_t i = 0; i < param_views.size(); ++i) {
        if (grad_views[i].size != param_views[i].size)
            throw config_error("apply_gradients: tensor size mismatch at " + param_views[i].name);
        Eigen::Map<VectorXd> theta(param_views[i].data, param_views[i].size);
        Eigen::Map<const VectorXd> grad(grad_views[i].data, grad_views[i].size);
        if (!grad.allFinite())
            throw numeric_error("apply_gradients: non-finite gradient in " + param_views[i].name);
        VectorXd& m = adam_m_[i];
        VectorXd& v = adam_v_[i];
        m = opt.beta1 * m + (1.0 - opt.beta1) * grad;
        v = opt.beta2 * v + (1.0 - opt.beta2) * grad.cwiseProduct(grad);
        theta.array() -= opt.learning_rate * (m.array() / corr1) /
                         ((v.array() / corr2).sqrt() + opt.epsilon);
    }
    version_ += 1;
}

// ---------------------------------------------------------------------------
// checkpoint io

namespace {

template <typename T> void write_pod(std::ostream& out, T value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T> T read_pod(std::istream& in) {
    T value{};
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in)
        throw config_error("parameter file truncated");
    return value;
}

void write_vec(std::ostream& out, const VectorXd& v) {
    out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size()) * 8);
}

void read_vec(std::istream& in, VectorXd& v) {
    in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(v.size()) * 8);
    if (!in)
        throw config_error("parameter file truncated");
}

void write_layers(std::ostream& out, const std::vector<LayerSpec>& layers) {
    write_pod<uint32_t>(out, static_cast<uint32_t>(layers.size()));
    for (const auto& l : layers) {
        write_pod<uint32_t>(out, static_cast<uint32_t>(l.kind));
        write_pod<int32_t>(out, l.in);
        write_pod<int32_t>(out, l.out);
        write_pod<double>(out, l.hyper);
        write_pod<double>(out, l.hyper2);
    }
}

std::vector<LayerSpec> read_layers(std::istream& in) {
    const uint32_t n = read_pod<uint32_t>(in);
    if (n > 1024)
        throw config_error("parameter file header is implausible");
    std::vector<LayerSpec> layers(n);
    for (auto& l : layers) {
        const uint32_t kind = read_pod<uint32_t>(in);
        if (kind > 3)
            throw config_error("parameter file names an unknown layer kind");
        l.kind = static_cast<LayerKind>(kind);
        l.in = read_pod<int32_t>(in);
        l.out = read_pod<int32_t>(in);
        l.hyper = read_pod<double>(in);
        l.hyper2 = read_pod<double>(in);
    }
    return layers;
}

} // namespace

void Network::save(std::ostream& out) const {
    out.write(kMagic, 4);
    write_pod<uint32_t>(out, kFormatVersion);
    write_pod<int32_t>(out, spec_.s1_dim);
    write_pod<int32_t>(out, spec_.s2_dim);
    write_pod<int32_t>(out, spec_.num_actions);
    write_layers(out, spec_.pipe1);
    write_layers(out, spec_.pipe2);
    write_layers(out, spec_.head);

    auto dump = [&out](const std::vector<LayerSpec>& specs, const std::vector<LayerParams>& ps) {
        for (size_t i = 0; i < specs.size(); ++i) {
            if (specs[i].kind == LayerKind::Dense) {
                out.write(reinterpret_cast<const char*>(ps[i].W.data()),
                          static_cast<std::streamsize>(ps[i].W.size()) * 8);
                write_vec(out, ps[i].b);
            } else if (specs[i].kind == LayerKind::BatchNorm) {
                write_vec(out, ps[i].scale);
                write_vec(out, ps[i].shift);
                write_vec(out, ps[i].running_mean);
                write_vec(out, ps[i].running_var);
            }
        }
    };
    dump(spec_.pipe1, pipe1_);
    dump(spec_.pipe2, pipe2_);
    dump(spec_.head, head_);

    write_pod<uint64_t>(out, adam_t_);
    for (const auto& m : adam_m_)
        write_vec(out, m);
    for (const auto& v : adam_v_)
        write_vec(out, v);
    if (!out)
        throw numeric_error("failed to write the parameter file");
}

Network Network::load(std::istream& in, const NetworkSpec* expected) {
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0)
        throw config_error("not a network parameter file (bad magic)");
    const uint32_t version = read_pod<uint32_t>(in);
    if (version != kFormatVersion)
        throw config_error("unsupported parameter file version " + std::to_string(version));

    NetworkSpec spec;
    spec.s1_dim = read_pod<int32_t>(in);
    spec.s2_dim = read_pod<int32_t>(in);
    spec.num_actions = read_pod<int32_t>(in);
    spec.pipe1 = read_layers(in);
    spec.pipe2 = read_layers(in);
    spec.head = read_layers(in);
    spec.validate();
    if (expected && !(*expected == spec))
        throw config_error("parameter file was trained for a different architecture; refusing to "
                           "load it");

    Network net;
    net.spec_ = spec;
    Rng dummy(0);
    auto alloc = [&dummy](const std::vector<LayerSpec>& specs) {
        std::vector<LayerParams> ps;
        for (const auto& l : specs) {
            LayerParams p;
            if (l.kind == LayerKind::Dense) {
                p.W = MatrixXd::Zero(l.out, l.in);
                p.b = VectorXd::Zero(l.out);
            } else if (l.kind == LayerKind::BatchNorm) {
                p.scale = VectorXd::Zero(l.out);
                p.shift = VectorXd::Zero(l.out);
                p.running_mean = VectorXd::Zero(l.out);
                p.running_var = VectorXd::Zero(l.out);
            }
            ps.push_back(std::move(p));
        }
        return ps;
    };
    net.pipe1_ = alloc(spec.pipe1);
    net.pipe2_ = alloc(spec.pipe2);
    net.head_ = alloc(spec.head);
    g_network_constructions.fetch_add(1, std::memory_order_relaxed);

    auto slurp = [&in](const std::vector<LayerSpec>& specs, std::vector<LayerParams>& ps) {
        for (size_t i = 0; i < specs.size(); ++i) {
            if (specs[i].kind == LayerKind::Dense) {
                in.read(reinterpret_cast<char*>(ps[i].W.data()),
                        static_cast<std::streamsize>(ps[i].W.size()) * 8);
                read_vec(in, ps[i].b);
            } else if (specs[i].kind == LayerKind::BatchNorm) {
                read_vec(in, ps[i].scale);
                read_vec(in, ps[i].shift);
                read_vec(in, ps[i].running_mean);
                read_vec(in, ps[i].running_var);
            }
            if (!in)
                throw config_error("parameter file truncated");
        }
    };
    slurp(spec.pipe1, net.pipe1_);
    slurp(spec.pipe2, net.pipe2_);
    slurp(spec.head, net.head_);

    net.allocate_adam();
    net.adam_t_ = read_pod<uint64_t>(in);
    for (auto& m : net.adam_m_)
        read_vec(in, m);
    for (auto& v : net.adam_v_)
        read_vec(in, v);
    return net;
}

void Network::save_file(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw config_error("cannot open " + path + " for writing");
    save(out);
}

Network Network::load_file(const std::string& path, const NetworkSpec* expected) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw config_error("cannot open " + path);
    return load(in, expected);
}

uint64_t network_construction_count() {
    return g_network_constructions.load(std::memory_order_relaxed);
}

// ---------------------------------------------------------------------------
// finite differences

GradCheckReport finite_difference_check(const NetworkSpec& spec, int batch, uint64_t seed,
                                        double step) {
    Rng rng(seed);
    Network net(spec, rng);

    MatrixXd s1(spec.s1_dim, batch), s2(spec.s2_dim, batch);
    for (Eigen::Index c = 0; c < batch; ++c) {
        for (Eigen::Index r = 0; r < s1.rows(); ++r)
            s1(r, c) = std::abs(rng.gaussian());
        for (Eigen::Index r = 0; r < s2.rows(); ++r)
            s2(r, c) = std::abs(rng.gaussian());
    }
    std::vector<int> actions(static_cast<size_t>(batch));
    VectorXd targets(batch);
    for (int b = 0; b < batch; ++b) {
        actions[static_cast<size_t>(b)] = static_cast<int>(rng.uniform_index(
            static_cast<uint64_t>(spec.num_actions)));
        targets[b] = 10.0 + rng.gaussian();
    }

    // one pass to fix the dropout masks, reused by every evaluation below
    Cache mask_cache;
    net.forward_train(s1, s2, rng, mask_cache);

    auto loss_of = [&](Cache& cache) {
        Rng unused(0);
        const MatrixXd q = net.forward_train(s1, s2, unused, cache, &mask_cache);
        double loss = 0.0;
        for (int b = 0; b < batch; ++b)
            loss += std::pow(q(actions[static_cast<size_t>(b)], b) - targets[b], 2);
        return loss / static_cast<double>(batch);
    };

    Cache cache;
    const double base_loss = loss_of(cache);
    (void)base_loss;
    MatrixXd upstream = MatrixXd::Zero(spec.num_actions, batch);
    {
        Rng unused(0);
        Cache c2;
        const MatrixXd q = net.forward_train(s1, s2, unused, c2, &mask_cache);
        for (int b = 0; b < batch; ++b)
            upstream(actions[static_cast<size_t>(b)], b) =
                2.0 * (q(actions[static_cast<size_t>(b)], b) - targets[b]) /
                static_cast<double>(batch);
    }
    const Gradients analytic = net.backward(cache, upstream);

    GradCheckReport report;
    Gradients& mutable_analytic = const_cast<Gradients&>(analytic);
    const auto grad_views = net.trainable_views(mutable_analytic);
    const auto param_views = net.trainable_views();
    for (size_t t = 0; t < param_views.size(); ++t) {
        for (Eigen::Index i = 0; i < param_views[t].size; ++i) {
            double& theta = param_views[t].data[i];
            const double saved = theta;
            Cache scratch;
            theta = saved + step;
            const double lp = loss_of(scratch);
            theta = saved - step;
            const double lm = loss_of(scratch);
            theta = saved;
            const double g_fd = (lp - lm) / (2.0 * step);
            const double g_an = grad_views[t].data[i];
            const double rel = std::abs(g_an - g_fd) /
                               std::max(std::abs(g_an) + std::abs(g_fd), 1e-6);
            report.checked += 1;
            if (rel > report.max_rel_error) {
                report.max_rel_error = rel;
                report.worst_tensor = param_views[t].name;
                report.worst_index = i;
            }
        }
    }
    return report;
}

} // namespace arisim::nn
