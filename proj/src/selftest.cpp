#include <cmath>
#include <sstream>

#include "arisim/agent.hpp"
#include "arisim/geometry.hpp"
#include "arisim/harness.hpp"
#include "arisim/phy.hpp"
#include "arisim/rate.hpp"

namespace arisim {

namespace {

struct Checker {
    std::vector<std::string> lines;
    int failures = 0;

    void check(const std::string& name, bool ok) {
        lines.push_back(std::string(ok ? "ok   " : "FAIL ") + name);
        if (!ok)
            ++failures;
    }
};

} // namespace

std::vector<std::string> selftest(int& failures) {
    Checker c;
    Rng rng(7);

    {
        double worst = 0.0;
        for (int trial = 0; trial < 50; ++trial) {
            const VectorXcd a = upa_response(rng.uniform(0.0, M_PI), rng.uniform(0.0, M_PI), 4, 8);
            for (Eigen::Index i = 0; i < a.size(); ++i)
                worst = std::max(worst, std::abs(std::abs(a[i]) - 1.0));
        }
        c.check("steering vectors are unit modulus (<= 1e-12)", worst <= 1e-12);
    }
    {
        const double th = 0.7, tv = 2.1;
        const VectorXcd a = upa_response(th, tv, 4, 8);
        double worst = 0.0;
        for (int ih = 0; ih < 4; ++ih)
            for (int iv = 0; iv < 8; ++iv) {
                const std::complex<double> expect =
                    std::exp(std::complex<double>(0, M_PI * (ih * std::cos(th) * std::sin(tv) +
                                                             iv * std::cos(tv))));
                worst = std::max(worst, std::abs(a[ih * 8 + iv] - expect));
            }
        c.check("UPA response matches the explicit Kronecker product", worst <= 1e-12);
    }
    {
        MatrixXcd h(4, 2);
        for (Eigen::Index j = 0; j < 2; ++j)
            for (Eigen::Index i = 0; i < 4; ++i)
                h(i, j) = rng.cgaussian(1.0);
        const Precoder f = zf_precoder(h);
        const MatrixXcd cross = h.adjoint() * f.F;
        double worst_off = 0.0;
        for (Eigen::Index i = 0; i < 2; ++i)
            for (Eigen::Index j = 0; j < 2; ++j)
                if (i != j)
                    worst_off = std::max(worst_off, std::abs(cross(i, j)));
        c.check("ZF precoder nulls inter-user interference (< 1e-10)", worst_off < 1e-10);
        c.check("ZF precoder has unit Frobenius norm", std::abs(f.F.norm() - 1.0) <= 1e-12);
        const Precoder fm = mmse_precoder(h, TxConfig{});
        c.check("MMSE precoder has unit Frobenius norm", std::abs(fm.F.norm() - 1.0) <= 1e-12);
    }
    {
        bool ok = true;
        for (int trial = 0; trial < 20; ++trial) {
            VectorXd qt(8);
            for (int i = 0; i < 8; ++i)
                qt[i] = rng.gaussian() * 5.0;
            const double eta = 0.01 + rng.uniform();
            const VectorXd qc = normalize_target(qt, eta, 0.9);
            const double mean = qc.mean();
            const double sd = std::sqrt((qc.array() - mean).square().sum() / qc.size());
            ok = ok && std::abs(mean - 10.0) <= 1e-9 && std::abs(sd - eta) <= 1e-9;
        }
        c.check("normalized target has mean 1/(1-gamma) and std eta", ok);
    }
    {
        const ActionSet actions = make_dft_action_set(32);
        PhaseShiftVector v = PhaseShiftVector::all_ones(32);
        double worst = 0.0;
        for (int t = 0; t < 1000; ++t) {
            v = update_phase(v, static_cast<int>(rng.uniform_index(32)), rng.uniform(), actions);
            worst = std::max(worst, v.modulus_error());
        }
        c.check("phase updates preserve unit modulus (<= 1e-12)", worst <= 1e-12);
    }
    {
        VectorXd q(3);
        q << 0.5, 2.0, 1.0;
        const VectorXd qt = target_q(q, q, 0, 1.1, 0.9);
        c.check("target Q touches exactly one coordinate",
                qt[1] == q[1] && qt[2] == q[2] && std::abs(qt[0] - (1.1 + 0.9 * 2.0)) <= 1e-12);
    }
    c.check("first row and column of a 4x8 UPA give 11 sensing elements",
            sensing_first_row_col(4, 8).count() == 11);
    {
        bool ok = true;
        try {
            ExperimentConfig cfg;
            cfg.validate();
        } catch (const std::exception&) {
            ok = false;
        }
        c.check("default configuration validates", ok);
    }
    {
        ExperimentConfig cfg;
        cfg.arm = "random";
        cfg.steps = 3;
        cfg.seed = 11;
        std::ostringstream a, b;
        emit_csv(run_episode(cfg), a);
        emit_csv(run_episode(cfg), b);
        c.check("repeated runs are byte identical", a.str() == b.str());
    }

    failures = c.failures;
    return c.lines;
}

} // namespace arisim
