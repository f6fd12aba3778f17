#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "arisim/errors.hpp"
#include "arisim/phy.hpp"

using namespace arisim;

namespace {

MatrixXcd random_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
    MatrixXcd m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i)
            m(i, j) = rng.cgaussian(1.0);
    return m;
}

VectorXcd random_vector(Rng& rng, Eigen::Index n) {
    VectorXcd v(n);
    for (Eigen::Index i = 0; i < n; ++i)
        v[i] = rng.cgaussian(1.0);
    return v;
}

PhaseShiftVector random_phases(Rng& rng, Eigen::Index n) {
    PhaseShiftVector v;
    v.v.resize(n);
    for (Eigen::Index i = 0; i < n; ++i)
        v.v[i] = std::polar(1.0, rng.uniform(0.0, 2.0 * M_PI));
    return v;
}

} // namespace

TEST_CASE("effective channel basis case") {
    const int n = 8, m = 4;
    MatrixXcd H_R = MatrixXcd::Zero(n, m);
    H_R(0, 0) = 1.0;
    VectorXcd h = VectorXcd::Zero(n);
    h[0] = 1.0;
    const VectorXcd eff = effective_channel(H_R, PhaseShiftVector::all_ones(n), h);
    REQUIRE(eff.size() == m);
    CHECK(std::abs(eff[0] - 1.0) <= 1e-15);
    for (Eigen::Index i = 1; i < m; ++i)
        CHECK(std::abs(eff[i]) <= 1e-15);
}

TEST_CASE("effective channel is linear in a global phase of v") {
    Rng rng(1);
    const MatrixXcd H_R = random_matrix(rng, 8, 4);
    const VectorXcd h = random_vector(rng, 8);
    PhaseShiftVector v = random_phases(rng, 8);
    const VectorXcd base = effective_channel(H_R, v, h);

    const std::complex<double> rot = std::polar(1.0, 0.83);
    PhaseShiftVector v2;
    v2.v = rot * v.v;
    const VectorXcd rotated = effective_channel(H_R, v2, h);
    CHECK((rotated - rot * base).norm() <= 1e-12 * base.norm());
}

TEST_CASE("effective channel matches the triple-loop oracle") {
    Rng rng(2);
    const MatrixXcd H_R = random_matrix(rng, 16, 4);
    const VectorXcd h = random_vector(rng, 16);
    const PhaseShiftVector v = random_phases(rng, 16);
    const VectorXcd eff = effective_channel(H_R, v, h);

    // brute force: eff[m] = sum_n conj(H_R(n,m)) v_n h_n
    for (Eigen::Index m = 0; m < 4; ++m) {
        std::complex<double> acc = 0.0;
        for (Eigen::Index n = 0; n < 16; ++n)
            acc += std::conj(H_R(n, m)) * v.v[n] * h[n];
        CHECK(std::abs(eff[m] - acc) <= 1e-12);
    }
}

TEST_CASE("mmse precoder reduces to a matched filter for one user") {
    Rng rng(3);
    const MatrixXcd H = random_matrix(rng, 4, 1);
    const Precoder f = mmse_precoder(H, TxConfig{});
    const double cosine = std::abs((H.col(0).adjoint() * f.F.col(0))(0)) /
                          (H.col(0).norm() * f.F.col(0).norm());
    CHECK(std::abs(cosine - 1.0) <= 1e-10);
}

TEST_CASE("mmse precoder approaches zero forcing as noise vanishes") {
    Rng rng(4);
    const MatrixXcd H = random_matrix(rng, 4, 2);
    TxConfig tx;
    tx.bs_power = 1.0;
    tx.noise_variance = 1e-15;
    const Precoder f = mmse_precoder(H, tx);
    const MatrixXcd cross = H.adjoint() * f.F;
    const double off = std::max(std::abs(cross(0, 1)), std::abs(cross(1, 0)));
    const double diag = std::min(std::abs(cross(0, 0)), std::abs(cross(1, 1)));
    CHECK(off / diag < 1e-6);
}

TEST_CASE("mmse precoder matches the direct-inversion oracle") {
    Rng rng(5);
    TxConfig tx;
    tx.bs_power = 2.0;
    tx.noise_variance = 0.3;
    for (int trial = 0; trial < 20; ++trial) {
        const MatrixXcd H = random_matrix(rng, 4, 2);
        const Precoder f = mmse_precoder(H, tx);

        const MatrixXcd gram =
            H.adjoint() * H + (2.0 * tx.noise_variance / tx.bs_power) * MatrixXcd::Identity(2, 2);
        MatrixXcd expected = H * gram.inverse();
        expected /= expected.norm();
        CHECK((f.F - expected).norm() <= 1e-10);
    }
}

TEST_CASE("mmse precoder surfaces a numeric error on a zero channel") {
    CHECK_THROWS_AS(mmse_precoder(MatrixXcd::Zero(4, 2), TxConfig{}), numeric_error);
}

TEST_CASE("zf precoder nulls inter-user interference") {
    Rng rng(6);
    for (int trial = 0; trial < 20; ++trial) {
        const MatrixXcd H = random_matrix(rng, 4, 3);
        const Precoder f = zf_precoder(H);
        CHECK(std::abs(f.F.norm() - 1.0) <= 1e-12);
        const MatrixXcd cross = H.adjoint() * f.F;
        for (Eigen::Index i = 0; i < 3; ++i)
            for (Eigen::Index j = 0; j < 3; ++j)
                if (i != j)
                    CHECK(std::abs(cross(i, j)) < 1e-10);
    }
}

TEST_CASE("zf and mmse coincide in direction for one user") {
    Rng rng(7);
    const MatrixXcd H = random_matrix(rng, 4, 1);
    const Precoder fz = zf_precoder(H);
    const Precoder fm = mmse_precoder(H, TxConfig{});
    const double cosine =
        std::abs((fz.F.col(0).adjoint() * fm.F.col(0))(0)) / (fz.F.norm() * fm.F.norm());
    CHECK(std::abs(cosine - 1.0) <= 1e-10);
}

TEST_CASE("zf precoder matches the pseudo-inverse oracle") {
    Rng rng(8);
    const MatrixXcd H = random_matrix(rng, 4, 2);
    const Precoder f = zf_precoder(H);

    // oracle: SVD pseudo-inverse of H^H
    Eigen::JacobiSVD<MatrixXcd> svd(H.adjoint(), Eigen::ComputeThinU | Eigen::ComputeThinV);
    MatrixXcd pinv = svd.matrixV() *
                     svd.singularValues().cwiseInverse().asDiagonal() * svd.matrixU().adjoint();
    pinv /= pinv.norm();
    CHECK((f.F - pinv).norm() <= 1e-10);
}

TEST_CASE("zf precoder rejects rank-deficient channels") {
    Rng rng(9);
    MatrixXcd H = random_matrix(rng, 4, 2);
    H.col(1) = H.col(0);
    CHECK_THROWS_AS(zf_precoder(H), numeric_error);
}

TEST_CASE("symbol draws have the stated second moments") {
    Rng rng(10);
    TxConfig tx;
    tx.bs_power = 1.0;
    tx.ue_power = 0.01;
    const int trials = 100000;

    MatrixXcd cov = MatrixXcd::Zero(2, 2);
    VectorXcd mean = VectorXcd::Zero(2);
    double x_power = 0.0;
    for (int i = 0; i < trials; ++i) {
        const Symbols sym = draw_symbols(rng, 2, tx);
        cov += sym.s * sym.s.adjoint();
        mean += sym.s;
        x_power += std::norm(sym.x[0]);
    }
    cov /= trials;
    mean /= trials;
    x_power /= trials;

    CHECK((cov - tx.bs_power * MatrixXcd::Identity(2, 2)).norm() <=
          0.02 * tx.bs_power * std::sqrt(2.0));
    // zero mean within 3 sigma: each complex mean has std sqrt(P/trials)
    const double bound = 3.0 * std::sqrt(tx.bs_power / trials);
    CHECK(std::abs(mean[0]) <= bound * 2.0);
    CHECK(std::abs(mean[1]) <= bound * 2.0);
    CHECK(x_power == doctest::Approx(tx.ue_power).epsilon(0.02));
}

TEST_CASE("dl_receive noise-free matched filter") {
    Rng rng(11);
    const VectorXcd h = random_vector(rng, 4);
    Precoder f;
    f.F = (h / h.norm()).eval();
    VectorXcd s(1);
    s[0] = std::complex<double>(0.7, -0.2);
    const std::complex<double> r = dl_receive(h, f, s, 0.0, rng);
    CHECK(std::abs(r - h.norm() * s[0]) <= 1e-12);
}

TEST_CASE("dl_receive over a zero channel is pure noise") {
    Rng rng(12);
    Precoder f;
    f.F = MatrixXcd::Identity(4, 2) / std::sqrt(2.0);
    const VectorXcd h = VectorXcd::Zero(4);
    const double sigma2 = 0.37;
    double acc = 0.0;
    const int trials = 100000;
    VectorXcd s = VectorXcd::Zero(2);
    for (int i = 0; i < trials; ++i)
        acc += std::norm(dl_receive(h, f, s, sigma2, rng));
    CHECK(acc / trials == doctest::Approx(sigma2).epsilon(0.02));
}

TEST_CASE("dl_receive is linear in the symbols at zero noise") {
    Rng rng(13);
    const VectorXcd h = random_vector(rng, 4);
    Precoder f;
    f.F = random_matrix(rng, 4, 2);
    f.F /= f.F.norm();
    const VectorXcd s1 = random_vector(rng, 2);
    const VectorXcd s2 = random_vector(rng, 2);
    const auto r1 = dl_receive(h, f, s1, 0.0, rng);
    const auto r2 = dl_receive(h, f, s2, 0.0, rng);
    const auto r12 = dl_receive(h, f, s1 + s2, 0.0, rng);
    CHECK(std::abs(r12 - (r1 + r2)) <= 1e-12);
}

TEST_CASE("sensing layout counts and contents") {
    const SensingLayout rc = sensing_first_row_col(8, 4);
    CHECK(rc.count() == 11);

    const SensingLayout deflt = sensing_first_row_col(4, 8);
    CHECK(deflt.count() == 11);
    // first column: indices 0..7 (i_hor = 0); first row: multiples of 8
    for (int iv = 0; iv < 8; ++iv)
        CHECK(std::count(deflt.indices.begin(), deflt.indices.end(), iv) == 1);
    for (int ih = 0; ih < 4; ++ih)
        CHECK(std::count(deflt.indices.begin(), deflt.indices.end(), ih * 8) == 1);

    CHECK(sensing_first_row_col(1, 1).count() == 1);
    CHECK(sensing_first_row_col(1, 1).indices[0] == 0);

    const SensingLayout expl = sensing_explicit({1, 5, 9}, 4, 8);
    CHECK(expl.indices == std::vector<int>{1, 5, 9});

    CHECK_THROWS_AS(sensing_explicit({32}, 4, 8), config_error);
    CHECK_THROWS_AS(sensing_explicit({3, 3}, 4, 8), config_error);
}

TEST_CASE("noise-free sensing equals exact row selection") {
    Rng rng(14);
    const MatrixXcd H_R = random_matrix(rng, 32, 4);
    Precoder f;
    f.F = random_matrix(rng, 4, 2);
    f.F /= f.F.norm();
    const VectorXcd s = random_vector(rng, 2);

    SUBCASE("full index set recovers the whole product") {
        std::vector<int> all(32);
        for (int i = 0; i < 32; ++i)
            all[static_cast<size_t>(i)] = i;
        const SensingLayout layout = sensing_explicit(all, 4, 8);
        const SenseResult res = ris_sense_bs(H_R, f, s, layout, 0.0, rng);
        CHECK(res.partial == res.full_noise_free);
        CHECK((res.full_noise_free - H_R * f.F * s).norm() <= 1e-14 * res.full_noise_free.norm());
    }

    SUBCASE("partial selection is bitwise") {
        const SensingLayout layout = sensing_first_row_col(4, 8);
        const SenseResult res = ris_sense_bs(H_R, f, s, layout, 0.0, rng);
        for (int i = 0; i < layout.count(); ++i)
            CHECK(res.partial[i] == res.full_noise_free[layout.indices[static_cast<size_t>(i)]]);
    }
}

TEST_CASE("sensing noise has the configured per-entry variance") {
    Rng rng(15);
    const SensingLayout layout = sensing_first_row_col(4, 8);
    const VectorXcd h = VectorXcd::Zero(32);
    const double sigma2 = 0.21;
    double acc = 0.0;
    const int trials = 100000;
    for (int i = 0; i < trials; ++i) {
        const SenseResult res = ris_sense_ue(h, 0.0, layout, sigma2, rng);
        acc += std::norm(res.partial[i % layout.count()]);
    }
    CHECK(acc / trials == doctest::Approx(sigma2).epsilon(0.02));
}

TEST_CASE("ue sensing scales with the uplink symbol") {
    Rng rng(16);
    const VectorXcd h = random_vector(rng, 32);
    const SensingLayout layout = sensing_first_row_col(4, 8);
    const std::complex<double> x{0.3, 1.1};
    const SenseResult res = ris_sense_ue(h, x, layout, 0.0, rng);
    for (int i = 0; i < layout.count(); ++i)
        CHECK(res.partial[i] == h[layout.indices[static_cast<size_t>(i)]] * x);

    const SenseResult zero = ris_sense_ue(h, 0.0, layout, 0.0, rng);
    CHECK(zero.partial.norm() == 0.0);
}

TEST_CASE("tx config rejects non-positive values") {
    TxConfig tx;
    tx.noise_variance = 0.0;
    CHECK_THROWS_AS(tx.validate(), config_error);
}
