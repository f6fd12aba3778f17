#include "arisim/phy.hpp"

#include <algorithm>
#include <set>

#include "arisim/errors.hpp"

namespace arisim {

void TxConfig::validate() const {
    if (!(bs_power > 0.0) || !(ue_power > 0.0) || !(noise_variance > 0.0))
        throw config_error("powers and noise variance must be positive");
}

SensingLayout sensing_first_row_col(int n_hor, int n_ver) {
    if (n_hor < 1 || n_ver < 1)
        throw config_error("array dimensions must be >= 1");
    std::set<int> idx;
    for (int iv = 0; iv < n_ver; ++iv)
        idx.insert(iv); // first column: i_hor = 0
    for (int ih = 0; ih < n_hor; ++ih)
        idx.insert(ih * n_ver); // first row: i_ver = 0
    return {std::vector<int>(idx.begin(), idx.end()), n_hor, n_ver};
}

SensingLayout sensing_explicit(std::vector<int> indices, int n_hor, int n_ver) {
    const int n = n_hor * n_ver;
    std::set<int> seen;
    for (int i : indices) {
        if (i < 0 || i >= n)
            throw config_error("sensing index out of range");
        if (!seen.insert(i).second)
            throw config_error("duplicate sensing index");
    }
    return {std::move(indices), n_hor, n_ver};
}

VectorXcd effective_channel(const MatrixXcd& H_R, const PhaseShiftVector& v,
                            const VectorXcd& h_k) {
    if (H_R.rows() != v.size() || H_R.rows() != h_k.size())
        throw config_error("effective_channel: dimension mismatch");
    return H_R.adjoint() * v.v.cwiseProduct(h_k);
}

MatrixXcd effective_matrix(const MatrixXcd& H_R, const PhaseShiftVector& v,
                           std::span<const VectorXcd> h) {
    MatrixXcd H(H_R.cols(), static_cast<Eigen::Index>(h.size()));
    for (size_t k = 0; k < h.size(); ++k)
        H.col(static_cast<Eigen::Index>(k)) = effective_channel(H_R, v, h[k]);
    return H;
}

namespace {

Precoder normalized(MatrixXcd F) {
    const double norm = F.norm();
    if (!(norm > 0.0) || !std::isfinite(norm))
        throw numeric_error("precoder norm is zero or non-finite");
    return {F / norm};
}

} // namespace

Precoder mmse_precoder(const MatrixXcd& H, const TxConfig& tx) {
    const Eigen::Index k = H.cols();
    const double reg = static_cast<double>(k) * tx.noise_variance / tx.bs_power;
    MatrixXcd gram = H.adjoint() * H + reg * MatrixXcd::Identity(k, k);
    Eigen::LDLT<MatrixXcd> ldlt(gram);
    if (ldlt.info() != Eigen::Success)
        throw numeric_error("mmse_precoder: regularized Gram matrix not factorizable");
    MatrixXcd F = H * ldlt.solve(MatrixXcd::Identity(k, k));
    if (!F.allFinite()) {
        Eigen::JacobiSVD<MatrixXcd> svd(gram);
        throw numeric_error("mmse_precoder: singular system, condition number " +
                            std::to_string(svd.singularValues()(0) /
                                           svd.singularValues()(k - 1)));
    }
    return normalized(std::move(F));
}

Precoder zf_precoder(const MatrixXcd& H) {
    const Eigen::Index k = H.cols();
    MatrixXcd gram = H.adjoint() * H;
    Eigen::FullPivLU<MatrixXcd> lu(gram);
    if (!lu.isInvertible())
        throw numeric_error("zf_precoder: rank-deficient effective channel");
    MatrixXcd F = H * lu.inverse();
    return normalized(std::move(F));
}

Symbols draw_symbols(Rng& rng, int num_ues, const TxConfig& tx) {
    Symbols sym;
    sym.s = rng.cgaussian_vector(num_ues, tx.bs_power);
    sym.x = rng.cgaussian_vector(num_ues, tx.ue_power);
    return sym;
}

std::complex<double> dl_receive(const VectorXcd& h_eff, const Precoder& F, const VectorXcd& s,
                                double noise_variance, Rng& rng) {
    if (h_eff.size() != F.F.rows() || F.F.cols() != s.size())
        throw config_error("dl_receive: dimension mismatch");
    std::complex<double> r = (h_eff.adjoint() * F.F * s)(0);
    if (noise_variance > 0.0)
        r += rng.cgaussian(noise_variance);
    return r;
}

namespace {

VectorXcd select_rows(const VectorXcd& full, const SensingLayout& layout) {
    VectorXcd out(layout.count());
    for (int i = 0; i < layout.count(); ++i)
        out[i] = full[layout.indices[static_cast<size_t>(i)]];
    return out;
}

} // namespace

SenseResult ris_sense_bs(const MatrixXcd& H_R, const Precoder& F, const VectorXcd& s,
                         const SensingLayout& layout, double noise_variance, Rng& rng) {
    SenseResult res;
    res.full_noise_free = H_R * (F.F * s);
    res.partial = select_rows(res.full_noise_free, layout);
    if (noise_variance > 0.0)
        res.partial += rng.cgaussian_vector(layout.count(), noise_variance);
    return res;
}

SenseResult ris_sense_ue(const VectorXcd& h_k, std::complex<double> x_k,
                         const SensingLayout& layout, double noise_variance, Rng& rng) {
    SenseResult res;
    res.full_noise_free = h_k * x_k;
    res.partial = select_rows(res.full_noise_free, layout);
    if (noise_variance > 0.0)
        res.partial += rng.cgaussian_vector(layout.count(), noise_variance);
    return res;
}

} // namespace arisim
