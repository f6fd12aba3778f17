#pragma once

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "arisim/rng.hpp"

namespace arisim {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;

/// The N unit-modulus RIS reflection coefficients.
struct PhaseShiftVector {
    VectorXcd v;

    static PhaseShiftVector all_ones(int n) { return {VectorXcd::Ones(n)}; }
    Eigen::Index size() const { return v.size(); }

    /// max_i | |v_i| - 1 |
    double modulus_error() const {
        double worst = 0.0;
        for (Eigen::Index i = 0; i < v.size(); ++i)
            worst = std::max(worst, std::abs(std::abs(v[i]) - 1.0));
        return worst;
    }
};

/// Indices of the sensing (receive-capable) RIS elements, with the aperture
/// dimensions they index into. Element ordering follows the UPA Kronecker
/// structure: element (i_hor, i_ver) sits at index i_hor*n_ver + i_ver.
struct SensingLayout {
    std::vector<int> indices;
    int n_hor = 0;
    int n_ver = 0;

    int count() const { return static_cast<int>(indices.size()); }
    int aperture() const { return n_hor * n_ver; }
};

/// First row and column of the UPA (shared corner deduplicated, ascending
/// order), n_hor + n_ver - 1 elements.
SensingLayout sensing_first_row_col(int n_hor, int n_ver);

/// Caller-provided index list; throws config_error on duplicates or
/// out-of-range entries.
SensingLayout sensing_explicit(std::vector<int> indices, int n_hor, int n_ver);

/// Transmit powers and noise level, all linear Watts.
struct TxConfig {
    double bs_power = 1.0;        // P_BS
    double ue_power = 0.01;       // P_UE
    double noise_variance = 1e-13; // sigma_n^2

    void validate() const;
};

inline double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

/// BS precoding matrix, M x K, Frobenius norm 1.
struct Precoder {
    MatrixXcd F;
};

/// Effective uplink channel for one user: H_R^H diag(v) h_k, length M.
VectorXcd effective_channel(const MatrixXcd& H_R, const PhaseShiftVector& v, const VectorXcd& h_k);

/// Stacks the per-user effective channels into the M x K matrix H.
MatrixXcd effective_matrix(const MatrixXcd& H_R, const PhaseShiftVector& v,
                           std::span<const VectorXcd> h);

/// F = H (H^H H + (K sigma^2 / P_BS) I)^{-1}, rescaled to unit Frobenius norm.
Precoder mmse_precoder(const MatrixXcd& H, const TxConfig& tx);

/// F = H (H^H H)^{-1}, rescaled to unit Frobenius norm. Throws numeric_error
/// when the Gram matrix is (near-)singular.
Precoder zf_precoder(const MatrixXcd& H);

/// One downlink/uplink symbol exchange: s ~ CN(0, P_BS I_K), x_k ~ CN(0, P_UE).
struct Symbols {
    VectorXcd s; // DL, length K
    VectorXcd x; // UL, one entry per UE
};

Symbols draw_symbols(Rng& rng, int num_ues, const TxConfig& tx);

/// r_k = h_eff^H F s + n_k, n_k ~ CN(0, sigma^2).
std::complex<double> dl_receive(const VectorXcd& h_eff, const Precoder& F, const VectorXcd& s,
                                double noise_variance, Rng& rng);

/// What the sensing elements see plus the noise-free full-aperture signal
/// (the latter feeds the reference arms).
struct SenseResult {
    VectorXcd partial;          // |I_s| entries, noisy
    VectorXcd full_noise_free;  // N entries
};

/// y_R = H_R F s; partial = [y_R]_{I_s} + CN(0, sigma^2 I).
SenseResult ris_sense_bs(const MatrixXcd& H_R, const Precoder& F, const VectorXcd& s,
                         const SensingLayout& layout, double noise_variance, Rng& rng);

/// y_k = h_k x_k; partial = [y_k]_{I_s} + CN(0, sigma^2 I).
SenseResult ris_sense_ue(const VectorXcd& h_k, std::complex<double> x_k,
                         const SensingLayout& layout, double noise_variance, Rng& rng);

} // namespace arisim
