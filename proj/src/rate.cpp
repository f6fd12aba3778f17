#include "arisim/rate.hpp"

#include <cmath>

#include "arisim/errors.hpp"

namespace arisim {

double true_sum_rate(const MatrixXcd& H, const Precoder& F, const TxConfig& tx,
                     std::vector<double>* per_user) {
    if (H.rows() != F.F.rows() || H.cols() != F.F.cols())
        throw config_error("true_sum_rate: dimension mismatch");
    const Eigen::Index k_count = H.cols();
    const MatrixXcd gains = H.adjoint() * F.F; // (k, k') -> h_k^H f_k'
    double total = 0.0;
    if (per_user)
        per_user->clear();
    for (Eigen::Index k = 0; k < k_count; ++k) {
        double interference = 0.0;
        for (Eigen::Index j = 0; j < k_count; ++j)
            if (j != k)
                interference += tx.bs_power * std::norm(gains(k, j));
        const double sinr = tx.bs_power * std::norm(gains(k, k)) /
                            (interference + tx.noise_variance);
        const double rate = std::log2(1.0 + sinr);
        total += rate;
        if (per_user)
            per_user->push_back(rate);
    }
    return total;
}

std::complex<double> combined_observation(const VectorXcd& y_r, const PhaseShiftVector& v,
                                          const VectorXcd& y_k) {
    if (y_r.size() != v.size() || y_k.size() != v.size())
        throw config_error("combined_observation: dimension mismatch");
    std::complex<double> z = 0.0;
    for (Eigen::Index i = 0; i < y_r.size(); ++i)
        z += std::conj(y_r[i]) * v.v[i] * y_k[i];
    return z;
}

double z_power(std::span<const std::complex<double>> samples) {
    if (samples.empty())
        throw config_error("z_power: empty sample window");
    double acc = 0.0;
    for (const auto& z : samples)
        acc += std::norm(z);
    return acc / static_cast<double>(samples.size());
}

double estimated_sum_rate(std::span<const double> z_powers, const TxConfig& tx,
                          std::vector<double>* per_user) {
    double total = 0.0;
    if (per_user)
        per_user->clear();
    for (double zp : z_powers) {
        if (zp < 0.0)
            throw config_error("estimated_sum_rate: negative z power");
        const double rate = std::log2(1.0 + (zp / tx.ue_power) / tx.noise_variance);
        total += rate;
        if (per_user)
            per_user->push_back(rate);
    }
    return total;
}

} // namespace arisim
