#pragma once

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "arisim/phy.hpp"

namespace arisim {

/// Per-user and total rates for one simulation step.
struct RateReport {
    double true_rate = 0.0;      // bits/s/Hz
    double estimated_rate = 0.0; // bits/s/Hz
    std::vector<double> true_per_user;
    std::vector<double> estimated_per_user;
    std::vector<double> z_power_per_user;
};

/// Ground-truth downlink sum-rate
///   sum_k log2(1 + P_BS |h_k^H f_k|^2 / (sum_{k'!=k} P_BS |h_k^H f_k'|^2 + sigma^2)).
double true_sum_rate(const MatrixXcd& H, const Precoder& F, const TxConfig& tx,
                     std::vector<double>* per_user = nullptr);

/// z_k = y_R^H diag(v) y_k, the scalar observation combined at the RIS.
std::complex<double> combined_observation(const VectorXcd& y_r, const PhaseShiftVector& v,
                                          const VectorXcd& y_k);

/// Sample mean of |z_k|^2 over a window. Throws config_error when empty.
double z_power(std::span<const std::complex<double>> samples);

/// Observation-only sum-rate estimate
///   sum_k log2(1 + (E[|z_k|^2]/P_UE) / sigma^2).
/// The N sigma^4 / P_UE noise-power term stays inside the numerator, so the
/// estimate is biased upward at low SNR; that is the estimator's definition,
/// not an artifact.
double estimated_sum_rate(std::span<const double> z_powers, const TxConfig& tx,
                          std::vector<double>* per_user = nullptr);

} // namespace arisim
