#pragma once

#include <complex>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "arisim/phy.hpp"

namespace arisim {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

/// Steering dictionary over a uniform (theta_hor, theta_ver) grid on [0, pi)^2.
/// Column g holds the sensing-element restriction of the unit-modulus steering
/// vector for grid pair g = ih * num_ver + iv; the full-aperture atoms are kept
/// alongside for reconstruction.
struct AngleGrid {
    VectorXd hor; // grid points, radians
    VectorXd ver;
    MatrixXcd partial_atoms; // |I_s| x G
    MatrixXcd full_atoms;    // N x G
    SensingLayout layout;

    Eigen::Index size() const { return partial_atoms.cols(); }
    std::pair<double, double> angles(Eigen::Index atom) const {
        return {hor[atom / ver.size()], ver[atom % ver.size()]};
    }
};

AngleGrid make_angle_grid(int num_hor, int num_ver, const SensingLayout& layout);

/// R = (1/T) sum_t y_t y_t^H over the sensing elements. Throws config_error
/// on an empty window.
MatrixXcd sample_autocorrelation(std::span<const VectorXcd> snapshots);

struct OmpResult {
    std::vector<std::pair<double, double>> angles; // (theta_hor, theta_ver), selection order
    std::vector<Eigen::Index> atoms;               // grid columns, selection order
    bool zero_energy = false;
};

/// Greedy angle extraction from the autocorrelation matrix: L iterations, each
/// selecting the grid atom maximizing a^H R~ a / ||a||^2 where R~ = P R P and
/// P projects onto the orthogonal complement of the atoms chosen so far.
OmpResult omp_angles(const MatrixXcd& R, const AngleGrid& grid, int num_paths);

/// Per-snapshot matched-filter gain: beta = a(theta)_{I_s}^H y / |I_s|.
std::complex<double> estimate_beta(const VectorXcd& partial_snapshot, double theta_hor,
                                   double theta_ver, const SensingLayout& layout);

/// Full-aperture reconstruction sum_l beta_l a_R(theta_l).
VectorXcd reconstruct(std::span<const std::pair<double, double>> angles,
                      std::span<const std::complex<double>> betas, int n_hor, int n_ver);

/// Window-level recovery result for one source.
struct RecoveredObservation {
    OmpResult omp;
    MatrixXcd y_hat;          // N x T, one reconstructed signal per snapshot
    MatrixXcd betas;          // L x T
    VectorXd residual_energy; // ||[y_hat]_{I_s} - y||^2 per snapshot
};

struct RecoveryOptions {
    /// Matched-filter gains by default; when set, the per-snapshot gains are
    /// refit jointly by least squares across the selected atoms (unbiased
    /// under correlated atoms).
    bool joint_refit = false;
};

/// Runs autocorrelation + OMP once over the window, then per-snapshot gain
/// estimation and reconstruction. Angle estimates are shared by all snapshots.
RecoveredObservation recover_source(std::span<const VectorXcd> snapshots, const AngleGrid& grid,
                                    int num_paths, const RecoveryOptions& opts = {});

/// BS and per-UE sources processed independently over a common window.
struct RecoveredScene {
    RecoveredObservation bs;
    std::vector<RecoveredObservation> ue;
};

RecoveredScene recover_all(std::span<const VectorXcd> bs_snapshots,
                           std::span<const std::vector<VectorXcd>> ue_snapshots,
                           const AngleGrid& grid, int bs_paths, int ue_paths,
                           const RecoveryOptions& opts = {});

} // namespace arisim
