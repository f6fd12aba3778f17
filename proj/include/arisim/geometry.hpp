#pragma once

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "arisim/rng.hpp"

namespace arisim {

using Eigen::MatrixXcd;
using Eigen::Vector3d;
using Eigen::VectorXcd;

/// Uniform planar array response. The horizontal factor (phase step
/// pi*cos(theta_hor)*sin(theta_ver), n_hor entries) is the left Kronecker
/// operand, the vertical factor (phase step pi*cos(theta_ver), n_ver entries)
/// the right one, so element (i_hor, i_ver) lives at index i_hor*n_ver + i_ver.
VectorXcd upa_response(double theta_hor, double theta_ver, int n_hor, int n_ver);

/// Uniform linear array response: the UPA with n_hor = 1, parameterized by a
/// zenith angle only.
VectorXcd ula_response(double phi_ver, int m);

/// One propagation path described by its waypoint geometry.
///
/// Angle convention (the array lies in the x-z plane facing +y): theta_ver is
/// the polar angle from the z-axis and theta_hor the azimuth from the x-axis,
/// so the arrival unit vector is
///   u = (sin theta_ver cos theta_hor, sin theta_ver sin theta_hor, cos theta_ver)
/// and the UPA phase terms cos(theta_hor)sin(theta_ver) and cos(theta_ver)
/// are exactly u_x and u_z. Directions with u_y < 0 alias onto the front
/// half-space (a planar array cannot tell front from back).
struct PathSpec {
    std::vector<double> segment_lengths; // meters, source -> ... -> array
    double delay = 0.0;                  // seconds, sum(d)/c
    double zenith_arrival = 0.0;         // theta_ver
    double azimuth_arrival = 0.0;        // theta_hor
    double zenith_departure = 0.0;       // phi_ver, meaningful for BS-side paths
    std::complex<double> gain;           // sqrt(P0)/prod(d^alpha) * exp(-j 2 pi f_c tau)
};

/// Scene state: node positions, scatter points grouped per link, velocities,
/// array dimensions and RF constants.
struct ScenarioGeometry {
    Vector3d bs_position = {0.0, 0.0, 35.0};
    Vector3d ris_position = {-50.0, 0.0, 10.0};
    std::vector<Vector3d> ue_positions;
    std::vector<Vector3d> ue_velocities;
    std::vector<Vector3d> bs_clusters; // scatter points on the BS-RIS link
    std::vector<Vector3d> bs_cluster_velocities;
    std::vector<std::vector<Vector3d>> ue_clusters; // per UE link
    std::vector<std::vector<Vector3d>> ue_cluster_velocities;

    int bs_antennas = 4;
    int ris_n_hor = 4;
    int ris_n_ver = 8;
    double carrier_frequency = 2.4e9; // Hz
    double pathloss_exponent = 1.0;
    double reference_power = 1e-4; // P0, linear
    double speed_of_light = 299792458.0;

    int num_ues() const { return static_cast<int>(ue_positions.size()); }
    int ris_elements() const { return ris_n_hor * ris_n_ver; }

    /// Throws config_error on dimension/constant violations.
    void validate() const;
};

/// Geometric path extraction: segment lengths, delay, the arrival angles of
/// the final segment into the RIS and the departure angle of the first
/// segment. The last waypoint must be the RIS position. Throws
/// invalid_geometry on a zero-length segment.
PathSpec path_params(std::span<const Vector3d> waypoints, const ScenarioGeometry& geo);

/// Per-link path lists: one line-of-sight path plus one two-segment path per
/// cluster point.
std::vector<PathSpec> ue_path_specs(const ScenarioGeometry& geo, int k);
std::vector<PathSpec> bs_path_specs(const ScenarioGeometry& geo);

/// h_k = sum_l gain_l * a_R(theta_hor, theta_ver), length N.
VectorXcd build_ue_channel(const ScenarioGeometry& geo, int k);
VectorXcd build_ue_channel(const ScenarioGeometry& geo, std::span<const PathSpec> paths);

/// H_R = sum_l gain_l * a_R * a_B^H, N x M.
MatrixXcd build_bs_channel(const ScenarioGeometry& geo);
MatrixXcd build_bs_channel(const ScenarioGeometry& geo, std::span<const PathSpec> paths);

/// All channels of the scene plus the path parameters they were built from;
/// rebuilding from the stored paths reproduces the channels bit for bit.
struct ChannelSet {
    std::vector<VectorXcd> h; // per UE, length N
    MatrixXcd H_R;            // N x M
    std::vector<std::vector<PathSpec>> ue_paths;
    std::vector<PathSpec> bs_paths;
};

ChannelSet build_channels(const ScenarioGeometry& geo);

/// Translates UEs and cluster points by velocity*dt. BS and RIS stay put.
ScenarioGeometry advance_mobility(const ScenarioGeometry& geo, double dt);

/// Random scene placement (UE area and cluster region sizes in meters).
struct PlacementParams {
    int num_ues = 2;
    int clusters_per_link = 3;
    double ue_area_x = 100.0; // centered at the origin
    double ue_area_y = 50.0;
    double ue_height = 1.0;
    double cluster_region_x = 200.0; // centered at the origin horizontally,
    double cluster_region_y = 100.0; // z in [0, cluster_region_z]
    double cluster_region_z = 50.0;
    double speed = 1.0; // m/s, shared by UEs and clusters
};

/// Draws UE positions, cluster points and velocity directions (uniform in the
/// horizontal plane) from `rng`. Array dims / RF constants are taken from
/// `base` and copied through.
ScenarioGeometry sample_scenario(const ScenarioGeometry& base, const PlacementParams& placement,
                                 Rng& rng);

} // namespace arisim
