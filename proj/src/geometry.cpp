#include "arisim/geometry.hpp"

#include <cmath>

#include "arisim/errors.hpp"

namespace arisim {

namespace {

constexpr std::complex<double> kJ{0.0, 1.0};

// Arrival angles of a unit direction vector under the x-z plane / +y facing
// convention. Front-back aliasing maps u_y < 0 onto the front half-space,
// which leaves the steering phases (u_x, u_z) untouched.
void arrival_angles(const Vector3d& u, double& theta_hor, double& theta_ver) {
    theta_ver = std::acos(std::clamp(u.z(), -1.0, 1.0));
    theta_hor = std::atan2(std::abs(u.y()), u.x());
}

} // namespace

VectorXcd upa_response(double theta_hor, double theta_ver, int n_hor, int n_ver) {
    const double step_hor = M_PI * std::cos(theta_hor) * std::sin(theta_ver);
    const double step_ver = M_PI * std::cos(theta_ver);
    VectorXcd out(static_cast<Eigen::Index>(n_hor) * n_ver);
    for (int ih = 0; ih < n_hor; ++ih)
        for (int iv = 0; iv < n_ver; ++iv)
            out[static_cast<Eigen::Index>(ih) * n_ver + iv] =
                std::exp(kJ * (ih * step_hor + iv * step_ver));
    return out;
}

VectorXcd ula_response(double phi_ver, int m) { return upa_response(0.0, phi_ver, 1, m); }

void ScenarioGeometry::validate() const {
    if (bs_antennas < 1 || ris_n_hor < 1 || ris_n_ver < 1)
        throw config_error("array dimensions must be >= 1");
    if (!(carrier_frequency > 0.0))
        throw config_error("carrier_frequency must be positive");
    if (!(reference_power > 0.0))
        throw config_error("reference_power must be positive");
    auto finite3 = [](const Vector3d& p) { return p.allFinite(); };
    if (!finite3(bs_position) || !finite3(ris_position))
        throw config_error("BS/RIS positions must be finite");
    for (const auto& p : ue_positions)
        if (!finite3(p))
            throw config_error("UE positions must be finite");
    if (ue_velocities.size() != ue_positions.size())
        throw config_error("one velocity per UE required");
    if (ue_clusters.size() != ue_positions.size() ||
        ue_cluster_velocities.size() != ue_positions.size())
        throw config_error("per-UE cluster lists must match the UE count");
    if (bs_cluster_velocities.size() != bs_clusters.size())
        throw config_error("one velocity per BS cluster required");
}

PathSpec path_params(std::span<const Vector3d> waypoints, const ScenarioGeometry& geo) {
    if (waypoints.size() < 2)
        throw invalid_geometry("a path needs at least two waypoints");

    PathSpec spec;
    double product = 1.0;
    for (size_t i = 0; i + 1 < waypoints.size(); ++i) {
        const double d = (waypoints[i + 1] - waypoints[i]).norm();
        if (!(d > 0.0))
            throw invalid_geometry("zero-length path segment");
        spec.segment_lengths.push_back(d);
        product *= std::pow(d, geo.pathloss_exponent);
        spec.delay += d / geo.speed_of_light;
    }

    // arrival: direction from the RIS back toward the last waypoint before it
    const Vector3d& ris = waypoints.back();
    const Vector3d u_arr = (waypoints[waypoints.size() - 2] - ris).normalized();
    arrival_angles(u_arr, spec.azimuth_arrival, spec.zenith_arrival);

    // departure: first segment leaving the source (only used for BS paths)
    const Vector3d u_dep = (waypoints[1] - waypoints[0]).normalized();
    spec.zenith_departure = std::acos(std::clamp(u_dep.z(), -1.0, 1.0));

    spec.gain = std::sqrt(geo.reference_power) / product *
                std::exp(-kJ * (2.0 * M_PI * geo.carrier_frequency * spec.delay));
    return spec;
}

std::vector<PathSpec> ue_path_specs(const ScenarioGeometry& geo, int k) {
    if (k < 0 || k >= geo.num_ues())
        throw config_error("UE index out of range");
    std::vector<PathSpec> paths;
    const Vector3d& ue = geo.ue_positions[static_cast<size_t>(k)];
    paths.push_back(path_params(std::array{ue, geo.ris_position}, geo));
    for (const auto& c : geo.ue_clusters[static_cast<size_t>(k)])
        paths.push_back(path_params(std::array{ue, c, geo.ris_position}, geo));
    return paths;
}

std::vector<PathSpec> bs_path_specs(const ScenarioGeometry& geo) {
    std::vector<PathSpec> paths;
    paths.push_back(path_params(std::array{geo.bs_position, geo.ris_position}, geo));
    for (const auto& c : geo.bs_clusters)
        paths.push_back(path_params(std::array{geo.bs_position, c, geo.ris_position}, geo));
    return paths;
}

VectorXcd build_ue_channel(const ScenarioGeometry& geo, std::span<const PathSpec> paths) {
    VectorXcd h = VectorXcd::Zero(geo.ris_elements());
    for (const auto& p : paths)
        h += p.gain *
             upa_response(p.azimuth_arrival, p.zenith_arrival, geo.ris_n_hor, geo.ris_n_ver);
    return h;
}

VectorXcd build_ue_channel(const ScenarioGeometry& geo, int k) {
    const auto paths = ue_path_specs(geo, k);
    return build_ue_channel(geo, paths);
}

MatrixXcd build_bs_channel(const ScenarioGeometry& geo, std::span<const PathSpec> paths) {
    MatrixXcd H = MatrixXcd::Zero(geo.ris_elements(), geo.bs_antennas);
    for (const auto& p : paths) {
        const VectorXcd a_r =
            upa_response(p.azimuth_arrival, p.zenith_arrival, geo.ris_n_hor, geo.ris_n_ver);
        const VectorXcd a_b = ula_response(p.zenith_departure, geo.bs_antennas);
        H += p.gain * a_r * a_b.adjoint();
    }
    return H;
}

MatrixXcd build_bs_channel(const ScenarioGeometry& geo) {
    const auto paths = bs_path_specs(geo);
    return build_bs_channel(geo, paths);
}

ChannelSet build_channels(const ScenarioGeometry& geo) {
    ChannelSet out;
    out.bs_paths = bs_path_specs(geo);
    out.H_R = build_bs_channel(geo, out.bs_paths);
    for (int k = 0; k < geo.num_ues(); ++k) {
        out.ue_paths.push_back(ue_path_specs(geo, k));
        out.h.push_back(build_ue_channel(geo, out.ue_paths.back()));
    }
    return out;
}

ScenarioGeometry advance_mobility(const ScenarioGeometry& geo, double dt) {
    if (dt < 0.0)
        throw config_error("mobility time step must be >= 0");
    ScenarioGeometry out = geo;
    for (size_t k = 0; k < out.ue_positions.size(); ++k)
        out.ue_positions[k] += out.ue_velocities[k] * dt;
    for (size_t i = 0; i < out.bs_clusters.size(); ++i)
        out.bs_clusters[i] += out.bs_cluster_velocities[i] * dt;
    for (size_t k = 0; k < out.ue_clusters.size(); ++k)
        for (size_t i = 0; i < out.ue_clusters[k].size(); ++i)
            out.ue_clusters[k][i] += out.ue_cluster_velocities[k][i] * dt;
    return out;
}

ScenarioGeometry sample_scenario(const ScenarioGeometry& base, const PlacementParams& placement,
                                 Rng& rng) {
    ScenarioGeometry geo = base;
    geo.ue_positions.clear();
    geo.ue_velocities.clear();
    geo.bs_clusters.clear();
    geo.bs_cluster_velocities.clear();
    geo.ue_clusters.clear();
    geo.ue_cluster_velocities.clear();

    auto horizontal_velocity = [&rng, &placement]() {
        const double phi = rng.uniform(0.0, 2.0 * M_PI);
        return Vector3d{placement.speed * std::cos(phi), placement.speed * std::sin(phi), 0.0};
    };
    auto cluster_point = [&rng, &placement]() {
        return Vector3d{rng.uniform(-placement.cluster_region_x / 2, placement.cluster_region_x / 2),
                        rng.uniform(-placement.cluster_region_y / 2, placement.cluster_region_y / 2),
                        rng.uniform(0.0, placement.cluster_region_z)};
    };

    for (int k = 0; k < placement.num_ues; ++k) {
        geo.ue_positions.push_back(
            {rng.uniform(-placement.ue_area_x / 2, placement.ue_area_x / 2),
             rng.uniform(-placement.ue_area_y / 2, placement.ue_area_y / 2), placement.ue_height});
        geo.ue_velocities.push_back(horizontal_velocity());
    }
    for (int i = 0; i < placement.clusters_per_link; ++i) {
        geo.bs_clusters.push_back(cluster_point());
        geo.bs_cluster_velocities.push_back(horizontal_velocity());
    }
    for (int k = 0; k < placement.num_ues; ++k) {
        auto& pts = geo.ue_clusters.emplace_back();
        auto& vels = geo.ue_cluster_velocities.emplace_back();
        for (int i = 0; i < placement.clusters_per_link; ++i) {
            pts.push_back(cluster_point());
            vels.push_back(horizontal_velocity());
        }
    }
    geo.validate();
    return geo;
}

} // namespace arisim
