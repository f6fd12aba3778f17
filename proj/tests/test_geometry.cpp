#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "arisim/errors.hpp"
#include "arisim/geometry.hpp"

using namespace arisim;

namespace {

// geometry with a single UE on a pure line-of-sight link, no clusters
ScenarioGeometry los_only(const Vector3d& ue_pos) {
    ScenarioGeometry geo;
    geo.ue_positions = {ue_pos};
    geo.ue_velocities = {Vector3d::Zero()};
    geo.ue_clusters = {{}};
    geo.ue_cluster_velocities = {{}};
    return geo;
}

constexpr std::complex<double> kJ{0.0, 1.0};

} // namespace

TEST_CASE("upa response at broadside is all ones") {
    const VectorXcd a = upa_response(M_PI / 2, M_PI / 2, 4, 8);
    REQUIRE(a.size() == 32);
    for (Eigen::Index i = 0; i < a.size(); ++i)
        CHECK(std::abs(a[i] - 1.0) <= 1e-12);
}

TEST_CASE("upa response entries are unit modulus") {
    Rng rng(42);
    for (int trial = 0; trial < 200; ++trial) {
        const VectorXcd a =
            upa_response(rng.uniform(0.0, M_PI), rng.uniform(0.0, M_PI), 4, 8);
        for (Eigen::Index i = 0; i < a.size(); ++i)
            CHECK(std::abs(std::abs(a[i]) - 1.0) <= 1e-12);
    }
}

TEST_CASE("upa response equals the elementwise Kronecker construction") {
    // independent oracle: explicit double loop over both factors
    Rng rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        const double th = rng.uniform(0.0, M_PI);
        const double tv = rng.uniform(0.0, M_PI);
        const VectorXcd a = upa_response(th, tv, 4, 8);
        for (int ih = 0; ih < 4; ++ih) {
            const std::complex<double> hor =
                std::exp(kJ * (M_PI * ih * std::cos(th) * std::sin(tv)));
            for (int iv = 0; iv < 8; ++iv) {
                const std::complex<double> ver = std::exp(kJ * (M_PI * iv * std::cos(tv)));
                CHECK(std::abs(a[ih * 8 + iv] - hor * ver) <= 1e-12);
            }
        }
    }
}

TEST_CASE("ula response special cases") {
    const VectorXcd broadside = ula_response(M_PI / 2, 4);
    for (Eigen::Index i = 0; i < 4; ++i)
        CHECK(std::abs(broadside[i] - 1.0) <= 1e-12);

    CHECK(ula_response(1.234, 1).size() == 1);
    CHECK(std::abs(ula_response(1.234, 1)[0] - 1.0) <= 1e-15);

    const double phi = 0.789;
    const VectorXcd u = ula_response(phi, 8);
    const VectorXcd ref = upa_response(0.0, phi, 1, 8);
    for (Eigen::Index i = 0; i < 8; ++i)
        CHECK(u[i] == ref[i]);
}

TEST_CASE("path_params line of sight") {
    ScenarioGeometry geo = los_only({0.0, 0.0, 1.0});
    const Vector3d src{-50.0, 0.0, 10.0 + 30.0}; // 30 m above the RIS
    const PathSpec p = path_params(std::array{src, geo.ris_position}, geo);
    REQUIRE(p.segment_lengths.size() == 1);
    CHECK(p.segment_lengths[0] == doctest::Approx(30.0));
    CHECK(p.delay == doctest::Approx(30.0 / geo.speed_of_light));
}

TEST_CASE("path_params two-segment product distance") {
    ScenarioGeometry geo = los_only({0.0, 0.0, 1.0});
    geo.reference_power = 2500.0;
    const Vector3d bs = geo.bs_position;
    const Vector3d cluster = bs + Vector3d{40.0, 0.0, 0.0};
    const Vector3d ris = cluster + Vector3d{0.0, 30.0, 0.0};
    ScenarioGeometry g2 = geo;
    g2.ris_position = ris;
    const PathSpec p = path_params(std::array{bs, cluster, ris}, g2);
    CHECK(p.delay == doctest::Approx(70.0 / g2.speed_of_light));
    CHECK(std::abs(p.gain) == doctest::Approx(std::sqrt(2500.0) / (40.0 * 30.0)));
}

TEST_CASE("arrival angles follow the spherical convention") {
    // oracle: u = (sin tv cos th, sin tv sin th, cos tv) must reproduce the
    // direction from the RIS toward the source of the final segment
    ScenarioGeometry geo = los_only({0.0, 0.0, 1.0});

    SUBCASE("broadside") {
        const Vector3d src = geo.ris_position + Vector3d{0.0, 1.0, 0.0};
        const PathSpec p = path_params(std::array{src, geo.ris_position}, geo);
        CHECK(p.azimuth_arrival == doctest::Approx(M_PI / 2));
        CHECK(p.zenith_arrival == doctest::Approx(M_PI / 2));
    }

    SUBCASE("random directions round trip") {
        Rng rng(3);
        for (int trial = 0; trial < 100; ++trial) {
            Vector3d dir{rng.gaussian(), std::abs(rng.gaussian()), rng.gaussian()};
            dir.normalize();
            const Vector3d src = geo.ris_position + 25.0 * dir;
            const PathSpec p = path_params(std::array{src, geo.ris_position}, geo);
            const Vector3d u{std::sin(p.zenith_arrival) * std::cos(p.azimuth_arrival),
                             std::sin(p.zenith_arrival) * std::sin(p.azimuth_arrival),
                             std::cos(p.zenith_arrival)};
            CHECK((u - dir).norm() <= 1e-10);
        }
    }
}

TEST_CASE("zero-length segment is rejected") {
    ScenarioGeometry geo = los_only({0.0, 0.0, 1.0});
    const Vector3d p = geo.ris_position;
    CHECK_THROWS_AS(path_params(std::array{p, p}, geo), invalid_geometry);
}

TEST_CASE("single-path UE channel norm and first element") {
    ScenarioGeometry geo = los_only({0.0, 0.0, 1.0});
    const double d = (geo.ue_positions[0] - geo.ris_position).norm();
    const double amp = std::sqrt(geo.reference_power) / std::pow(d, geo.pathloss_exponent);
    const VectorXcd h = build_ue_channel(geo, 0);

    CHECK(h.norm() == doctest::Approx(std::sqrt(32.0) * amp));
    const std::complex<double> expect =
        amp * std::exp(-kJ * (2.0 * M_PI * geo.carrier_frequency * d / geo.speed_of_light));
    CHECK(std::abs(h[0] - expect) <= 1e-12 * amp);
}

TEST_CASE("multipath channels superpose") {
    ScenarioGeometry geo = los_only({10.0, 5.0, 1.0});
    geo.ue_clusters[0] = {Vector3d{-20.0, 30.0, 12.0}, Vector3d{15.0, -10.0, 4.0}};
    geo.ue_cluster_velocities[0] = {Vector3d::Zero(), Vector3d::Zero()};
    const VectorXcd h = build_ue_channel(geo, 0);

    // oracle: single-path channels built independently, then summed
    const auto paths = ue_path_specs(geo, 0);
    REQUIRE(paths.size() == 3);
    VectorXcd sum = VectorXcd::Zero(32);
    for (const auto& p : paths)
        sum += build_ue_channel(geo, std::span{&p, 1});
    CHECK((h - sum).norm() <= 1e-12 * h.norm());
}

TEST_CASE("single-path BS channel is rank one with the expected norm") {
    ScenarioGeometry geo = los_only({0.0, 0.0, 1.0});
    const MatrixXcd H = build_bs_channel(geo);
    const double d = (geo.bs_position - geo.ris_position).norm();
    const double amp = std::sqrt(geo.reference_power) / std::pow(d, geo.pathloss_exponent);

    CHECK(H.norm() == doctest::Approx(std::sqrt(32.0 * 4.0) * amp));
    Eigen::JacobiSVD<MatrixXcd> svd(H);
    for (Eigen::Index i = 1; i < svd.singularValues().size(); ++i)
        CHECK(svd.singularValues()[i] <= 1e-10 * svd.singularValues()[0]);
}

TEST_CASE("BS channel equals the sum of per-path outer products") {
    ScenarioGeometry geo = los_only({0.0, 0.0, 1.0});
    geo.bs_clusters = {Vector3d{30.0, 20.0, 18.0}, Vector3d{-70.0, -10.0, 40.0}};
    geo.bs_cluster_velocities = {Vector3d::Zero(), Vector3d::Zero()};
    const MatrixXcd H = build_bs_channel(geo);

    const auto paths = bs_path_specs(geo);
    REQUIRE(paths.size() == 3);
    MatrixXcd sum = MatrixXcd::Zero(32, 4);
    for (const auto& p : paths) {
        const VectorXcd a_r = upa_response(p.azimuth_arrival, p.zenith_arrival, 4, 8);
        const VectorXcd a_b = ula_response(p.zenith_departure, 4);
        sum += p.gain * a_r * a_b.adjoint();
    }
    CHECK((H - sum).norm() <= 1e-12 * H.norm());
}

TEST_CASE("channel rebuild from stored paths is bit exact") {
    Rng rng(11);
    ScenarioGeometry base;
    PlacementParams placement;
    const ScenarioGeometry geo = sample_scenario(base, placement, rng);
    const ChannelSet ch = build_channels(geo);
    for (int k = 0; k < geo.num_ues(); ++k) {
        const VectorXcd again = build_ue_channel(geo, ch.ue_paths[static_cast<size_t>(k)]);
        CHECK(again == ch.h[static_cast<size_t>(k)]);
    }
    CHECK(build_bs_channel(geo, ch.bs_paths) == ch.H_R);
}

TEST_CASE("channel norm scales as the product distance to the -alpha") {
    ScenarioGeometry geo = los_only({0.0, 0.0, 1.0});
    geo.pathloss_exponent = 1.7;
    auto norm_at = [&geo](double d) {
        ScenarioGeometry g = geo;
        g.ue_positions[0] = g.ris_position + Vector3d{0.0, d, 0.0};
        return build_ue_channel(g, 0).norm();
    };
    const double slope = (std::log(norm_at(200.0)) - std::log(norm_at(2.0))) /
                         (std::log(200.0) - std::log(2.0));
    CHECK(std::abs(slope - (-geo.pathloss_exponent)) <= 1e-6);
}

TEST_CASE("mobility") {
    Rng rng(5);
    ScenarioGeometry base;
    PlacementParams placement;
    placement.speed = 5.0;
    const ScenarioGeometry geo = sample_scenario(base, placement, rng);

    SUBCASE("dt = 0 leaves the scene unchanged") {
        const ScenarioGeometry same = advance_mobility(geo, 0.0);
        CHECK(same.ue_positions[0] == geo.ue_positions[0]);
        CHECK(same.bs_clusters[0] == geo.bs_clusters[0]);
    }

    SUBCASE("displacement magnitude equals speed * dt") {
        const ScenarioGeometry moved = advance_mobility(geo, 0.01);
        CHECK((moved.ue_positions[0] - geo.ue_positions[0]).norm() ==
              doctest::Approx(0.05).epsilon(1e-12));
    }

    SUBCASE("two half steps compose into one full step") {
        const ScenarioGeometry twice = advance_mobility(advance_mobility(geo, 0.01), 0.01);
        const ScenarioGeometry once = advance_mobility(geo, 0.02);
        CHECK((twice.ue_positions[0] - once.ue_positions[0]).norm() <= 1e-12);
        CHECK((twice.ue_clusters[1][2] - once.ue_clusters[1][2]).norm() <= 1e-12);
    }

    SUBCASE("speed is preserved across steps") {
        const ScenarioGeometry moved = advance_mobility(geo, 0.5);
        for (size_t k = 0; k < moved.ue_velocities.size(); ++k)
            CHECK(moved.ue_velocities[k].norm() == doctest::Approx(5.0));
    }

    SUBCASE("BS and RIS are stationary") {
        const ScenarioGeometry moved = advance_mobility(geo, 3.0);
        CHECK(moved.bs_position == geo.bs_position);
        CHECK(moved.ris_position == geo.ris_position);
    }
}

TEST_CASE("sampled scenarios stay inside the configured regions") {
    Rng rng(13);
    ScenarioGeometry base;
    PlacementParams placement;
    for (int trial = 0; trial < 20; ++trial) {
        const ScenarioGeometry geo = sample_scenario(base, placement, rng);
        REQUIRE(geo.num_ues() == 2);
        for (const auto& p : geo.ue_positions) {
            CHECK(std::abs(p.x()) <= 50.0);
            CHECK(std::abs(p.y()) <= 25.0);
            CHECK(p.z() == 1.0);
        }
        for (const auto& cl : geo.bs_clusters) {
            CHECK(std::abs(cl.x()) <= 100.0);
            CHECK(std::abs(cl.y()) <= 50.0);
            CHECK(cl.z() >= 0.0);
            CHECK(cl.z() <= 50.0);
        }
    }
}
