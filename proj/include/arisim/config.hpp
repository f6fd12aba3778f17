#pragma once

#include <string>
#include <vector>

#include "arisim/agent.hpp"
#include "arisim/geometry.hpp"
#include "arisim/neuralnet.hpp"
#include "arisim/phy.hpp"

namespace arisim {

/// Flat key-value experiment configuration. One `key = value` per line in the
/// file form, `#` starts a comment; every key is listed in the README with
/// units and defaults.
struct ExperimentConfig {
    // run
    std::string arm = "aris"; // aris | aris_ref1 | aris_ref2 | random
    uint64_t seed = 1;
    int steps = 500;
    int snapshot_window = 32; // UL/DL exchanges per step
    double step_period = 0.01; // s
    double mobility_speed = 1.0; // m/s, UEs and clusters
    std::string output = "run.csv";

    // geometry
    Eigen::Vector3d bs_position{0.0, 0.0, 35.0};
    Eigen::Vector3d ris_position{-50.0, 0.0, 10.0};
    int num_ues = 2;
    int bs_antennas = 4;
    int ris_n_hor = 4;
    int ris_n_ver = 8;
    double carrier_frequency = 2.4e9; // Hz
    double pathloss_exponent = 1.0;
    double reference_power = 1e-4; // P0; free-space-like power loss at 50 m
    int num_clusters = 3;          // per link, one scatter point each
    double ue_area_x = 100.0;      // m, centered at the origin
    double ue_area_y = 50.0;
    double ue_height = 1.0;
    double cluster_region_x = 200.0; // m, centered horizontally, z in [0, z-size]
    double cluster_region_y = 100.0;
    double cluster_region_z = 50.0;

    // transmit chain
    double bs_power_dbm = 30.0;
    double ue_power_dbm = 10.0;
    double noise_power_dbm = -101.0; // thermal floor over 20 MHz
    std::string sensing_layout = "first_row_col"; // or "explicit"
    std::vector<int> sensing_indices;             // used by the explicit layout, 0-based

    // recovery
    int grid_hor = 64;
    int grid_ver = 64;
    bool beta_refit = false;

    // agent + network
    double gamma = 0.9;
    double epsilon_init = 1.0;
    double epsilon_decay = 0.99;
    double epsilon_floor = 0.05;
    int replay_capacity = 2048;
    int batch_size = 64;
    int train_period = 32;
    int train_passes = 2;
    double learning_rate = 1e-3;
    int hidden1 = 128;
    int hidden2 = 64;
    int head_hidden = 128;
    double leaky_slope = 0.01;
    double dropout_rate = 0.2;
    bool recompute_q_at_train = false;
    std::string params_out; // optional checkpoint path written after the run

    static ExperimentConfig from_file(const std::string& path);

    /// Throws config_error on unknown keys or unparsable values.
    void set(const std::string& key, const std::string& value);
    std::string get(const std::string& key) const;
    static std::vector<std::string> keys();

    void validate() const;

    // derived pieces
    TxConfig tx() const;
    ScenarioGeometry base_geometry() const;
    PlacementParams placement() const;
    SensingLayout make_layout() const;
    AgentConfig agent() const;
    nn::NetworkSpec network_spec() const;
    int ris_elements() const { return ris_n_hor * ris_n_ver; }
};

} // namespace arisim
