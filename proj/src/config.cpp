#include "arisim/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "arisim/errors.hpp"

namespace arisim {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos)
        return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        size_t used = 0;
        const double x = std::stod(value, &used);
        if (trim(value.substr(used)).empty())
            return x;
    } catch (const std::exception&) {
    }
    throw config_error(key + ": expected a number, got '" + value + "'");
}

long long parse_int(const std::string& key, const std::string& value) {
    try {
        size_t used = 0;
        const long long x = std::stoll(value, &used);
        if (trim(value.substr(used)).empty())
            return x;
    } catch (const std::exception&) {
    }
    throw config_error(key + ": expected an integer, got '" + value + "'");
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "1" || value == "true" || value == "on")
        return true;
    if (value == "0" || value == "false" || value == "off")
        return false;
    throw config_error(key + ": expected a boolean (0/1), got '" + value + "'");
}

Eigen::Vector3d parse_vec3(const std::string& key, const std::string& value) {
    std::istringstream is(value);
    Eigen::Vector3d v;
    if (!(is >> v.x() >> v.y() >> v.z()))
        throw config_error(key + ": expected three numbers, got '" + value + "'");
    std::string rest;
    if (is >> rest)
        throw config_error(key + ": trailing content in '" + value + "'");
    return v;
}

std::vector<int> parse_int_list(const std::string& key, const std::string& value) {
    std::istringstream is(value);
    std::vector<int> out;
    int x;
    while (is >> x)
        out.push_back(x);
    if (!is.eof())
        throw config_error(key + ": expected a list of integers, got '" + value + "'");
    return out;
}

std::string fmt_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string fmt_vec3(const Eigen::Vector3d& v) {
    return fmt_double(v.x()) + " " + fmt_double(v.y()) + " " + fmt_double(v.z());
}

std::string fmt_int_list(const std::vector<int>& v) {
    std::string out;
    for (size_t i = 0; i < v.size(); ++i) {
        if (i)
            out += " ";
        out += std::to_string(v[i]);
    }
    return out;
}

struct Binding {
    const char* name;
    std::function<std::string(const ExperimentConfig&)> get;
    std::function<void(ExperimentConfig&, const std::string&)> set;
};

#define BIND_STRING(field)                                                                        \
    {#field, [](const ExperimentConfig& c) { return c.field; },                                   \
     [](ExperimentConfig& c, const std::string& v) { c.field = v; }}
#define BIND_DOUBLE(field)                                                                        \
    {#field, [](const ExperimentConfig& c) { return fmt_double(c.field); },                       \
     [](ExperimentConfig& c, const std::string& v) { c.field = parse_double(#field, v); }}
#define BIND_INT(field)                                                                           \
    {#field, [](const ExperimentConfig& c) { return std::to_string(c.field); },                   \
     [](ExperimentConfig& c, const std::string& v) {                                              \
         c.field = static_cast<int>(parse_int(#field, v));                                        \
     }}
#define BIND_U64(field)                                                                           \
    {#field, [](const ExperimentConfig& c) { return std::to_string(c.field); },                   \
     [](ExperimentConfig& c, const std::string& v) {                                              \
         c.field = static_cast<uint64_t>(parse_int(#field, v));                                   \
     }}
#define BIND_BOOL(field)                                                                          \
    {#field, [](const ExperimentConfig& c) { return std::string(c.field ? "1" : "0"); },          \
     [](ExperimentConfig& c, const std::string& v) { c.field = parse_bool(#field, v); }}
#define BIND_VEC3(field)                                                                          \
    {#field, [](const ExperimentConfig& c) { return fmt_vec3(c.field); },                         \
     [](ExperimentConfig& c, const std::string& v) { c.field = parse_vec3(#field, v); }}

const std::vector<Binding>& bindings() {
    static const std::vector<Binding> table = {
        BIND_STRING(arm),
        BIND_U64(seed),
        BIND_INT(steps),
        BIND_INT(snapshot_window),
        BIND_DOUBLE(step_period),
        BIND_DOUBLE(mobility_speed),
        BIND_STRING(output),
        BIND_VEC3(bs_position),
        BIND_VEC3(ris_position),
        BIND_INT(num_ues),
        BIND_INT(bs_antennas),
        BIND_INT(ris_n_hor),
        BIND_INT(ris_n_ver),
        BIND_DOUBLE(carrier_frequency),
        BIND_DOUBLE(pathloss_exponent),
        BIND_DOUBLE(reference_power),
        BIND_INT(num_clusters),
        BIND_DOUBLE(ue_area_x),
        BIND_DOUBLE(ue_area_y),
        BIND_DOUBLE(ue_height),
        BIND_DOUBLE(cluster_region_x),
        BIND_DOUBLE(cluster_region_y),
        BIND_DOUBLE(cluster_region_z),
        BIND_DOUBLE(bs_power_dbm),
        BIND_DOUBLE(ue_power_dbm),
        BIND_DOUBLE(noise_power_dbm),
        BIND_STRING(sensing_layout),
        {"sensing_indices",
         [](const ExperimentConfig& c) { return fmt_int_list(c.sensing_indices); },
         [](ExperimentConfig& c, const std::string& v) {
             c.sensing_indices = parse_int_list("sensing_indices", v);
         }},
        BIND_INT(grid_hor),
        BIND_INT(grid_ver),
        BIND_BOOL(beta_refit),
        BIND_DOUBLE(gamma),
        BIND_DOUBLE(epsilon_init),
        BIND_DOUBLE(epsilon_decay),
        BIND_DOUBLE(epsilon_floor),
        BIND_INT(replay_capacity),
        BIND_INT(batch_size),
        BIND_INT(train_period),
        BIND_INT(train_passes),
        BIND_DOUBLE(learning_rate),
        BIND_INT(hidden1),
        BIND_INT(hidden2),
        BIND_INT(head_hidden),
        BIND_DOUBLE(leaky_slope),
        BIND_DOUBLE(dropout_rate),
        BIND_BOOL(recompute_q_at_train),
        BIND_STRING(params_out),
    };
    return table;
}

#undef BIND_STRING
#undef BIND_DOUBLE
#undef BIND_INT
#undef BIND_U64
#undef BIND_BOOL
#undef BIND_VEC3

} // namespace

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw config_error("cannot open config file: " + path);
    ExperimentConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw config_error(path + ":" + std::to_string(lineno) + ": expected key = value");
        cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return cfg;
}

void ExperimentConfig::set(const std::string& key, const std::string& value) {
    for (const auto& b : bindings()) {
        if (key == b.name) {
            b.set(*this, value);
            return;
        }
    }
    throw config_error("unknown config key: " + key);
}

std::string ExperimentConfig::get(const std::string& key) const {
    for (const auto& b : bindings())
        if (key == b.name)
            return b.get(*this);
    throw config_error("unknown config key: " + key);
}

std::vector<std::string> ExperimentConfig::keys() {
    std::vector<std::string> out;
    for (const auto& b : bindings())
        out.push_back(b.name);
    return out;
}

void ExperimentConfig::validate() const {
    if (arm != "aris" && arm != "aris_ref1" && arm != "aris_ref2" && arm != "random")
        throw config_error("arm must be one of aris, aris_ref1, aris_ref2, random");
    if (steps < 1)
        throw config_error("steps must be >= 1");
    if (snapshot_window < 1)
        throw config_error("snapshot_window must be >= 1");
    if (!(step_period > 0.0))
        throw config_error("step_period must be positive");
    if (mobility_speed < 0.0)
        throw config_error("mobility_speed must be >= 0");
    if (num_ues < 1)
        throw config_error("num_ues must be >= 1");
    if (bs_antennas < num_ues)
        throw config_error("bs_antennas must be >= num_ues (the precoders need K <= M)");
    if (num_clusters < 0)
        throw config_error("num_clusters must be >= 0");
    if (grid_hor < 1 || grid_ver < 1)
        throw config_error("angle grid must have at least one point per axis");
    base_geometry().validate();
    tx().validate();
    agent().validate();
    network_spec().validate();
    const SensingLayout layout = make_layout(); // throws on bad explicit indices
    if (arm == "aris" && num_clusters + 1 > layout.count())
        throw config_error("more paths per link than sensing elements; recovery is unresolvable");
}

TxConfig ExperimentConfig::tx() const {
    return {dbm_to_watt(bs_power_dbm), dbm_to_watt(ue_power_dbm), dbm_to_watt(noise_power_dbm)};
}

ScenarioGeometry ExperimentConfig::base_geometry() const {
    ScenarioGeometry geo;
    geo.bs_position = bs_position;
    geo.ris_position = ris_position;
    geo.bs_antennas = bs_antennas;
    geo.ris_n_hor = ris_n_hor;
    geo.ris_n_ver = ris_n_ver;
    geo.carrier_frequency = carrier_frequency;
    geo.pathloss_exponent = pathloss_exponent;
    geo.reference_power = reference_power;
    return geo;
}

PlacementParams ExperimentConfig::placement() const {
    PlacementParams p;
    p.num_ues = num_ues;
    p.clusters_per_link = num_clusters;
    p.ue_area_x = ue_area_x;
    p.ue_area_y = ue_area_y;
    p.ue_height = ue_height;
    p.cluster_region_x = cluster_region_x;
    p.cluster_region_y = cluster_region_y;
    p.cluster_region_z = cluster_region_z;
    p.speed = mobility_speed;
    return p;
}

SensingLayout ExperimentConfig::make_layout() const {
    if (sensing_layout == "first_row_col")
        return sensing_first_row_col(ris_n_hor, ris_n_ver);
    if (sensing_layout == "explicit")
        return sensing_explicit(sensing_indices, ris_n_hor, ris_n_ver);
    throw config_error("sensing_layout must be first_row_col or explicit");
}

AgentConfig ExperimentConfig::agent() const {
    AgentConfig a;
    a.gamma = gamma;
    a.epsilon_init = epsilon_init;
    a.epsilon_decay = epsilon_decay;
    a.epsilon_floor = epsilon_floor;
    a.replay_capacity = replay_capacity;
    a.batch_size = batch_size;
    a.train_period = train_period;
    a.train_passes = train_passes;
    a.learning_rate = learning_rate;
    a.recompute_q_at_train = recompute_q_at_train;
    return a;
}

nn::NetworkSpec ExperimentConfig::network_spec() const {
    const int n = ris_elements();
    return nn::NetworkSpec::standard(n * num_ues, n, n, hidden1, hidden2, head_hidden,
                                     leaky_slope, dropout_rate);
}

} // namespace arisim
