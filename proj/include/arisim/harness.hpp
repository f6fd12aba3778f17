#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "arisim/config.hpp"

namespace arisim {

/// One CSV row per simulation step. `estimated_rate` is the rate estimate the
/// arm used as its reward basis (equal to the true rate for aris_ref1, zero
/// for the agent-free random arm).
struct MetricsRow {
    int step = 0;
    double time_s = 0.0;
    double true_rate = 0.0;
    double estimated_rate = 0.0;
    double reward = 0.0;
    double epsilon = 0.0;
    double eta = 0.0;
    int action = -1;
    std::string arm;
    uint64_t seed = 0;
};

struct RunResult {
    std::vector<MetricsRow> rows;
    std::vector<std::string> anomalies;
    uint64_t networks_constructed = 0; // during this run
};

/// Runs one experiment episode. Deterministic: identical (config, seed)
/// produce an identical RunResult.
RunResult run_episode(const ExperimentConfig& cfg);

/// Fixed column order, header first, doubles printed with %.17g so a parse
/// round-trips exactly.
void emit_csv(const RunResult& result, std::ostream& out, bool header = true);
void write_csv(const RunResult& result, const std::string& path, bool append = false);

/// Fast invariant suite behind the `selftest` CLI subcommand; returns one
/// line per check, `failures` counts the ones that did not hold.
std::vector<std::string> selftest(int& failures);

} // namespace arisim
