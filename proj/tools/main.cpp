// Command-line front end; talks to the simulation library through the C API
// only (arisim.h).
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "arisim.h"

namespace {

int fail(aris_status status) {
    std::fprintf(stderr, "error: %s\n", aris_last_error());
    return static_cast<int>(status);
}

struct ConfigHandle {
    aris_config* cfg = nullptr;
    ~ConfigHandle() { aris_config_destroy(cfg); }
};

int load_config(const std::string& path, ConfigHandle& handle) {
    const aris_status status =
        path.empty() ? aris_config_create(&handle.cfg) : aris_config_load(path.c_str(), &handle.cfg);
    return status == ARIS_OK ? 0 : fail(status);
}

int apply_override(aris_config* cfg, const char* key, const std::string& value) {
    const aris_status status = aris_config_set(cfg, key, value.c_str());
    return status == ARIS_OK ? 0 : fail(status);
}

std::vector<std::string> split_list(const std::string& csv) {
    std::vector<std::string> out;
    size_t start = 0;
    while (start <= csv.size()) {
        const size_t comma = csv.find(',', start);
        const size_t end = comma == std::string::npos ? csv.size() : comma;
        if (end > start)
            out.push_back(csv.substr(start, end - start));
        if (comma == std::string::npos)
            break;
        start = comma + 1;
    }
    return out;
}

} // namespace

int run_cli(int argc, char** argv) {
    CLI::App app{"Desk-scale simulation lab for self-configuring RIS phase control"};
    app.require_subcommand(1);

    std::string config_path, arm, out_path;
    std::optional<uint64_t> seed;
    std::optional<int> steps;

    CLI::App* run = app.add_subcommand("run", "Run one experiment arm and write a metrics CSV");
    run->add_option("--config", config_path, "Config file (key = value lines); defaults if omitted");
    run->add_option("--arm", arm, "aris | aris_ref1 | aris_ref2 | random");
    run->add_option("--seed", seed, "Run seed");
    run->add_option("--steps", steps, "Number of simulation steps");
    run->add_option("--out", out_path, "Output CSV path (default: the config's output key)");

    std::string arms_csv = "aris,aris_ref1,aris_ref2,random";
    std::string seeds_csv = "1";
    CLI::App* sweep = app.add_subcommand("sweep", "Run several arms/seeds into one CSV");
    sweep->add_option("--config", config_path, "Config file; defaults if omitted");
    sweep->add_option("--arms", arms_csv, "Comma-separated arm list");
    sweep->add_option("--seeds", seeds_csv, "Comma-separated seed list");
    sweep->add_option("--steps", steps, "Number of simulation steps");
    sweep->add_option("--out", out_path, "Output CSV path")->required();

    CLI::App* grad = app.add_subcommand("grad-check",
                                        "Finite-difference check of the network gradients");
    CLI::App* self = app.add_subcommand("selftest", "Fast invariant suite");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e); // 0
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    if (run->parsed()) {
        ConfigHandle handle;
        if (int rc = load_config(config_path, handle))
            return rc;
        if (!arm.empty())
            if (int rc = apply_override(handle.cfg, "arm", arm))
                return rc;
        if (seed)
            if (int rc = apply_override(handle.cfg, "seed", std::to_string(*seed)))
                return rc;
        if (steps)
            if (int rc = apply_override(handle.cfg, "steps", std::to_string(*steps)))
                return rc;
        if (out_path.empty()) {
            char buf[1024];
            if (aris_config_get(handle.cfg, "output", buf, sizeof buf) != ARIS_OK)
                return fail(ARIS_ERR_CONFIG);
            out_path = buf;
        }
        const aris_status status = aris_run(handle.cfg, out_path.c_str(), 0);
        if (status != ARIS_OK)
            return fail(status);
        std::printf("wrote %s\n", out_path.c_str());
        return 0;
    }

    if (sweep->parsed()) {
        const auto arms = split_list(arms_csv);
        const auto seeds = split_list(seeds_csv);
        if (arms.empty() || seeds.empty()) {
            std::fprintf(stderr, "error: --arms and --seeds must be non-empty lists\n");
            return 1;
        }
        int written = 0;
        for (const auto& a : arms) {
            for (const auto& s : seeds) {
                ConfigHandle handle;
                if (int rc = load_config(config_path, handle))
                    return rc;
                if (int rc = apply_override(handle.cfg, "arm", a))
                    return rc;
                if (int rc = apply_override(handle.cfg, "seed", s))
                    return rc;
                if (steps)
                    if (int rc = apply_override(handle.cfg, "steps", std::to_string(*steps)))
                        return rc;
                const aris_status status = aris_run(handle.cfg, out_path.c_str(), written > 0);
                if (status != ARIS_OK)
                    return fail(status);
                ++written;
                std::printf("arm=%s seed=%s done\n", a.c_str(), s.c_str());
            }
        }
        std::printf("wrote %s (%d runs)\n", out_path.c_str(), written);
        return 0;
    }

    if (grad->parsed()) {
        double max_err = 0.0;
        const aris_status status = aris_grad_check(&max_err);
        if (status != ARIS_OK)
            return fail(status);
        const bool ok = max_err <= 1e-4;
        std::printf("max relative gradient error: %.3e (%s)\n", max_err, ok ? "pass" : "fail");
        return ok ? 0 : 3;
    }

    if (self->parsed()) {
        std::vector<char> buf(1 << 16);
        int failures = 0;
        const aris_status status = aris_selftest(buf.data(), buf.size(), &failures);
        std::fputs(buf.data(), stdout);
        if (status == ARIS_OK)
            return 0;
        if (failures > 0) {
            std::fprintf(stderr, "%d selftest check(s) failed\n", failures);
            return 3;
        }
        return fail(status);
    }

    return 1;
}

int main(int argc, char** argv) { return run_cli(argc, argv); }
