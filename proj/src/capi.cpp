#include "arisim.h"

#include <cstring>
#include <string>

#include "arisim/config.hpp"
#include "arisim/errors.hpp"
#include "arisim/harness.hpp"
#include "arisim/neuralnet.hpp"

namespace {

thread_local std::string t_last_error;

template <typename Fn> aris_status guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const arisim::config_error& e) {
        t_last_error = e.what();
        return ARIS_ERR_CONFIG;
    } catch (const std::exception& e) {
        t_last_error = e.what();
        return ARIS_ERR_RUNTIME;
    }
}

} // namespace

struct aris_config {
    arisim::ExperimentConfig cfg;
};

extern "C" {

const char* aris_version(void) { return "arisim 1.0.0"; }

const char* aris_last_error(void) { return t_last_error.c_str(); }

aris_status aris_config_create(aris_config** out) {
    if (!out) {
        t_last_error = "aris_config_create: out is NULL";
        return ARIS_ERR_USAGE;
    }
    return guarded([&]() {
        *out = new aris_config{};
        return ARIS_OK;
    });
}

aris_status aris_config_load(const char* path, aris_config** out) {
    if (!path || !out) {
        t_last_error = "aris_config_load: NULL argument";
        return ARIS_ERR_USAGE;
    }
    return guarded([&]() {
        auto cfg = arisim::ExperimentConfig::from_file(path);
        *out = new aris_config{std::move(cfg)};
        return ARIS_OK;
    });
}

void aris_config_destroy(aris_config* cfg) { delete cfg; }

aris_status aris_config_set(aris_config* cfg, const char* key, const char* value) {
    if (!cfg || !key || !value) {
        t_last_error = "aris_config_set: NULL argument";
        return ARIS_ERR_USAGE;
    }
    return guarded([&]() {
        cfg->cfg.set(key, value);
        return ARIS_OK;
    });
}

aris_status aris_config_get(const aris_config* cfg, const char* key, char* buf, size_t buf_len) {
    if (!cfg || !key || !buf || buf_len == 0) {
        t_last_error = "aris_config_get: NULL argument or empty buffer";
        return ARIS_ERR_USAGE;
    }
    return guarded([&]() {
        const std::string value = cfg->cfg.get(key);
        if (value.size() + 1 > buf_len) {
            t_last_error = "aris_config_get: buffer too small";
            return ARIS_ERR_USAGE;
        }
        std::memcpy(buf, value.c_str(), value.size() + 1);
        return ARIS_OK;
    });
}

aris_status aris_run(const aris_config* cfg, const char* csv_path, int append) {
    if (!cfg || !csv_path) {
        t_last_error = "aris_run: NULL argument";
        return ARIS_ERR_USAGE;
    }
    return guarded([&]() {
        const arisim::RunResult result = arisim::run_episode(cfg->cfg);
        arisim::write_csv(result, csv_path, append != 0);
        return ARIS_OK;
    });
}

aris_status aris_grad_check(double* max_rel_error) {
    if (!max_rel_error) {
        t_last_error = "aris_grad_check: out pointer is NULL";
        return ARIS_ERR_USAGE;
    }
    return guarded([&]() {
        const arisim::ExperimentConfig defaults;
        const auto report = arisim::nn::finite_difference_check(defaults.network_spec());
        *max_rel_error = report.max_rel_error;
        return ARIS_OK;
    });
}

aris_status aris_selftest(char* buf, size_t buf_len, int* failures) {
    if (!failures) {
        t_last_error = "aris_selftest: failures pointer is NULL";
        return ARIS_ERR_USAGE;
    }
    return guarded([&]() {
        int bad = 0;
        const auto lines = arisim::selftest(bad);
        *failures = bad;
        if (buf && buf_len > 0) {
            std::string report;
            for (const auto& l : lines) {
                report += l;
                report += '\n';
            }
            const size_t n = std::min(report.size(), buf_len - 1);
            std::memcpy(buf, report.data(), n);
            buf[n] = '\0';
        }
        return bad == 0 ? ARIS_OK : ARIS_ERR_RUNTIME;
    });
}

} // extern "C"
