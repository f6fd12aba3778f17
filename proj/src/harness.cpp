#include "arisim/harness.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "arisim/errors.hpp"
#include "arisim/rate.hpp"
#include "arisim/recovery.hpp"

namespace arisim {

namespace {

constexpr double kRateFloor = 1e-9;

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

} // namespace

RunResult run_episode(const ExperimentConfig& cfg) {
    cfg.validate();
    const uint64_t nets_before = nn::network_construction_count();

    RunResult result;
    Rng rng = Rng::for_run(cfg.seed, cfg.arm);
    ScenarioGeometry geo = sample_scenario(cfg.base_geometry(), cfg.placement(), rng);
    const TxConfig tx = cfg.tx();
    const int n = cfg.ris_elements();
    const int k_count = cfg.num_ues;

    ChannelSet ch = build_channels(geo);
    PhaseShiftVector v = PhaseShiftVector::all_ones(n);
    MatrixXcd h_eff = effective_matrix(ch.H_R, v, ch.h);
    Precoder f = mmse_precoder(h_eff, tx);

    auto step_environment = [&]() {
        // mobility first, then the BS re-estimates the effective CSI for the
        // current phase shifts and rebuilds its precoder
        geo = advance_mobility(geo, cfg.step_period);
        ch = build_channels(geo);
        h_eff = effective_matrix(ch.H_R, v, ch.h);
        f = mmse_precoder(h_eff, tx);
    };

    if (cfg.arm == "random") {
        for (int t = 0; t < cfg.steps; ++t) {
            MetricsRow row;
            row.step = t;
            row.time_s = t * cfg.step_period;
            row.true_rate = true_sum_rate(h_eff, f, tx);
            row.arm = cfg.arm;
            row.seed = cfg.seed;
            result.rows.push_back(std::move(row));

            for (int i = 0; i < n; ++i)
                v.v[i] = std::polar(1.0, rng.uniform(0.0, 2.0 * M_PI));
            step_environment();
        }
        result.networks_constructed = nn::network_construction_count() - nets_before;
        return result;
    }

    const bool recovered_arm = cfg.arm == "aris";
    const SensingLayout layout = cfg.make_layout();
    AngleGrid grid;
    if (recovered_arm)
        grid = make_angle_grid(cfg.grid_hor, cfg.grid_ver, layout);
    const RecoveryOptions recovery_opts{cfg.beta_refit};
    const int paths_per_link = cfg.num_clusters + 1;

    const AgentConfig agent_cfg = cfg.agent();
    nn::Network net(cfg.network_spec(), rng);
    const ActionSet actions = make_dft_action_set(n);
    ReplayBuffer buffer(static_cast<size_t>(agent_cfg.replay_capacity));
    double epsilon = agent_cfg.epsilon_init;

    bool have_prev = false;
    AgentState prev_state;
    VectorXd prev_q;
    int prev_action = 0;
    double prev_eta = 0.01;
    double prev_basis = 0.0;

    const int t_obs = cfg.snapshot_window;
    // reference arms consume noise-free observations only
    const double sense_noise = recovered_arm ? tx.noise_variance : 0.0;

    std::vector<VectorXcd> bs_partial(static_cast<size_t>(t_obs));
    std::vector<VectorXcd> bs_full(static_cast<size_t>(t_obs));
    std::vector<std::vector<VectorXcd>> ue_partial(static_cast<size_t>(k_count));
    std::vector<std::vector<VectorXcd>> ue_full(static_cast<size_t>(k_count));
    for (int k = 0; k < k_count; ++k) {
        ue_partial[static_cast<size_t>(k)].resize(static_cast<size_t>(t_obs));
        ue_full[static_cast<size_t>(k)].resize(static_cast<size_t>(t_obs));
    }

    for (int t = 0; t < cfg.steps; ++t) {
        // (1) one window of UL/DL exchanges seen at the RIS
        for (int i = 0; i < t_obs; ++i) {
            const Symbols sym = draw_symbols(rng, k_count, tx);
            SenseResult bs = ris_sense_bs(ch.H_R, f, sym.s, layout, sense_noise, rng);
            bs_partial[static_cast<size_t>(i)] = std::move(bs.partial);
            bs_full[static_cast<size_t>(i)] = std::move(bs.full_noise_free);
            for (int k = 0; k < k_count; ++k) {
                SenseResult ue = ris_sense_ue(ch.h[static_cast<size_t>(k)], sym.x[k], layout,
                                              sense_noise, rng);
                ue_partial[static_cast<size_t>(k)][static_cast<size_t>(i)] = std::move(ue.partial);
                ue_full[static_cast<size_t>(k)][static_cast<size_t>(i)] =
                    std::move(ue.full_noise_free);
            }
        }

        // (2) arm-dependent observation source
        RecoveredScene rec;
        if (recovered_arm)
            rec = recover_all(bs_partial, ue_partial, grid, paths_per_link, paths_per_link,
                              recovery_opts);
        auto y_r_at = [&](int i) -> VectorXcd {
            return recovered_arm ? VectorXcd(rec.bs.y_hat.col(i)) : bs_full[static_cast<size_t>(i)];
        };
        auto y_ue_at = [&](int k, int i) -> VectorXcd {
            return recovered_arm ? VectorXcd(rec.ue[static_cast<size_t>(k)].y_hat.col(i))
                                 : ue_full[static_cast<size_t>(k)][static_cast<size_t>(i)];
        };

        // (3) rates; the true rate is always logged for evaluation
        std::vector<double> z_powers(static_cast<size_t>(k_count));
        for (int k = 0; k < k_count; ++k) {
            std::vector<std::complex<double>> z(static_cast<size_t>(t_obs));
            for (int i = 0; i < t_obs; ++i)
                z[static_cast<size_t>(i)] = combined_observation(y_r_at(i), v, y_ue_at(k, i));
            z_powers[static_cast<size_t>(k)] = z_power(z);
        }
        const double est_rate = estimated_sum_rate(z_powers, tx);
        const double true_rate = true_sum_rate(h_eff, f, tx);
        const double basis_rate = cfg.arm == "aris_ref1" ? true_rate : est_rate;

        // (4) state, reward, action, phase update
        std::vector<VectorXcd> last_ue(static_cast<size_t>(k_count));
        for (int k = 0; k < k_count; ++k)
            last_ue[static_cast<size_t>(k)] = y_ue_at(k, t_obs - 1);
        const AgentState state = build_state(y_r_at(t_obs - 1), last_ue, v);
        const VectorXd q = net.forward_eval(state.s1, state.s2);

        double reward = 0.0;
        double eta = 0.01;
        if (have_prev) {
            if (prev_basis < kRateFloor)
                result.anomalies.push_back("step " + std::to_string(t) +
                                           ": reward floor applied, previous rate below 1e-9");
            reward = reward_ratio(basis_rate, prev_basis, kRateFloor);
            buffer.push({prev_state, state, prev_action, reward, prev_q, q, prev_eta});
            eta = adaptive_eta(basis_rate - prev_basis);
        }
        const int action = select_action(q, epsilon, rng);
        v = update_phase(v, action, eta, actions);

        MetricsRow row;
        row.step = t;
        row.time_s = t * cfg.step_period;
        row.true_rate = true_rate;
        row.estimated_rate = basis_rate;
        row.reward = reward;
        row.epsilon = epsilon;
        row.eta = eta;
        row.action = action;
        row.arm = cfg.arm;
        row.seed = cfg.seed;
        result.rows.push_back(std::move(row));

        prev_state = state;
        prev_q = q;
        prev_action = action;
        prev_eta = eta;
        prev_basis = basis_rate;
        have_prev = true;
        epsilon = std::max(agent_cfg.epsilon_floor, epsilon * agent_cfg.epsilon_decay);

        // (5) environment evolution, (6) training cadence
        step_environment();
        if ((t + 1) % agent_cfg.train_period == 0 && !buffer.empty())
            train_cycle(buffer, net, agent_cfg, rng);
    }

    if (!cfg.params_out.empty())
        net.save_file(cfg.params_out);
    result.networks_constructed = nn::network_construction_count() - nets_before;
    return result;
}

void emit_csv(const RunResult& result, std::ostream& out, bool header) {
    if (header)
        out << "step,time_s,true_rate,estimated_rate,reward,epsilon,eta,action,arm,seed\n";
    for (const auto& r : result.rows) {
        out << r.step << ',' << fmt(r.time_s) << ',' << fmt(r.true_rate) << ','
            << fmt(r.estimated_rate) << ',' << fmt(r.reward) << ',' << fmt(r.epsilon) << ','
            << fmt(r.eta) << ',' << r.action << ',' << r.arm << ',' << r.seed << '\n';
    }
}

void write_csv(const RunResult& result, const std::string& path, bool append) {
    std::ofstream out(path, append ? std::ios::app : std::ios::trunc);
    if (!out)
        throw config_error("cannot open output file: " + path);
    emit_csv(result, out, !append);
    out.flush();
    if (!out)
        throw numeric_error("failed writing output file: " + path);
}

} // namespace arisim
