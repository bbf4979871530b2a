#include "darkpool/capi.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "darkpool/config.hpp"
#include "darkpool/fee_train.hpp"
#include "darkpool/fill_law.hpp"
#include "darkpool/mfg.hpp"
#include "darkpool/sim.hpp"
#include "darkpool/trader.hpp"

using namespace darkpool;

struct dp_config {
    AppConfig cfg;
};

namespace {

thread_local std::string g_last_error;

int fail(int code, const std::string& msg) {
    g_last_error = msg;
    return code;
}

template <typename Fn>
int guarded(Fn&& fn) {
    try {
        fn();
        g_last_error.clear();
        return DP_OK;
    } catch (const std::invalid_argument& e) {
        return fail(DP_ERR_INVALID_ARG, e.what());
    } catch (const std::ios_base::failure& e) {
        return fail(DP_ERR_IO, e.what());
    } catch (const std::runtime_error& e) {
        const std::string what = e.what();
        return fail(what.find("cannot write") != std::string::npos ? DP_ERR_IO
                                                                   : DP_ERR_RUNTIME,
                    what);
    } catch (const std::exception& e) {
        return fail(DP_ERR_RUNTIME, e.what());
    }
}

std::string prep_dir(const char* out_dir) {
    if (out_dir == nullptr || *out_dir == '\0')
        throw std::invalid_argument("output directory is required");
    std::filesystem::path dir(out_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot write " + dir.string());
    return dir.string();
}

void write_text(const std::string& path, const std::string& body) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path);
    os << body;
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

void write_manifest(const std::string& dir, const AppConfig& cfg,
                    const std::string& command) {
    write_text(dir + "/manifest.json", manifest_json(cfg, command) + "\n");
}

const AppConfig& deref(const dp_config* handle) {
    if (handle == nullptr) throw std::invalid_argument("null config handle");
    return handle->cfg;
}

void run_solve_trader(const AppConfig& c, const std::string& dir) {
    const MarketParams& p = c.params;
    const int M = static_cast<int>(c.pools.size());
    std::ostringstream os;
    os << "q,nu";
    for (int i = 0; i < M; ++i) os << ",ell_" << i;
    for (int i = 0; i < M; ++i) os << ",u_" << i;
    os << ",z,driver_h\n";
    const int N = 401;
    for (int j = 0; j < N; ++j) {
        const double q = p.Q0 * j / (N - 1);
        std::vector<double> ell(M, 0.0);
        if (q > 0.0 && M > 0)
            ell = optimal_dark_alloc_exp(q, c.pools, c.dark_fees, p.rho, p.alpha,
                                         p.k_c)
                      .ell;
        std::vector<double> u(M, 0.0);
        for (int i = 0; i < M; ++i) {
            const double ebar = exp_min_exponential_moment(
                c.pools[i], ell[i], c.dark_fees[i], std::max(q, ell[i]), p.rho,
                p.alpha, p.k_c);
            u[i] = std::log(ebar) / p.rho;
        }
        const double z = -p.sigma * q;
        const double nu =
            q > 0.0
                ? optimal_lit_rate_exp(q, c.lit_fee, u, p, ell, c.pools, c.dark_fees)
                : 0.0;
        const double h = driver_h(0.0, q, z, u, nu, ell,
                                  FeeVec{c.lit_fee, c.dark_fees}, p, c.pools);
        os << fmt(q) << "," << fmt(nu);
        for (int i = 0; i < M; ++i) os << "," << fmt(ell[i]);
        for (int i = 0; i < M; ++i) os << "," << fmt(u[i]);
        os << "," << fmt(z) << "," << fmt(h) << "\n";
    }
    write_text(dir + "/strategy.csv", os.str());
    write_manifest(dir, c, "solve-trader");
}

void run_solve_mfg(const AppConfig& c, const std::string& dir) {
    const MFGSolution eq = mfg_fixed_point(c.mfg, c.params, c.pools);
    if (!eq.converged)
        throw std::runtime_error("mfg fixed point did not converge (residual " +
                                 std::to_string(eq.residual) + ")");
    const int n = static_cast<int>(eq.minor.mu.size());
    std::ostringstream os;
    os << "t,mu,E,major_inventory\n";
    for (int k = 0; k < n; ++k) {
        const double t = c.params.T * k / (n - 1);
        os << fmt(t) << "," << fmt(eq.minor.mu[k]) << "," << fmt(eq.minor.E[k]) << ","
           << fmt(eq.Q0bar[k]) << "\n";
    }
    write_text(dir + "/mfg_paths.csv", os.str());

    std::ostringstream rs;
    rs << "iteration,residual\n";
    for (std::size_t k = 0; k < eq.residual_history.size(); ++k)
        rs << k << "," << fmt(eq.residual_history[k]) << "\n";
    write_text(dir + "/mfg_residuals.csv", rs.str());

    std::ostringstream ds;
    ds << "t,q,density\n";
    for (const auto& snap : eq.minor.flow.snapshots) {
        const int nq = static_cast<int>(snap.density.size());
        for (int j = 0; j < nq; ++j)
            ds << fmt(snap.t) << "," << fmt(c.mfg.q_max * j / (nq - 1)) << ","
               << fmt(snap.density[j]) << "\n";
    }
    write_text(dir + "/mfg_density.csv", ds.str());
    write_manifest(dir, c, "solve-mfg");
}

void run_train_fees(const AppConfig& c, const std::string& dir) {
    TrainConfig tc = c.train;
    tc.log_path = dir + "/training_log.csv";
    const TrainResult r = train(tc, c.params, c.pools);
    nn::save_critic(r.critic, dir + "/critic.txt");
    nn::save_actor(r.actor, dir + "/actor.txt");

    // learned controls along the nominal depletion path
    Eigen::MatrixXd nom(101, 5);
    for (int i = 0; i <= 100; ++i) {
        const double t = c.params.T * i / 100.0;
        nom.row(i) << t, c.params.Q0 * (1.0 - 0.8 * t / c.params.T), c.params.S0,
            0.9 * t, 0.012 * t;
    }
    nn::Actor actor = r.actor;
    const auto ctr = actor_controls(actor, nom);
    const int M = static_cast<int>(c.pools.size());
    std::ostringstream os;
    os << "t,c_l";
    for (int i = 0; i < M; ++i) os << ",c_d_" << i;
    os << ",z";
    for (int i = 0; i < M; ++i) os << ",u_" << i;
    os << "\n";
    for (int i = 0; i <= 100; ++i) {
        os << fmt(nom(i, 0)) << "," << fmt(ctr[i].c_l);
        for (int k = 0; k < M; ++k) os << "," << fmt(ctr[i].c_d[k]);
        os << "," << fmt(ctr[i].z);
        for (int k = 0; k < M; ++k) os << "," << fmt(ctr[i].u[k]);
        os << "\n";
    }
    write_text(dir + "/fee_schedule.csv", os.str());
    write_manifest(dir, c, "train-fees");
}

void run_simulate(const AppConfig& c, const std::string& dir) {
    std::vector<PathMetrics> metrics;
    if (c.market == MarketKind::Regulated) {
        metrics = simulate_regulated(c.sim, c.params, c.pools,
                                     FeeSchedule::constant(c.lit_fee, c.dark_fees),
                                     ExposurePolicy::hedged());
    } else {
        const MFGSolution eq = mfg_fixed_point(c.mfg, c.params, c.pools);
        if (!eq.converged)
            throw std::runtime_error("mfg fixed point did not converge");
        metrics = simulate_competitive(c.sim, eq, c.params, c.pools);
    }
    write_paths_csv(dir + "/paths.csv", metrics);

    std::vector<std::pair<std::string, SummaryStats>> rows;
    std::vector<std::string> names{"impact",        "terminal_inventory",
                                   "terminal_price", "terminal_wealth",
                                   "lit_volume",     "exchange_pnl"};
    for (std::size_t i = 0; i < c.pools.size(); ++i)
        names.push_back("dark_volume_" + std::to_string(i));
    if (c.market == MarketKind::Regulated) names.push_back("xi");
    for (const auto& name : names) rows.emplace_back(name, summarize(extract_metric(metrics, name)));
    write_summary_csv(dir + "/summary.csv", rows);
    write_histogram_csv(dir + "/impact_histogram.csv",
                        histogram(extract_metric(metrics, "impact")));
    if (c.sim.record_trajectories && !metrics.empty())
        write_trajectory_csv(dir + "/trajectory.csv", metrics[0].traj);
    write_manifest(dir, c, "simulate");
}

void run_benchmark_ac(const AppConfig& c, const std::string& dir) {
    const auto r = almgren_chriss_benchmark(c.params, c.sim.n_steps, c.sim.n_paths,
                                            c.sim.seed);
    std::ostringstream os;
    os << "t,q,nu\n";
    for (std::size_t k = 0; k < r.t.size(); ++k)
        os << fmt(r.t[k]) << "," << fmt(r.q[k]) << "," << fmt(r.nu[k]) << "\n";
    write_text(dir + "/ac_schedule.csv", os.str());
    std::ostringstream ss;
    ss << "ce,ce_se,log_neg_r0\n"
       << fmt(r.ce) << "," << fmt(r.ce_se) << "," << fmt(r.log_neg_r0) << "\n";
    write_text(dir + "/ac_summary.csv", ss.str());
    write_manifest(dir, c, "benchmark-ac");
}

}  // namespace

extern "C" {

const char* dp_version(void) { return kVersion; }

const char* dp_last_error(void) { return g_last_error.c_str(); }

int dp_config_create(const char* preset, dp_config** out) {
    return guarded([&] {
        if (preset == nullptr || out == nullptr)
            throw std::invalid_argument("null argument");
        *out = new dp_config{default_config(preset)};
    });
}

int dp_config_parse(const char* json_text, dp_config** out) {
    return guarded([&] {
        if (json_text == nullptr || out == nullptr)
            throw std::invalid_argument("null argument");
        *out = new dp_config{parse_config(json_text)};
    });
}

int dp_config_apply(dp_config* cfg, const char* json_text) {
    return guarded([&] {
        if (cfg == nullptr || json_text == nullptr)
            throw std::invalid_argument("null argument");
        apply_overrides(cfg->cfg, json_text);
    });
}

int dp_config_dump(const dp_config* cfg, char** out_json) {
    return guarded([&] {
        if (out_json == nullptr) throw std::invalid_argument("null argument");
        const std::string s = config_json(deref(cfg));
        *out_json = new char[s.size() + 1];
        s.copy(*out_json, s.size());
        (*out_json)[s.size()] = '\0';
    });
}

void dp_string_free(char* s) { delete[] s; }

void dp_config_free(dp_config* cfg) { delete cfg; }

int dp_solve_trader(const dp_config* cfg, const char* out_dir) {
    return guarded([&] { run_solve_trader(deref(cfg), prep_dir(out_dir)); });
}

int dp_solve_mfg(const dp_config* cfg, const char* out_dir) {
    return guarded([&] { run_solve_mfg(deref(cfg), prep_dir(out_dir)); });
}

int dp_train_fees(const dp_config* cfg, const char* out_dir) {
    return guarded([&] { run_train_fees(deref(cfg), prep_dir(out_dir)); });
}

int dp_simulate(const dp_config* cfg, const char* out_dir) {
    return guarded([&] { run_simulate(deref(cfg), prep_dir(out_dir)); });
}

int dp_benchmark_ac(const dp_config* cfg, const char* out_dir) {
    return guarded([&] { run_benchmark_ac(deref(cfg), prep_dir(out_dir)); });
}

}  // extern "C"
