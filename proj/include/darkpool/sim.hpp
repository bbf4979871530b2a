#pragma once

#include <functional>
#include <string>
#include <vector>

#include "darkpool/mfg.hpp"
#include "darkpool/params.hpp"
#include "darkpool/state.hpp"

namespace darkpool {

struct SimConfig {
    int n_paths = 10000;
    int n_steps = 1000;
    std::uint64_t seed = 1;
    double y0 = 0.0;  // initial compensation certainty equivalent
    bool record_trajectories = false;
    int table_points = 2049;  // q-grid size for the constant-fee fast path

    void validate() const;
};

// Sources of the exchange's BSDE exposures along a path. With `hedge` set,
// z = -sigma q and u_i = (1/rho) ln E[e^{-rho alpha min(ell,r)(2q-min)}]: the
// diffusion exposure cancels the wealth noise in the utility exponent and
// each jump's moment-generating factor is exactly 1, so the martingale
// identity is testable at Monte-Carlo precision.
struct ExposurePolicy {
    bool hedge = true;
    bool state_free = false;  // closures depend on q only through the tables
    std::function<double(double, const ExchangeState&)> z;
    std::vector<std::function<double(double, const ExchangeState&)>> u;

    static ExposurePolicy hedged() { return {}; }
    static ExposurePolicy constants(double z_val, const std::vector<double>& u_val);
};

struct Trajectory {
    std::vector<double> t, q, s, x, nu, lit_fee;
    std::vector<std::vector<double>> ell, fills, dark_fee;
};

struct PathMetrics {
    double permanent_impact = 0.0;  // int (gamma nu + epsilon lambda) dt
    double terminal_inventory = 0.0;
    double terminal_price = 0.0;
    double terminal_cash = 0.0;
    double terminal_wealth = 0.0;  // x_T + q_T (s_T - alpha q_T)
    double lit_volume = 0.0;       // int (-nu) dt
    std::vector<double> dark_volume;
    double xi = 0.0;            // realized compensation
    double exchange_pnl = 0.0;  // terminal iota
    double mean_lit_fee = 0.0;  // time average of the applied lit fee
    double running_penalty = 0.0;  // int phi q^2 dt
    int clamp_events = 0;
    Trajectory traj;  // filled when cfg.record_trajectories
};

// Monte-Carlo run of the regulated market: Euler steps of the §2.2 dynamics
// with the trader's best responses, at most one Poisson fill per pool per
// step, fee accrual, and compensation accumulation. The same random draws
// (dW, one jump uniform and one size uniform per pool) are consumed every
// step regardless of the controls, so runs at matched seeds are coupled.
// Constant fee schedules with hedge/constant exposures use pretabulated
// (allocation, moment, Hamiltonian) q-grids; other schedules are evaluated
// per step.
std::vector<PathMetrics> simulate_regulated(const SimConfig& cfg, const MarketParams& p,
                                            const std::vector<DarkPoolSpec>& pools,
                                            const FeeSchedule& fees,
                                            const ExposurePolicy& exposures);

// Competitive market: the major trader's path under the equilibrium feedback
// controls and the deterministic mean-field flow mu. Dark fills are fee-free.
std::vector<PathMetrics> simulate_competitive(const SimConfig& cfg,
                                              const MFGSolution& eq,
                                              const MarketParams& p,
                                              const std::vector<DarkPoolSpec>& pools);

struct SummaryStats {
    double mean = 0.0, stddev = 0.0;
    double mode = 0.0;  // center of the fullest of 64 bins over the range
    double q25 = 0.0, q75 = 0.0;
    double min = 0.0, max = 0.0;
    long count = 0;
};

SummaryStats summarize(const std::vector<double>& samples);

struct HistogramBin {
    double left = 0.0, right = 0.0;
    long count = 0;
};

std::vector<HistogramBin> histogram(const std::vector<double>& samples, int bins = 64);

// Metric extraction helpers.
std::vector<double> extract_metric(const std::vector<PathMetrics>& metrics,
                                   const std::string& name);

// CSV artifacts (plotting inputs).
void write_paths_csv(const std::string& path, const std::vector<PathMetrics>& metrics);
void write_summary_csv(const std::string& path,
                       const std::vector<std::pair<std::string, SummaryStats>>& rows);
void write_histogram_csv(const std::string& path,
                         const std::vector<HistogramBin>& bins);
void write_trajectory_csv(const std::string& path, const Trajectory& traj);

}  // namespace darkpool
