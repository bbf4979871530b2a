// Acceptance gate: one pass/fail line per criterion, nonzero exit on any
// failure. Runs end to end in under an hour on a desktop.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "darkpool/capi.h"
#include "darkpool/config.hpp"
#include "darkpool/fee_train.hpp"
#include "darkpool/fill_law.hpp"
#include "darkpool/mfg.hpp"
#include "darkpool/rng.hpp"
#include "darkpool/sim.hpp"
#include "darkpool/trader.hpp"

using namespace darkpool;
using Eigen::MatrixXd;
using Eigen::RowVectorXd;
using Eigen::VectorXd;

namespace {

int g_failures = 0;
std::vector<std::pair<int, std::string>> g_lines;

void report(int criterion, bool ok, const std::string& detail) {
    g_lines.emplace_back(criterion, std::string(ok ? "PASS" : "FAIL") +
                                        "  criterion " +
                                        std::to_string(criterion) + ": " + detail);
    std::fprintf(stderr, "[acceptance] criterion %d done (%s)\n", criterion,
                 ok ? "pass" : "fail");
    if (!ok) ++g_failures;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

// ---------------------------------------------------------------- 1
void criterion_1() {
    const ModelPreset t1 = load_preset("table1");
    const std::vector<double> zero2{0.0, 0.0};
    const double nu =
        optimal_lit_rate_exp(1.0, 0.01, zero2, t1.params, zero2, t1.pools, zero2);
    const bool ok = std::abs(nu + 1.75) < 1e-12;
    report(1, ok, "closed-form lit rate nu(0) = " + fmt(nu) + " (want -1.75)");
}

// ---------------------------------------------------------------- 2
void criterion_2() {
    const ModelPreset t1 = load_preset("table1");
    const double alpha = t1.params.alpha, eta = t1.params.eta, T = t1.params.T;
    const int N = 1000;
    const double dt = T / N;
    // integrate h2' = -h2^2/eta backward from h2(T) = -alpha by RK4
    double h = -alpha, sup = 0.0;
    const auto f = [&](double v) { return -v * v / eta; };
    for (int k = N; k >= 0; --k) {
        sup = std::max(sup, std::abs(h - riccati_h2(k * dt, alpha, eta, T)));
        if (k == 0) break;
        const double k1 = f(h);
        const double k2 = f(h - 0.5 * dt * k1);
        const double k3 = f(h - 0.5 * dt * k2);
        const double k4 = f(h - dt * k3);
        h -= dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    report(2, sup < 1e-8, "riccati closed form vs RK4, sup error " + fmt(sup));
}

// ---------------------------------------------------------------- 3
void criterion_3() {
    const ModelPreset t2 = load_preset("table2");
    MFGConfig grid;
    grid.snapshot_times = {0.25, 0.5, 0.75, 1.0};

    MFGConfig ga = grid, gb = grid;
    ga.mu_init.assign(grid.n_time + 1, 0.0);
    gb.mu_init.assign(grid.n_time + 1, -0.5);
    const MFGSolution a = mfg_fixed_point(ga, t2.params, t2.pools);
    const MFGSolution b = mfg_fixed_point(gb, t2.params, t2.pools);

    bool ok = a.converged && b.converged && a.iterations <= grid.max_iters &&
              a.residual < grid.tol;
    double mu_diff = 0.0;
    for (std::size_t k = 0; k < a.minor.mu.size(); ++k)
        mu_diff = std::max(mu_diff, std::abs(a.minor.mu[k] - b.minor.mu[k]));
    ok = ok && mu_diff < 1e-5;

    double mass_err = 0.0;
    for (const auto& snap : a.minor.flow.snapshots)
        mass_err = std::max(mass_err, std::abs(snap.mass - 1.0));
    ok = ok && mass_err < 1e-6;

    const double dt = t2.params.T / grid.n_time;
    const int n = static_cast<int>(a.minor.E.size()) - 1;
    const double dET = (3.0 * a.minor.E[n] - 4.0 * a.minor.E[n - 1] +
                        a.minor.E[n - 2]) /
                       (2.0 * dt);
    const double robin =
        std::abs(dET + t2.params.alpha / t2.params.eta * a.minor.E[n]);
    ok = ok && robin < 10.0 * dt;

    double mu_vs_dE = 0.0;
    for (int k = 1; k < n; ++k)
        mu_vs_dE = std::max(
            mu_vs_dE, std::abs(a.minor.mu[k] -
                               (a.minor.E[k + 1] - a.minor.E[k - 1]) / (2.0 * dt)));
    ok = ok && mu_vs_dE < 10.0 * dt;

    report(3, ok,
           "mfg equilibrium: residual " + fmt(a.residual) + " in " +
               std::to_string(a.iterations) + " iters, guess gap " + fmt(mu_diff) +
               ", mass err " + fmt(mass_err) + ", robin " + fmt(robin) +
               ", |mu-E'| " + fmt(mu_vs_dE));
}

// ---------------------------------------------------------------- 4
double grid_alloc_linear(double q, const std::vector<DarkPoolSpec>& pools,
                         const std::vector<double>& fees, double k_c) {
    double best = -1e300, best_l = 0.0;
    for (double l1 = 0.0; l1 <= q + 1e-12; l1 += 1e-4) {
        const double l2 = std::max(0.0, q - l1);
        const double v =
            pools[0].theta * exp_min_linear_moment(pools[0], l1, fees[0], q, k_c) +
            pools[1].theta * exp_min_linear_moment(pools[1], l2, fees[1], q, k_c);
        if (v > best) {
            best = v;
            best_l = l1;
        }
    }
    return best_l;
}

double grid_alloc_exp(double q, const std::vector<DarkPoolSpec>& pools,
                      const std::vector<double>& fees, double rho, double alpha,
                      double k_c) {
    double best = 1e300, best_l = 0.0;
    for (double l1 = 0.0; l1 <= q + 1e-12; l1 += 1e-4) {
        const double l2 = std::max(0.0, q - l1);
        const double v =
            pools[0].theta *
                exp_min_exponential_moment(pools[0], l1, fees[0], q, rho, alpha, k_c) +
            pools[1].theta *
                exp_min_exponential_moment(pools[1], l2, fees[1], q, rho, alpha, k_c);
        if (v < best) {
            best = v;
            best_l = l1;
        }
    }
    return best_l;
}

void criterion_4() {
    const ModelPreset t1 = load_preset("table1", LiquidityParam::Mean);
    const MarketParams& p = t1.params;
    Rng rng(404);
    double worst = 0.0;
    int n = 0;
    for (int k = 0; k < 20; ++k) {
        const double q = 0.2 + 0.8 * rng.uniform();
        const std::vector<double> fees{0.008 * rng.uniform(), 0.008 * rng.uniform()};
        const auto lin = optimal_dark_alloc_linear(q, t1.pools, fees, p.k_c);
        worst = std::max(worst,
                         std::abs(lin.ell[0] - grid_alloc_linear(q, t1.pools, fees,
                                                                 p.k_c)));
        const auto ex =
            optimal_dark_alloc_exp(q, t1.pools, fees, p.rho, p.alpha, p.k_c);
        worst = std::max(
            worst, std::abs(ex.ell[0] - grid_alloc_exp(q, t1.pools, fees, p.rho,
                                                       p.alpha, p.k_c)));
        n += 2;
    }
    report(4, worst < 1e-3,
           "allocation vs 1e-4 grid oracle on " + std::to_string(n) +
               " instances, worst gap " + fmt(worst));
}

// ---------------------------------------------------------------- 5
void criterion_5() {
    const ModelPreset t1 = load_preset("table1", LiquidityParam::Mean);
    const double k_c = t1.params.k_c;
    Rng rng(505);
    const int n_mc = 1000000;
    int points = 0;
    double worst_sigmas = 0.0;
    bool ok = true;
    for (double q : {0.4, 0.8, 1.2})
        for (double lf : {0.25, 0.5, 1.0})
            for (double cd : {0.0, 0.004, 0.008}) {
                const auto& pool = t1.pools[points % 2];
                const double ell = lf * q;
                double s1 = 0.0, s2 = 0.0, m1 = 0.0, m2 = 0.0;
                for (int i = 0; i < n_mc; ++i) {
                    const double m = sample_dark_fill(pool, ell, cd, k_c, rng);
                    const double lm = m * (2.0 * q - m);
                    s1 += m;
                    s2 += m * m;
                    m1 += lm;
                    m2 += lm * lm;
                }
                const double mean_f = s1 / n_mc;
                const double se_f =
                    std::sqrt((s2 / n_mc - mean_f * mean_f) / n_mc);
                const double mean_l = m1 / n_mc;
                const double se_l =
                    std::sqrt((m2 / n_mc - mean_l * mean_l) / n_mc);
                const double want_f = expected_fill(pool, ell, cd, k_c);
                const double want_l = exp_min_linear_moment(pool, ell, cd, q, k_c);
                const double sig_f = std::abs(mean_f - want_f) / se_f;
                const double sig_l = std::abs(mean_l - want_l) / se_l;
                worst_sigmas = std::max({worst_sigmas, sig_f, sig_l});
                ok = ok && sig_f < 3.0 && sig_l < 3.0;
                ++points;
            }
    report(5, ok,
           "fill moments vs 1e6-sample MC on " + std::to_string(points) +
               " grid points, worst " + fmt(worst_sigmas) + " SE");
}

// ---------------------------------------------------------------- 6 & 7
std::vector<PathMetrics> g_m1_paths, g_m2_paths, g_m2_ramp_paths, g_comp_paths;

void criterion_6() {
    const ModelPreset t1 = load_preset("table1");
    const MarketParams& p = t1.params;
    SimConfig cfg;
    cfg.n_paths = 10000;
    cfg.n_steps = 2000;
    cfg.seed = 606;
    const FeeSchedule fees = FeeSchedule::constant(0.01, {0.01, 0.01});
    g_m2_paths = simulate_regulated(cfg, p, t1.pools, fees, ExposurePolicy::hedged());

    // V0 = -e^{-rho Ybar0} with Ybar0 = X0 + Q0 (S0 - alpha Q0) + y0.
    // Work with w = e^{-rho (G_T - Ybar0)}, whose mean must be 1.
    const double ybar0 = p.X0 + p.Q0 * (p.S0 - p.alpha * p.Q0) + cfg.y0;
    double sum = 0.0, ss = 0.0;
    for (const auto& m : g_m2_paths) {
        const double g = m.xi + m.terminal_cash +
                         m.terminal_inventory *
                             (m.terminal_price - p.alpha * m.terminal_inventory) -
                         m.running_penalty;
        const double w = std::exp(-p.rho * (g - ybar0));
        sum += w;
        ss += w * w;
    }
    const double n = cfg.n_paths;
    const double mean = sum / n;
    const double se = std::sqrt((ss / n - mean * mean) / n);
    const double sig = std::abs(mean - 1.0) / se;
    report(6, sig < 3.0,
           "martingale identity: E[w] = " + fmt(mean) + " (want 1), " + fmt(sig) +
               " SE over 10^4 paths");
}

void criterion_7() {
    const ModelPreset t1 = load_preset("table1");
    bool ok = true;
    double worst = 0.0;
    long count = 0;
    const auto check = [&](const std::vector<PathMetrics>& paths, double Q0) {
        for (const auto& m : paths) {
            double dark = 0.0;
            for (double v : m.dark_volume) dark += v;
            const double gap =
                std::abs(Q0 - m.lit_volume - dark - m.terminal_inventory);
            worst = std::max(worst, gap);
            ok = ok && gap < 1e-10;
            ++count;
        }
    };
    check(g_m2_paths, t1.params.Q0);
    check(g_m1_paths, t1.params.Q0);
    check(g_m2_ramp_paths, t1.params.Q0);
    check(g_comp_paths, load_preset("table2").params.Q0);
    report(7, ok,
           "inventory conservation on " + std::to_string(count) +
               " paths, worst gap " + fmt(worst));
}

// ---------------------------------------------------------------- 8
struct PolyCritic {
    double a0 = 0.3, a1 = 1.4, a2 = -0.7, a3 = 0.5, a4 = 2.1, a5 = -0.9, a6 = 0.4,
           a7 = 3.0;
    double operator()(double q, double s, double x, double iota) const {
        return a0 + a1 * iota + a2 * q + a3 * x + a4 * q * q + a5 * s * s +
               a6 * s * s * s + a7 * x * iota;
    }
    CriticFn fn() const {
        return [*this](const MatrixXd& pts) {
            VectorXd v(pts.rows());
            for (long r = 0; r < pts.rows(); ++r)
                v(r) = (*this)(pts(r, 1), pts(r, 2), pts(r, 3), pts(r, 4));
            return v;
        };
    }
};

double symbolic_operator(const PolyCritic& c, const RowVectorXd& st,
                         const ExchangeControls& ctl, const MarketParams& p,
                         const std::vector<DarkPoolSpec>& pools) {
    const double t = st(0), q = st(1), s = st(2), x = st(3), iota = st(4);
    const auto alloc = optimal_dark_alloc_exp(q, pools, ctl.c_d, p.rho, p.alpha, p.k_c);
    const double nu =
        optimal_lit_rate_exp(q, ctl.c_l, ctl.u, p, alloc.ell, pools, ctl.c_d);

    const double d_iota = c.a1 + c.a7 * x;
    const double d_q = c.a2 + 2.0 * c.a4 * q;
    const double d_s = 2.0 * c.a5 * s + 3.0 * c.a6 * s * s;
    const double d_x = c.a3 + c.a7 * iota;
    const double d_ss = 2.0 * c.a5 + 6.0 * c.a6 * s;

    const FeeVec fees{ctl.c_l, ctl.c_d};
    const double bracket = driver_h(t, q, ctl.z, ctl.u, nu, alloc.ell, fees, p, pools) -
                           (p.gamma * nu / p.sigma) * ctl.z;
    const double perm = p.gamma * nu + p.epsilon * p.lambda_rate;
    const double revenue = -ctl.c_l * (nu + p.lambda_rate) + p.kappa * perm;
    double value = revenue * d_iota + nu * d_q + perm * d_s -
                   ((s + p.eta * nu) * nu - ctl.c_l * nu) * d_x +
                   0.5 * p.sigma * p.sigma * d_ss + bracket;
    for (std::size_t i = 0; i < pools.size(); ++i) {
        const double cd = ctl.c_d[i];
        const double em = expected_fill(pools[i], alloc.ell[i], cd, p.k_c);
        const double em2 =
            2.0 * q * em - exp_min_linear_moment(pools[i], alloc.ell[i], cd, q, p.k_c);
        const double coeff_m = c.a1 * cd - c.a2 + c.a3 * s - 2.0 * c.a4 * q +
                               c.a7 * (x * cd + iota * s);
        const double coeff_m2 = c.a4 + c.a7 * s * cd;
        value += pools[i].theta * std::exp(p.k_theta * nu) *
                 (coeff_m * em + coeff_m2 * em2 - ctl.u[i]);
    }
    return value;
}

void criterion_8() {
    const ModelPreset t1 = load_preset("table1");
    TrainConfig cfg;
    cfg.epochs = 15000;
    cfg.dt = 0.02;
    cfg.tau = 0.1;
    cfg.lr_final = 5e-5;
    cfg.k_actor = 4;
    cfg.critic_inner = 10;
    cfg.actor_inner = 4;
    cfg.batch_size = 100;
    cfg.jump_quad_nodes = 4;
    cfg.seed = 7;

    // held-out batch, scored before and after training (8b)
    Rng hrng(808);
    const MatrixXd held = sample_batch(cfg, t1.params, hrng);
    Rng irng(mix_seed(cfg.seed, 0));
    nn::Critic c0;
    c0.init(irng);
    nn::Critic tgt0;
    tgt0.init(irng);
    nn::Actor a0;
    a0.init(2, t1.params.fee_cap, irng);
    c0.in_scale = input_scale(cfg, t1.params);
    a0.in_scale = c0.in_scale;
    nn::copy_into(tgt0, c0);
    const double loss0 =
        critic_loss(held, c0, tgt0, a0, t1.params, t1.pools, cfg).loss;

    TrainResult r = train(cfg, t1.params, t1.pools);
    const double loss1 =
        critic_loss(held, r.critic, r.target, r.actor, t1.params, t1.pools, cfg).loss;
    const bool ok_b = loss1 < 0.5 * loss0;

    // (a) fee range on sampled states
    Rng srng(809);
    MatrixXd states = sample_batch(cfg, t1.params, srng);
    for (int rep = 0; rep < 49; ++rep) {
        MatrixXd more = sample_batch(cfg, t1.params, srng);
        MatrixXd all(states.rows() + more.rows(), 5);
        all << states, more;
        states = all;
    }
    const auto controls = actor_controls(r.actor, states);
    bool ok_a = true;
    for (const auto& c : controls) {
        ok_a = ok_a && c.c_l >= 0.0 && c.c_l <= t1.params.fee_cap;
        for (double f : c.c_d)
            ok_a = ok_a && f >= 0.0 && f <= t1.params.fee_cap;
    }

    // (c) mean lit fee along the nominal depletion path
    MatrixXd nom(101, 5);
    for (int i = 0; i <= 100; ++i) {
        const double t = i / 100.0;
        nom.row(i) << t, 1.0 - 0.8 * t, 1.0 - 0.007 * t, 0.9 * t, 0.012 * t;
    }
    const auto nom_ctl = actor_controls(r.actor, nom);
    double mean_cl = 0.0;
    for (const auto& c : nom_ctl) mean_cl += c.c_l / 101.0;
    const bool ok_c = mean_cl >= 0.009;

    // (d) terminal residual relative to the mean revenue level
    Rng trng(810);
    MatrixXd term = sample_batch(cfg, t1.params, trng);
    term.col(0).setConstant(t1.params.T);
    const VectorXd vt = r.critic.forward(term, false);
    double abs_err = 0.0, mean_iota = 0.0;
    for (int i = 0; i < term.rows(); ++i) {
        abs_err += std::abs(vt(i) - term(i, 4)) / term.rows();
        mean_iota += term(i, 4) / term.rows();
    }
    const double term_rel = abs_err / mean_iota;
    const bool ok_d = term_rel < 0.10;

    // (e) operator vs symbolic polynomial oracle, O(h^2) in the FD step
    const PolyCritic pc;
    RowVectorXd st(5);
    st << 0.4, 0.8, 1.1, 0.7, 0.02;
    ExchangeControls ctl;
    ctl.c_l = 0.005;
    ctl.c_d = {0.002, 0.004};
    ctl.z = -0.01;
    ctl.u = {0.002, 0.001};
    TrainConfig ocfg = cfg;
    ocfg.jump_quad_nodes = 24;
    ocfg.fd_step = 1e-3;
    const double want = symbolic_operator(pc, st, ctl, t1.params, t1.pools);
    const double v_h = evaluate_operator(st, ctl, pc.fn(), t1.params, t1.pools, ocfg);
    ocfg.fd_step = 5e-4;
    const double v_h2 = evaluate_operator(st, ctl, pc.fn(), t1.params, t1.pools, ocfg);
    const double err_h = std::abs(v_h - want), err_h2 = std::abs(v_h2 - want);
    const bool ok_e = err_h < 1e-4 && std::abs(err_h / err_h2 - 4.0) < 0.6;

    report(8, ok_a && ok_b && ok_c && ok_d && ok_e,
           std::string("fee designer: (a) fees in range ") +
               (ok_a ? "yes" : "NO") + ", (b) loss " + fmt(loss0) + " -> " +
               fmt(loss1) + (ok_b ? "" : " INSUFFICIENT") + ", (c) mean lit fee " +
               fmt(mean_cl) + (ok_c ? "" : " < 0.009") + ", (d) terminal residual " +
               fmt(term_rel) + (ok_d ? "" : " >= 0.10") + ", (e) operator err " +
               fmt(err_h) + " ratio " + fmt(err_h / err_h2));
}

// ---------------------------------------------------------------- 9
// Piecewise-constant fee path: levels[k] on [breaks[k], breaks[k+1]).
FeeSchedule::Fee fee_steps(std::vector<double> breaks, std::vector<double> levels) {
    return [breaks, levels](double t, const ExchangeState&) {
        std::size_t k = 0;
        while (k + 1 < breaks.size() && t >= breaks[k + 1]) ++k;
        return levels[k];
    };
}

void criterion_9() {
    const ModelPreset t1 = load_preset("table1");
    SimConfig cfg;
    cfg.n_paths = 10000;
    cfg.n_steps = 1000;
    cfg.seed = 909;
    const double cap = t1.params.fee_cap;

    // stylized learned fee policy: constant lit fee at the cap; dark fees
    // ramp up to the cap by t = 0.6. With two pools the deeper pool starts
    // at twice the shallow pool's fee and the shallow pool stays near zero
    // until t = 0.3, both meeting the cap at t = 0.6.
    const std::vector<DarkPoolSpec> one_pool{t1.pools[0]};
    FeeSchedule m1_fees;
    m1_fees.lit_fee = fee_steps({0.0}, {cap});
    m1_fees.dark_fees.push_back(
        fee_steps({0.0, 0.2, 0.4, 0.6}, {0.0, cap / 3, 2 * cap / 3, cap}));
    g_m1_paths =
        simulate_regulated(cfg, t1.params, one_pool, m1_fees, ExposurePolicy::hedged());

    FeeSchedule m2_fees;
    m2_fees.lit_fee = fee_steps({0.0}, {cap});
    m2_fees.dark_fees.push_back(
        fee_steps({0.0, 0.2, 0.4, 0.6}, {cap / 4, cap / 2, 3 * cap / 4, cap}));
    m2_fees.dark_fees.push_back(
        fee_steps({0.0, 0.3, 0.45, 0.6}, {0.0, cap / 4, cap / 2, cap}));
    g_m2_ramp_paths = simulate_regulated(cfg, t1.params, t1.pools, m2_fees,
                                         ExposurePolicy::hedged());

    const ModelPreset t2 = load_preset("table2");
    MFGConfig grid;
    const MFGSolution eq = mfg_fixed_point(grid, t2.params, t2.pools);
    g_comp_paths = simulate_competitive(cfg, eq, t2.params, t2.pools);

    const auto m1 = summarize(extract_metric(g_m1_paths, "impact"));
    const auto m2 = summarize(extract_metric(g_m2_ramp_paths, "impact"));
    const auto co = summarize(extract_metric(g_comp_paths, "impact"));

    const bool ok_mode = std::abs(m1.mode + 0.007) < 0.3 * 0.007;
    const bool ok_center = std::abs(co.mean + 0.0074) < 0.3 * 0.0074;
    const bool ok_var = co.stddev > m1.stddev;
    const double shift = (m2.mode - m1.mode) / std::abs(m1.mode);
    const bool ok_shift = shift > 0.0 && std::abs(shift - 0.07) < 0.3 * 0.07;

    report(9, ok_mode && ok_center && ok_var && ok_shift,
           "impact targets: M1 mode " + fmt(m1.mode) + (ok_mode ? "" : " OFF") +
               ", competitive mean " + fmt(co.mean) + (ok_center ? "" : " OFF") +
               ", sd " + fmt(co.stddev) + " vs M1 sd " + fmt(m1.stddev) +
               (ok_var ? "" : " NOT WIDER") + ", M2 shift " + fmt(shift) +
               (ok_shift ? "" : " OFF"));
}

// ---------------------------------------------------------------- 10
std::string slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

void criterion_10() {
    dp_config* cfg = nullptr;
    bool ok = dp_config_create("table1", &cfg) == DP_OK;
    ok = ok && dp_config_apply(cfg,
                               "{\"sim\": {\"n_paths\": 500, \"n_steps\": 400, "
                               "\"seed\": 1010, \"record_trajectories\": true}}") ==
                   DP_OK;
    const std::string base =
        (std::filesystem::temp_directory_path() / "dp_acceptance").string();
    std::filesystem::remove_all(base);
    ok = ok && dp_simulate(cfg, (base + "/a").c_str()) == DP_OK;
    ok = ok && dp_simulate(cfg, (base + "/b").c_str()) == DP_OK;
    ok = ok && dp_solve_trader(cfg, (base + "/ta").c_str()) == DP_OK;
    ok = ok && dp_solve_trader(cfg, (base + "/tb").c_str()) == DP_OK;
    int files = 0;
    if (ok) {
        for (const char* name : {"paths.csv", "summary.csv", "impact_histogram.csv",
                                 "trajectory.csv", "manifest.json"}) {
            const std::string a = slurp(base + "/a/" + name);
            ok = ok && !a.empty() && a == slurp(base + "/b/" + name);
            ++files;
        }
        const std::string sa = slurp(base + "/ta/strategy.csv");
        ok = ok && !sa.empty() && sa == slurp(base + "/tb/strategy.csv");
        ++files;
    }
    dp_config_free(cfg);
    std::filesystem::remove_all(base);
    report(10, ok,
           "byte-identical artifacts across repeated runs (" +
               std::to_string(files) + " files compared)");
}

}  // namespace

int main() {
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_9();
    criterion_7();  // checks the paths simulated by criteria 6 and 9
    criterion_8();
    criterion_10();
    std::sort(g_lines.begin(), g_lines.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [num, line] : g_lines) std::printf("%s\n", line.c_str());
    if (g_failures > 0)
        std::printf("%d criterion(s) failed\n", g_failures);
    else
        std::printf("all criteria passed\n");
    return g_failures == 0 ? 0 : 1;
}
