#include "darkpool/sim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "darkpool/dynamics.hpp"
#include "darkpool/fill_law.hpp"
#include "darkpool/math_util.hpp"
#include "darkpool/rng.hpp"
#include "darkpool/trader.hpp"

namespace darkpool {

void SimConfig::validate() const {
    if (n_paths < 1) throw std::invalid_argument("sim: n_paths must be >= 1");
    if (n_steps < 1) throw std::invalid_argument("sim: n_steps must be >= 1");
    if (table_points < 2) throw std::invalid_argument("sim: table_points must be >= 2");
}

ExposurePolicy ExposurePolicy::constants(double z_val, const std::vector<double>& u_val) {
    ExposurePolicy e;
    e.hedge = false;
    e.state_free = true;
    e.z = [z_val](double, const ExchangeState&) { return z_val; };
    for (double u : u_val)
        e.u.push_back([u](double, const ExchangeState&) { return u; });
    return e;
}

namespace {

// Linear interpolation on a uniform grid over [0, q_max], clamped.
double interp(const std::vector<double>& table, double q, double q_max) {
    if (q_max <= 0.0) return table.front();
    const double n = static_cast<double>(table.size()) - 1.0;
    double x = q / q_max * n;
    x = std::clamp(x, 0.0, n);
    const long j = std::min(static_cast<long>(x), static_cast<long>(n) - 1);
    const double w = x - j;
    return (1.0 - w) * table[j] + w * table[j + 1];
}

// Pretabulated controls/exposures over a q grid, valid for constant fees and
// state-free or hedged exposures.
struct QTables {
    double q_max = 0.0;
    std::vector<double> nu, z, H;
    std::vector<std::vector<double>> ell, u;  // per pool
};

QTables build_tables(const SimConfig& cfg, const MarketParams& p,
                     const std::vector<DarkPoolSpec>& pools, double c_l,
                     const std::vector<double>& c_d, const ExposurePolicy& exposures) {
    const int M = static_cast<int>(pools.size());
    const int N = cfg.table_points;
    QTables tab;
    tab.q_max = p.Q0;
    tab.nu.resize(N);
    tab.z.resize(N);
    tab.H.resize(N);
    tab.ell.assign(M, std::vector<double>(N));
    tab.u.assign(M, std::vector<double>(N));

    ExchangeState dummy;
    dummy.trader = {0.0, p.Q0, p.S0, p.X0};
    for (int j = 0; j < N; ++j) {
        const double q = p.Q0 * j / (N - 1);
        std::vector<double> ell(M, 0.0);
        if (q > 0.0 && M > 0)
            ell = optimal_dark_alloc_exp(q, pools, c_d, p.rho, p.alpha, p.k_c).ell;
        std::vector<double> u(M, 0.0);
        for (int i = 0; i < M; ++i) {
            tab.ell[i][j] = ell[i];
            if (exposures.hedge) {
                const double ebar = exp_min_exponential_moment(
                    pools[i], ell[i], c_d[i], std::max(q, ell[i]), p.rho, p.alpha,
                    p.k_c);
                u[i] = std::log(ebar) / p.rho;
            } else {
                u[i] = exposures.u[i](0.0, dummy);
            }
            tab.u[i][j] = u[i];
        }
        const double z =
            exposures.hedge ? -p.sigma * q : exposures.z(0.0, dummy);
        tab.z[j] = z;
        tab.nu[j] = q > 0.0 ? optimal_lit_rate_exp(q, c_l, u, p, ell, pools, c_d) : 0.0;
        tab.H[j] = driver_h(0.0, q, z, u, tab.nu[j], ell, FeeVec{c_l, c_d}, p, pools);
    }
    return tab;
}

double sample_fill(const DarkPoolSpec& pool, double ell, double c_d, double k_c,
                   double u_size) {
    const double a =
        pool.support_eps - (pool.size_mean - pool.support_eps) * std::log1p(-u_size);
    return std::min(ell, a * std::exp(-k_c * c_d));
}

void record_step(Trajectory& traj, double t, const TraderState& st, double nu,
                 const std::vector<double>& ell, const std::vector<double>& fills,
                 double c_l, const std::vector<double>& c_d) {
    traj.t.push_back(t);
    traj.q.push_back(st.q);
    traj.s.push_back(st.s);
    traj.x.push_back(st.x);
    traj.nu.push_back(nu);
    traj.lit_fee.push_back(c_l);
    traj.ell.push_back(ell);
    traj.fills.push_back(fills);
    traj.dark_fee.push_back(c_d);
}

}  // namespace

std::vector<PathMetrics> simulate_regulated(const SimConfig& cfg, const MarketParams& p,
                                            const std::vector<DarkPoolSpec>& pools,
                                            const FeeSchedule& fees,
                                            const ExposurePolicy& exposures) {
    cfg.validate();
    p.validate();
    const int M = static_cast<int>(pools.size());
    if (!exposures.hedge &&
        (!exposures.z || static_cast<int>(exposures.u.size()) != M))
        throw std::invalid_argument("sim: exposure closures missing");
    if (static_cast<int>(fees.dark_fees.size()) != M)
        throw std::invalid_argument("sim: dark fee count must match pool count");

    const double dt = p.T / cfg.n_steps;
    const double lambda = p.lambda_rate;

    // fast path: state-independent fees and tabulatable exposures. Tables
    // are cached per distinct fee vector, so piecewise-constant schedules
    // (a handful of fee levels over time) stay cheap.
    ExchangeState probe;
    probe.trader = {0.0, p.Q0, p.S0, p.X0};
    const bool fast = fees.time_only && (exposures.hedge || exposures.state_free);
    std::map<std::vector<double>, QTables> table_cache;
    std::vector<double> cur_key;
    const QTables* tab = nullptr;

    std::vector<PathMetrics> out(cfg.n_paths);
    for (int path = 0; path < cfg.n_paths; ++path) {
        Rng rng(mix_seed(cfg.seed, static_cast<std::uint64_t>(path)));
        PathMetrics& m = out[path];
        m.dark_volume.assign(M, 0.0);

        ExchangeState st;
        st.trader = {0.0, p.Q0, p.S0, p.X0};
        double xi = cfg.y0;
        std::vector<double> c_d(M), ell(M), u(M), fills(M);

        for (int n = 0; n < cfg.n_steps; ++n) {
            const double t = n * dt;
            const double q = st.trader.q;

            // one diffusion and one (jump, size) uniform pair per pool per
            // step, drawn unconditionally so matched seeds stay coupled
            const double dW = std::sqrt(dt) * rng.gaussian();
            double z, H, nu;
            double c_l;
            if (fast) {
                c_l = fees.lit_fee(t, probe);
                for (int i = 0; i < M; ++i) c_d[i] = fees.dark_fees[i](t, probe);
                std::vector<double> key(1 + M);
                key[0] = c_l;
                for (int i = 0; i < M; ++i) key[1 + i] = c_d[i];
                if (tab == nullptr || key != cur_key) {
                    QTables& slot = table_cache[key];
                    if (slot.nu.empty())
                        slot = build_tables(cfg, p, pools, c_l, c_d, exposures);
                    tab = &slot;
                    cur_key = key;
                }
                for (int i = 0; i < M; ++i) {
                    ell[i] = interp(tab->ell[i], q, tab->q_max);
                    u[i] = interp(tab->u[i], q, tab->q_max);
                }
                nu = interp(tab->nu, q, tab->q_max);
                z = interp(tab->z, q, tab->q_max);
                H = interp(tab->H, q, tab->q_max);
            } else {
                c_l = fees.lit_fee(t, st);
                for (int i = 0; i < M; ++i) c_d[i] = fees.dark_fees[i](t, st);
                if (q > 0.0 && M > 0)
                    ell = optimal_dark_alloc_exp(q, pools, c_d, p.rho, p.alpha, p.k_c)
                              .ell;
                else
                    std::fill(ell.begin(), ell.end(), 0.0);
                for (int i = 0; i < M; ++i) {
                    if (exposures.hedge) {
                        const double ebar = exp_min_exponential_moment(
                            pools[i], ell[i], c_d[i], std::max(q, ell[i]), p.rho,
                            p.alpha, p.k_c);
                        u[i] = std::log(ebar) / p.rho;
                    } else {
                        u[i] = exposures.u[i](t, st);
                    }
                }
                z = exposures.hedge ? -p.sigma * q : exposures.z(t, st);
                nu = q > 0.0 ? optimal_lit_rate_exp(q, c_l, u, p, ell, pools, c_d)
                             : 0.0;
                H = driver_h(t, q, z, u, nu, ell, FeeVec{c_l, c_d}, p, pools);
            }

            // interpolation can leave the allocation a hair above the budget
            double ell_sum = 0.0;
            for (double l : ell) ell_sum += l;
            if (ell_sum > q && ell_sum > 0.0)
                for (double& l : ell) l *= q / ell_sum;

            double q_rem = q;
            double xi_jumps = 0.0;
            const double arrival_gain = std::exp(p.k_theta * nu);
            for (int i = 0; i < M; ++i) {
                const double u_jump = rng.uniform();
                const double u_size = rng.uniform();
                const bool jump = u_jump < pools[i].theta * arrival_gain * dt;
                double fill = 0.0;
                if (jump) {
                    fill = sample_fill(pools[i], ell[i], c_d[i], p.k_c, u_size);
                    if (fill > q_rem) {
                        fill = q_rem;
                        ++m.clamp_events;
                    }
                    q_rem -= fill;
                }
                fills[i] = fill;
                m.dark_volume[i] += fill;
                xi_jumps += u[i] * ((jump ? 1.0 : 0.0) - pools[i].theta * dt);
            }

            // cap the executed lit rate at the remaining inventory so mass
            // is conserved exactly on every path
            double nu_exec = nu;
            if (nu_exec * dt < -q_rem) {
                nu_exec = -q_rem / dt;
                ++m.clamp_events;
            }

            ControlPair ctl;
            ctl.nu = nu_exec;
            ctl.ell = ell;
            m.exchange_pnl +=
                exchange_pnl_step(st, ctl, fills, c_d, c_l, lambda, dt, p);
            m.permanent_impact += (p.gamma * nu_exec + p.epsilon * lambda) * dt;
            m.lit_volume += -nu_exec * dt;
            m.mean_lit_fee += c_l / cfg.n_steps;
            m.running_penalty += p.phi * q * q * dt;
            // the BSDE exposure z rides the price Brownian, whose measure
            // carries the permanent-impact drift: the paid rate is
            // h - (gamma nu / sigma) z
            const double z_drift =
                p.sigma > 0.0 ? p.gamma * nu_exec / p.sigma * z : 0.0;
            xi += -(H - z_drift) * dt + z * dW + xi_jumps;

            if (cfg.record_trajectories)
                record_step(m.traj, t, st.trader, nu_exec, ell, fills, c_l, c_d);

            st.trader = step_state(st.trader, ctl, fills, c_l, lambda, dt, dW, p);
            st.iota = m.exchange_pnl;
        }
        m.xi = xi;
        m.terminal_inventory = st.trader.q;
        m.terminal_price = st.trader.s;
        m.terminal_cash = st.trader.x;
        m.terminal_wealth =
            st.trader.x + st.trader.q * (st.trader.s - p.alpha * st.trader.q);
    }
    return out;
}

std::vector<PathMetrics> simulate_competitive(const SimConfig& cfg,
                                              const MFGSolution& eq,
                                              const MarketParams& p,
                                              const std::vector<DarkPoolSpec>& pools) {
    cfg.validate();
    p.validate();
    const int M = static_cast<int>(pools.size());
    const double dt = p.T / cfg.n_steps;
    const int n_mu = static_cast<int>(eq.minor.mu.size());
    if (n_mu < 2) throw std::invalid_argument("sim: equilibrium mu path missing");

    const auto mu_at = [&](double t) {
        double x = t / p.T * (n_mu - 1);
        x = std::clamp(x, 0.0, static_cast<double>(n_mu - 1));
        const long j = std::min(static_cast<long>(x), static_cast<long>(n_mu) - 2);
        const double w = x - j;
        return (1.0 - w) * eq.minor.mu[j] + w * eq.minor.mu[j + 1];
    };

    std::vector<PathMetrics> out(cfg.n_paths);
    for (int path = 0; path < cfg.n_paths; ++path) {
        Rng rng(mix_seed(cfg.seed, static_cast<std::uint64_t>(path)));
        PathMetrics& m = out[path];
        m.dark_volume.assign(M, 0.0);

        TraderState st{0.0, p.Q0, p.S0, p.X0};
        std::vector<double> ell(M), fills(M);

        for (int n = 0; n < cfg.n_steps; ++n) {
            const double t = n * dt;
            const double q = st.q;
            const double dW = std::sqrt(dt) * rng.gaussian();

            double nu = std::min(0.0, eq.major.lookup(eq.major.nu0, t, q));
            if (q <= 0.0) nu = 0.0;
            double ell_sum = 0.0;
            for (int i = 0; i < M; ++i) {
                ell[i] = std::max(0.0, eq.major.lookup(eq.major.ell0[i], t, q));
                ell_sum += ell[i];
            }
            if (ell_sum > std::max(q, 0.0) && ell_sum > 0.0)
                for (double& l : ell) l *= std::max(q, 0.0) / ell_sum;

            double q_rem = std::max(q, 0.0);
            for (int i = 0; i < M; ++i) {
                const double u_jump = rng.uniform();
                const double u_size = rng.uniform();
                double fill = 0.0;
                if (u_jump < pools[i].theta * dt) {
                    fill = sample_fill(pools[i], ell[i], 0.0, p.k_c, u_size);
                    if (fill > q_rem) {
                        fill = q_rem;
                        ++m.clamp_events;
                    }
                    q_rem -= fill;
                }
                fills[i] = fill;
                m.dark_volume[i] += fill;
            }

            double nu_exec = nu;
            if (nu_exec * dt < -q_rem) {
                nu_exec = -q_rem / dt;
                ++m.clamp_events;
            }

            const double drift = p.gamma0 * nu_exec + p.gamma * mu_at(t);
            m.permanent_impact += drift * dt;
            m.lit_volume += -nu_exec * dt;

            if (cfg.record_trajectories) {
                record_step(m.traj, t, st, nu_exec, ell, fills, 0.0,
                            std::vector<double>(M, 0.0));
            }

            double dark = 0.0, revenue = 0.0;
            for (double f : fills) {
                dark += f;
                revenue += st.s * f;
            }
            st.x += -(st.s + p.eta0 * nu_exec) * nu_exec * dt + revenue;
            st.q = st.q + nu_exec * dt - dark;
            st.s = st.s + drift * dt + p.sigma * dW;
            st.t += dt;
        }
        m.terminal_inventory = st.q;
        m.terminal_price = st.s;
        m.terminal_cash = st.x;
        m.terminal_wealth = st.x + st.q * (st.s - p.alpha0 * st.q);
    }
    return out;
}

SummaryStats summarize(const std::vector<double>& samples) {
    if (samples.empty()) throw std::invalid_argument("summarize: empty collection");
    SummaryStats s;
    s.count = static_cast<long>(samples.size());
    std::vector<double> sorted = samples;
    std::sort(sorted.begin(), sorted.end());
    s.min = sorted.front();
    s.max = sorted.back();

    double mean = 0.0;
    for (double v : sorted) mean += v;
    mean /= s.count;
    s.mean = mean;
    double ss = 0.0;
    for (double v : sorted) ss += (v - mean) * (v - mean);
    s.stddev = s.count > 1 ? std::sqrt(ss / (s.count - 1)) : 0.0;

    const auto quantile = [&](double u) {
        const double x = u * (s.count - 1);
        const long j = std::min(static_cast<long>(x), s.count - 2 >= 0 ? s.count - 2 : 0);
        const double w = x - j;
        return s.count > 1 ? (1.0 - w) * sorted[j] + w * sorted[j + 1] : sorted[0];
    };
    s.q25 = quantile(0.25);
    s.q75 = quantile(0.75);

    const auto bins = histogram(samples, 64);
    long best = -1;
    for (const auto& b : bins)
        if (b.count > best) {
            best = b.count;
            s.mode = 0.5 * (b.left + b.right);
        }
    return s;
}

std::vector<HistogramBin> histogram(const std::vector<double>& samples, int n_bins) {
    if (samples.empty()) throw std::invalid_argument("histogram: empty collection");
    if (n_bins < 1) throw std::invalid_argument("histogram: bins must be >= 1");
    double lo = samples[0], hi = samples[0];
    for (double v : samples) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (hi == lo) hi = lo + 1.0;  // degenerate range: everything in bin 0
    std::vector<HistogramBin> bins(n_bins);
    const double w = (hi - lo) / n_bins;
    for (int b = 0; b < n_bins; ++b) {
        bins[b].left = lo + b * w;
        bins[b].right = lo + (b + 1) * w;
    }
    for (double v : samples) {
        int b = static_cast<int>((v - lo) / w);
        b = std::clamp(b, 0, n_bins - 1);
        ++bins[b].count;
    }
    return bins;
}

std::vector<double> extract_metric(const std::vector<PathMetrics>& metrics,
                                   const std::string& name) {
    std::vector<double> v;
    v.reserve(metrics.size());
    for (const PathMetrics& m : metrics) {
        if (name == "impact")
            v.push_back(m.permanent_impact);
        else if (name == "terminal_inventory")
            v.push_back(m.terminal_inventory);
        else if (name == "terminal_price")
            v.push_back(m.terminal_price);
        else if (name == "terminal_wealth")
            v.push_back(m.terminal_wealth);
        else if (name == "lit_volume")
            v.push_back(m.lit_volume);
        else if (name == "xi")
            v.push_back(m.xi);
        else if (name == "exchange_pnl")
            v.push_back(m.exchange_pnl);
        else if (name == "mean_lit_fee")
            v.push_back(m.mean_lit_fee);
        else if (name.rfind("dark_volume_", 0) == 0)
            v.push_back(m.dark_volume.at(std::stoul(name.substr(12))));
        else
            throw std::invalid_argument("unknown metric: " + name);
    }
    return v;
}

namespace {
std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}
}  // namespace

void write_paths_csv(const std::string& path, const std::vector<PathMetrics>& metrics) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path);
    const std::size_t M = metrics.empty() ? 0 : metrics[0].dark_volume.size();
    os << "path,impact,terminal_inventory,terminal_price,terminal_cash,"
          "terminal_wealth,lit_volume";
    for (std::size_t i = 0; i < M; ++i) os << ",dark_volume_" << i;
    os << ",xi,exchange_pnl,mean_lit_fee,clamp_events\n";
    for (std::size_t k = 0; k < metrics.size(); ++k) {
        const PathMetrics& m = metrics[k];
        os << k << "," << fmt(m.permanent_impact) << "," << fmt(m.terminal_inventory)
           << "," << fmt(m.terminal_price) << "," << fmt(m.terminal_cash) << ","
           << fmt(m.terminal_wealth) << "," << fmt(m.lit_volume);
        for (std::size_t i = 0; i < M; ++i) os << "," << fmt(m.dark_volume[i]);
        os << "," << fmt(m.xi) << "," << fmt(m.exchange_pnl) << ","
           << fmt(m.mean_lit_fee) << "," << m.clamp_events << "\n";
    }
}

void write_summary_csv(const std::string& path,
                       const std::vector<std::pair<std::string, SummaryStats>>& rows) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path);
    os << "metric,count,mean,stddev,mode,q25,q75,min,max\n";
    for (const auto& [name, s] : rows)
        os << name << "," << s.count << "," << fmt(s.mean) << "," << fmt(s.stddev)
           << "," << fmt(s.mode) << "," << fmt(s.q25) << "," << fmt(s.q75) << ","
           << fmt(s.min) << "," << fmt(s.max) << "\n";
}

void write_histogram_csv(const std::string& path,
                         const std::vector<HistogramBin>& bins) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path);
    os << "bin_left,bin_right,count\n";
    for (const auto& b : bins)
        os << fmt(b.left) << "," << fmt(b.right) << "," << b.count << "\n";
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path);
    const std::size_t M = traj.ell.empty() ? 0 : traj.ell[0].size();
    os << "t,q,s,x,nu,lit_fee";
    for (std::size_t i = 0; i < M; ++i)
        os << ",ell_" << i << ",fill_" << i << ",dark_fee_" << i;
    os << "\n";
    for (std::size_t n = 0; n < traj.t.size(); ++n) {
        os << fmt(traj.t[n]) << "," << fmt(traj.q[n]) << "," << fmt(traj.s[n]) << ","
           << fmt(traj.x[n]) << "," << fmt(traj.nu[n]) << "," << fmt(traj.lit_fee[n]);
        for (std::size_t i = 0; i < M; ++i)
            os << "," << fmt(traj.ell[n][i]) << "," << fmt(traj.fills[n][i]) << ","
               << fmt(traj.dark_fee[n][i]);
        os << "\n";
    }
}

}  // namespace darkpool
