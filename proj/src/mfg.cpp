#include "darkpool/mfg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "darkpool/fill_law.hpp"
#include "darkpool/math_util.hpp"

namespace darkpool {

double riccati_h2(double t, double alpha, double eta, double T) {
    if (t < 0.0 || t > T + 1e-12) throw std::invalid_argument("riccati_h2: t outside [0,T]");
    return -alpha * eta / (eta + alpha * (T - t));
}

MinorBvpResult solve_minor_bvp(const std::vector<double>& nu0_path,
                               const MarketParams& p, double E0, double T) {
    const int n = static_cast<int>(nu0_path.size()) - 1;
    if (n < 3) throw std::invalid_argument("solve_minor_bvp: grid too small");
    const double dt = T / n;

    // Thomas sweep in the form E_k = pp_k + qq_k E_{k+1}.
    std::vector<double> pp(n + 1), qq(n + 1);
    pp[0] = E0;
    qq[0] = 0.0;
    const double a = 2.0 * p.eta / (dt * dt) - p.gamma / (2.0 * dt);
    const double b = -4.0 * p.eta / (dt * dt);
    const double c = 2.0 * p.eta / (dt * dt) + p.gamma / (2.0 * dt);
    for (int k = 1; k < n; ++k) {
        const double d = -p.gamma0 * nu0_path[k];
        const double den = b + a * qq[k - 1];
        if (std::abs(den) < 1e-300)
            throw std::runtime_error("solve_minor_bvp: singular tridiagonal system");
        pp[k] = (d - a * pp[k - 1]) / den;
        qq[k] = -c / den;
    }

    // Robin row (second-order one-sided):
    // (3 E_n - 4 E_{n-1} + E_{n-2}) / (2 dt) + (alpha/eta) E_n = 0.
    const double robin = 3.0 + 2.0 * dt * p.alpha / p.eta;
    const double coef =
        robin - 4.0 * qq[n - 1] + qq[n - 2] * qq[n - 1];
    const double rhs = 4.0 * pp[n - 1] - pp[n - 2] - qq[n - 2] * pp[n - 1];
    if (std::abs(coef) < 1e-300)
        throw std::runtime_error("solve_minor_bvp: singular terminal row");

    MinorBvpResult out;
    out.E.assign(n + 1, 0.0);
    out.E[n] = rhs / coef;
    for (int k = n - 1; k >= 0; --k) out.E[k] = pp[k] + qq[k] * out.E[k + 1];

    out.mu.assign(n + 1, 0.0);
    for (int k = 1; k < n; ++k) out.mu[k] = (out.E[k + 1] - out.E[k - 1]) / (2.0 * dt);
    out.mu[0] = (-3.0 * out.E[0] + 4.0 * out.E[1] - out.E[2]) / (2.0 * dt);
    out.mu[n] = (3.0 * out.E[n] - 4.0 * out.E[n - 1] + out.E[n - 2]) / (2.0 * dt);
    return out;
}

H1H0 recover_h1_h0(const std::vector<double>& E, const std::vector<double>& h2,
                   const MarketParams& p, double T) {
    const int n = static_cast<int>(E.size()) - 1;
    if (h2.size() != E.size()) throw std::invalid_argument("recover_h1_h0: grid mismatch");
    const double dt = T / n;
    std::vector<double> mu(n + 1);
    for (int k = 1; k < n; ++k) mu[k] = (E[k + 1] - E[k - 1]) / (2.0 * dt);
    mu[0] = (-3.0 * E[0] + 4.0 * E[1] - E[2]) / (2.0 * dt);
    mu[n] = (3.0 * E[n] - 4.0 * E[n - 1] + E[n - 2]) / (2.0 * dt);

    H1H0 out;
    out.h1.resize(n + 1);
    for (int k = 0; k <= n; ++k) out.h1[k] = 2.0 * p.eta * mu[k] - 2.0 * h2[k] * E[k];
    out.h0.assign(n + 1, 0.0);
    for (int k = n - 1; k >= 0; --k) {
        const double g0 = out.h1[k] * out.h1[k] / (4.0 * p.eta);
        const double g1 = out.h1[k + 1] * out.h1[k + 1] / (4.0 * p.eta);
        out.h0[k] = out.h0[k + 1] + 0.5 * dt * (g0 + g1);
    }
    return out;
}

namespace {

// Piecewise-linear density on a uniform grid, with exact interval mass and
// first-moment integrals (used to transport m0 without discretization leaks).
struct PiecewiseLinear {
    const std::vector<double>& v;
    double q_max;
    double step;

    double value(double x) const {
        if (x < 0.0 || x > q_max) return 0.0;
        const double r = x / step;
        const int j = std::min(static_cast<int>(r), static_cast<int>(v.size()) - 2);
        const double w = r - j;
        return v[j] * (1.0 - w) + v[j + 1] * w;
    }

    template <bool kMoment>
    double integral(double a, double b) const {
        a = std::max(a, 0.0);
        b = std::min(b, q_max);
        if (b <= a) return 0.0;
        double total = 0.0;
        int j0 = std::max(0, static_cast<int>(a / step));
        int j1 = std::min(static_cast<int>(v.size()) - 2, static_cast<int>(b / step));
        for (int j = j0; j <= j1; ++j) {
            const double x1 = std::max(a, j * step);
            const double x2 = std::min(b, (j + 1) * step);
            if (x2 <= x1) continue;
            const double f1 = value(x1), f2 = value(x2);
            if constexpr (kMoment) {
                const double xm = 0.5 * (x1 + x2);
                total += (x2 - x1) / 6.0 *
                         (x1 * f1 + 4.0 * xm * value(xm) + x2 * f2);
            } else {
                total += 0.5 * (f1 + f2) * (x2 - x1);
            }
        }
        return total;
    }

    double mass(double a, double b) const { return integral<false>(a, b); }
    double moment(double a, double b) const { return integral<true>(a, b); }
};

}  // namespace

PushforwardResult fp_pushforward(const std::vector<double>& A_path,
                                 const std::vector<double>& B_path,
                                 const std::vector<double>& m0, double q_max, double T,
                                 const std::vector<double>& snapshot_times) {
    const int n = static_cast<int>(B_path.size()) - 1;
    if (A_path.size() != B_path.size())
        throw std::invalid_argument("fp_pushforward: path size mismatch");
    if (m0.size() < 2) throw std::invalid_argument("fp_pushforward: m0 too small");
    const double dt = T / n;
    const double q_step = q_max / (static_cast<int>(m0.size()) - 1);
    const PiecewiseLinear density{m0, q_max, q_step};
    const double E0 = density.moment(0.0, q_max);

    PushforwardResult out;
    out.Phi.assign(n + 1, 1.0);
    out.psi.assign(n + 1, 0.0);
    out.E.assign(n + 1, E0);
    double log_phi = 0.0, a_over_phi = 0.0;
    for (int k = 1; k <= n; ++k) {
        log_phi += 0.5 * dt * (B_path[k - 1] + B_path[k]);
        out.Phi[k] = std::exp(log_phi);
        if (!(out.Phi[k] > 0.0) || !std::isfinite(out.Phi[k]))
            throw std::runtime_error("fp_pushforward: flow underflow");
        a_over_phi +=
            0.5 * dt * (A_path[k - 1] / out.Phi[k - 1] + A_path[k] / out.Phi[k]);
        out.psi[k] = out.Phi[k] * a_over_phi;
        out.E[k] = out.Phi[k] * E0 + out.psi[k];
    }

    for (double t : snapshot_times) {
        const int k = std::clamp(static_cast<int>(std::lround(t / dt)), 0, n);
        DensitySnapshot snap;
        snap.t = k * dt;
        const double phi = out.Phi[k], psi = out.psi[k];
        const int m = static_cast<int>(m0.size());
        snap.density.assign(m, 0.0);
        for (int j = 0; j < m; ++j) {
            // cell [q_j - dq/2, q_j + dq/2]; edge cells absorb the overflow so
            // the transported mass telescopes exactly.
            double lo = j == 0 ? -1e30 : (j - 0.5) * q_step;
            double hi = j == m - 1 ? 1e30 : (j + 0.5) * q_step;
            const double pre_lo = (lo - psi) / phi, pre_hi = (hi - psi) / phi;
            const double cell_mass = density.mass(pre_lo, pre_hi);
            snap.density[j] = cell_mass / q_step;
            snap.mass += cell_mass;
            snap.moment += phi * density.moment(pre_lo, pre_hi) + psi * cell_mass;
        }
        out.snapshots.push_back(std::move(snap));
    }
    return out;
}

std::vector<double> default_minor_density(double E0, double q_max, int n_q) {
    std::vector<double> m0(n_q + 1);
    const double sd = 0.05, q_step = q_max / n_q;
    for (int j = 0; j <= n_q; ++j) {
        const double z = (j * q_step - E0) / sd;
        m0[j] = std::exp(-0.5 * z * z);
    }
    const PiecewiseLinear pl{m0, q_max, q_step};
    const double mass = pl.mass(0.0, q_max);
    for (double& v : m0) v /= mass;
    return m0;
}

namespace {

double interp_slice(const std::vector<double>& slice, double x, double q_step,
                    double q_max) {
    x = std::clamp(x, 0.0, q_max);
    const double r = x / q_step;
    const int j = std::min(static_cast<int>(r), static_cast<int>(slice.size()) - 2);
    const double w = r - j;
    return slice[j] * (1.0 - w) + slice[j + 1] * w;
}

// Root of the (nonincreasing) marginal d_q h0 on the grid; values below the
// grid floor return 0, everywhere-negative marginals return -inf semantics
// via a negative sentinel.
double dark_threshold(const std::vector<double>& dqh, double q_step) {
    const int n = static_cast<int>(dqh.size()) - 1;
    for (int j = 0; j < n; ++j)
        if (dqh[j + 1] > dqh[j] + 1e-6)
            throw std::runtime_error("major_dark_alloc: non-monotone marginal grid");
    if (dqh[0] <= 0.0) return -1.0;  // sell everything available
    for (int j = 0; j < n; ++j) {
        if (dqh[j + 1] <= 0.0) {
            const double w = dqh[j] / (dqh[j] - dqh[j + 1]);
            return (j + w) * q_step;
        }
    }
    return n * q_step;  // marginal positive everywhere: post nothing
}

}  // namespace

std::vector<double> major_dark_alloc(double q, const std::vector<double>& dqh_slice,
                                     double q_step,
                                     const std::vector<DarkPoolSpec>& pools) {
    const std::size_t m = pools.size();
    std::vector<double> ell(m, 0.0);
    if (q <= 0.0 || m == 0) return ell;
    const double q_max = (static_cast<double>(dqh_slice.size()) - 1.0) * q_step;
    const double b = dark_threshold(dqh_slice, q_step);

    if (m == 1) {
        ell[0] = std::min(q, std::max(0.0, q - std::max(b, 0.0)));
        if (b < 0.0) ell[0] = q;
        return ell;
    }

    // marginal gain of pool i at posted volume l
    const auto gain = [&](std::size_t i, double l) {
        const double slope = interp_slice(dqh_slice, q - l, q_step, q_max);
        return pools[i].theta * (1.0 - dark_liquidity_cdf(pools[i], 0.0, l, 0.0)) *
               (-slope);
    };
    const auto ell_at = [&](double level) {
        std::vector<double> e(m, 0.0);
        for (std::size_t i = 0; i < m; ++i) {
            if (gain(i, 0.0) <= level) continue;
            if (gain(i, q) >= level) {
                e[i] = q;
                continue;
            }
            e[i] = bisect_decreasing([&](double l) { return gain(i, l); }, 0.0, q,
                                     level, 60);
        }
        return e;
    };

    // unconstrained allocations at level ~ 0
    std::vector<double> free = ell_at(1e-14);
    double total = 0.0;
    for (double l : free) total += l;
    if (total <= q) return free;

    double hi = 0.0;
    for (std::size_t i = 0; i < m; ++i) hi = std::max(hi, gain(i, 0.0));
    double lo = 0.0;
    for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        const std::vector<double> e = ell_at(mid);
        double s = 0.0;
        for (double l : e) s += l;
        if (s > q)
            lo = mid;
        else
            hi = mid;
    }
    return ell_at(0.5 * (lo + hi));
}

double MajorValue::lookup(const std::vector<std::vector<double>>& table, double t,
                          double q) const {
    const int nt = static_cast<int>(table.size()) - 1;
    const int nq = static_cast<int>(table[0].size()) - 1;
    const double rt = std::clamp(t / t_step, 0.0, static_cast<double>(nt));
    const double rq = std::clamp(q / q_step, 0.0, static_cast<double>(nq));
    const int i = std::min(static_cast<int>(rt), nt - 1);
    const int j = std::min(static_cast<int>(rq), nq - 1);
    const double wt = rt - i, wq = rq - j;
    return table[i][j] * (1.0 - wt) * (1.0 - wq) + table[i][j + 1] * (1.0 - wt) * wq +
           table[i + 1][j] * wt * (1.0 - wq) + table[i + 1][j + 1] * wt * wq;
}

MajorValue solve_major_hjb(const std::vector<double>& mu_path, const MarketParams& p,
                           const std::vector<DarkPoolSpec>& pools,
                           const MFGConfig& grid) {
    const int nt = grid.n_time, nq = grid.n_q;
    if (static_cast<int>(mu_path.size()) != nt + 1)
        throw std::invalid_argument("solve_major_hjb: mu path size mismatch");
    const double dt = p.T / nt, dq = grid.q_max / nq;
    static const GaussLegendre gl(32);

    MajorValue out;
    out.t_step = dt;
    out.q_step = dq;
    out.h0_grid.assign(nt + 1, std::vector<double>(nq + 1, 0.0));
    out.nu0.assign(nt + 1, std::vector<double>(nq + 1, 0.0));
    out.ell0.assign(pools.size(),
                    std::vector<std::vector<double>>(nt + 1, std::vector<double>(nq + 1, 0.0)));
    out.b.assign(nt + 1, 0.0);

    for (int j = 0; j <= nq; ++j) {
        const double q = j * dq;
        out.h0_grid[nt][j] = -p.alpha0 * q * q;
    }

    std::vector<double> slope(nq + 1);
    for (int n = nt - 1; n >= 0; --n) {
        const std::vector<double>& next = out.h0_grid[n + 1];
        std::vector<double>& cur = out.h0_grid[n];

        for (int j = 1; j <= nq; ++j) slope[j] = (next[j] - next[j - 1]) / dq;
        slope[0] = (next[1] - next[0]) / dq;
        const double b = dark_threshold(slope, dq);
        out.b[n] = b;

        for (int j = 0; j <= nq; ++j) {
            const double q = j * dq;
            double nu = j == 0 ? 0.0
                               : negative_part((slope[j] + p.gamma0 * q) /
                                               (2.0 * p.eta0));
            if (std::abs(nu) * dt / dq > 1.0)
                throw std::runtime_error(
                    "solve_major_hjb: CFL violation |nu| dt/dq > 1; increase n_q "
                    "or n_time");
            out.nu0[n][j] = nu;

            double rhs = -p.phi * q * q - p.eta0 * nu * nu +
                         (slope[j] + p.gamma0 * q) * nu + p.gamma * mu_path[n] * q;

            // dark jump gain, threshold rule per pool
            std::vector<double> ell;
            if (pools.size() == 1) {
                ell.assign(1, b < 0.0 ? q : std::min(q, std::max(0.0, q - b)));
            } else if (!pools.empty()) {
                ell = major_dark_alloc(q, slope, dq, pools);
            }
            const double hq = next[j];
            for (std::size_t i = 0; i < pools.size(); ++i) {
                out.ell0[i][n][j] = ell[i];
                const double l = ell[i];
                if (l <= 0.0) continue;
                const double fl = dark_liquidity_cdf(pools[i], 0.0, l, 0.0);
                // integrate in the quantile variable: the exponential size law
                // concentrates near zero, which equally spaced nodes miss.
                const double damp = 1.0;
                const double s0 = pools[i].support_eps * damp;
                const double scale = (pools[i].size_mean - pools[i].support_eps) * damp;
                double body = 0.0;
                if (fl > 0.0) {
                    for (int g = 0; g < 32; ++g) {
                        const double u = 0.5 * fl * (gl.x[g] + 1.0);
                        const double x = s0 - scale * std::log1p(-u);
                        body += gl.w[g] *
                                (interp_slice(next, q - x, dq, grid.q_max) - hq);
                    }
                    body *= 0.5 * fl;
                }
                const double tail =
                    (1.0 - fl) * (interp_slice(next, q - l, dq, grid.q_max) - hq);
                rhs += pools[i].theta * (body + tail);
            }
            cur[j] = next[j] + dt * rhs;
        }
    }
    // terminal-row controls (for interpolation completeness)
    out.nu0[nt] = out.nu0[nt - 1];
    out.b[nt] = out.b[nt - 1];
    for (std::size_t i = 0; i < pools.size(); ++i) out.ell0[i][nt] = out.ell0[i][nt - 1];
    return out;
}

MFGSolution mfg_fixed_point(const MFGConfig& config, const MarketParams& p,
                            const std::vector<DarkPoolSpec>& pools) {
    const int nt = config.n_time;
    const double dt = p.T / nt;
    std::vector<double> mu =
        config.mu_init.empty() ? std::vector<double>(nt + 1, 0.0) : config.mu_init;
    if (static_cast<int>(mu.size()) != nt + 1)
        throw std::invalid_argument("mfg_fixed_point: mu_init size mismatch");

    MFGSolution sol;
    for (int iter = 0; iter < config.max_iters; ++iter) {
        sol.major = solve_major_hjb(mu, p, pools, config);

        // major expected inventory and the lit-rate path along it
        sol.Q0bar.assign(nt + 1, p.Q0);
        std::vector<double> nu0_path(nt + 1, 0.0);
        for (int n = 0; n < nt; ++n) {
            const double t = n * dt, q = sol.Q0bar[n];
            const double nu = sol.major.lookup(sol.major.nu0, t, q);
            nu0_path[n] = nu;
            double drain = 0.0;
            for (std::size_t i = 0; i < pools.size(); ++i) {
                const double l = sol.major.lookup(sol.major.ell0[i], t, q);
                drain += pools[i].theta * expected_fill(pools[i], std::min(l, q), 0.0, 0.0);
            }
            sol.Q0bar[n + 1] = std::max(0.0, q + (nu - drain) * dt);
        }
        nu0_path[nt] = sol.major.lookup(sol.major.nu0, p.T, sol.Q0bar[nt]);

        const MinorBvpResult bvp = solve_minor_bvp(nu0_path, p, p.E0, p.T);
        double delta = 0.0;
        for (int n = 0; n <= nt; ++n)
            delta = std::max(delta, std::abs(bvp.mu[n] - mu[n]));
        for (int n = 0; n <= nt; ++n)
            mu[n] = (1.0 - config.omega) * mu[n] + config.omega * bvp.mu[n];
        sol.iterations = iter + 1;
        sol.residual = config.omega * delta;
        sol.residual_history.push_back(sol.residual);
        sol.minor.E = bvp.E;
        sol.minor.mu = mu;
        if (sol.residual < config.tol) {
            sol.converged = true;
            break;
        }
    }

    // assemble the minor value coefficients and the transported density
    sol.minor.h2.resize(nt + 1);
    for (int n = 0; n <= nt; ++n)
        sol.minor.h2[n] = riccati_h2(n * dt, p.alpha, p.eta, p.T);
    const H1H0 rec = recover_h1_h0(sol.minor.E, sol.minor.h2, p, p.T);
    sol.minor.h1 = rec.h1;
    sol.minor.h0 = rec.h0;

    std::vector<double> a_path(nt + 1), b_path(nt + 1);
    for (int n = 0; n <= nt; ++n) {
        a_path[n] = sol.minor.h1[n] / (2.0 * p.eta);
        b_path[n] = sol.minor.h2[n] / p.eta;
    }
    std::vector<double> snaps = config.snapshot_times;
    if (snaps.empty()) snaps = {0.0, 0.25 * p.T, 0.5 * p.T, 0.75 * p.T, p.T};
    sol.minor.flow =
        fp_pushforward(a_path, b_path, default_minor_density(p.E0, config.q_max, config.n_q),
                       config.q_max, p.T, snaps);
    return sol;
}

}  // namespace darkpool
