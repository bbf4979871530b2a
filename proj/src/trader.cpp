#include "darkpool/trader.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "darkpool/math_util.hpp"
#include "darkpool/rng.hpp"

namespace darkpool {

namespace {

void check_pool_sizes(const std::vector<DarkPoolSpec>& pools,
                      const std::vector<double>& fees) {
    if (fees.size() != pools.size())
        throw std::invalid_argument("dark fee vector size must match pool count");
}

// Equal-marginal allocation: bisect on the common marginal level theta_hat,
// with a monotone inner root-find per pool. `marginal(i, ell)` must be
// strictly decreasing in ell on [0, q].
template <typename Marginal>
AllocationResult equal_marginal_alloc(double q, std::size_t n_pools,
                                      Marginal&& marginal, bool budget_binds) {
    AllocationResult out;
    out.ell.assign(n_pools, 0.0);
    if (q <= 0.0 || n_pools == 0) return out;
    if (n_pools == 1) {
        out.ell[0] = q;
        return out;
    }

    const auto ell_at = [&](double level) {
        std::vector<double> ell(n_pools);
        for (std::size_t i = 0; i < n_pools; ++i) {
            if (marginal(i, 0.0) <= level) {
                ell[i] = 0.0;
            } else if (marginal(i, q) >= level) {
                ell[i] = q;
            } else {
                ell[i] = bisect_decreasing([&](double l) { return marginal(i, l); },
                                           0.0, q, level, 44);
            }
        }
        return ell;
    };

    double hi = 0.0;
    for (std::size_t i = 0; i < n_pools; ++i) hi = std::max(hi, marginal(i, 0.0));
    double lo = 0.0;

    // At level 0 every pool wants the full budget, so the constraint binds and
    // the multiplier is the positive level equalizing the marginals.
    int iters = 0;
    for (; iters < 48; ++iters) {
        const double mid = 0.5 * (lo + hi);
        const std::vector<double> ell = ell_at(mid);
        double total = 0.0;
        for (double l : ell) total += l;
        if (total > q)
            lo = mid;
        else
            hi = mid;
    }
    out.multiplier = 0.5 * (lo + hi);
    out.ell = ell_at(out.multiplier);
    out.iterations = iters;

    if (budget_binds) {
        // Exact budget on the boundary: rescale out the last bisection gap.
        double total = 0.0;
        for (double l : out.ell) total += l;
        if (total > 0.0)
            for (double& l : out.ell) l *= q / total;
    }
    return out;
}

double survival(const DarkPoolSpec& pool, double c_d, double x, double k_c) {
    return 1.0 - dark_liquidity_cdf(pool, c_d, x, k_c);
}

}  // namespace

AllocationResult optimal_dark_alloc_linear(double q,
                                           const std::vector<DarkPoolSpec>& pools,
                                           const std::vector<double>& fees,
                                           double k_c) {
    check_pool_sizes(pools, fees);
    return equal_marginal_alloc(
        q, pools.size(),
        [&](std::size_t i, double ell) {
            return 2.0 * pools[i].theta * (q - ell) *
                   survival(pools[i], fees[i], ell, k_c);
        },
        /*budget_binds=*/false);
}

AllocationResult optimal_dark_alloc_exp(double q,
                                        const std::vector<DarkPoolSpec>& pools,
                                        const std::vector<double>& fees, double rho,
                                        double alpha, double k_c) {
    check_pool_sizes(pools, fees);
    const double ra = rho * alpha;
    return equal_marginal_alloc(
        q, pools.size(),
        [&](std::size_t i, double ell) {
            return 2.0 * pools[i].theta * ra * (q - ell) *
                   std::exp(-ra * ell * (2.0 * q - ell)) *
                   survival(pools[i], fees[i], ell, k_c);
        },
        /*budget_binds=*/true);
}

namespace {

// Sum theta_i E[min(ell,r)(2q-min)] at the given allocation.
double linear_jump_sum(double q, const std::vector<double>& ell,
                       const std::vector<DarkPoolSpec>& pools,
                       const std::vector<double>& fees, double k_c) {
    double s = 0.0;
    for (std::size_t i = 0; i < pools.size(); ++i)
        s += pools[i].theta * exp_min_linear_moment(pools[i], ell[i], fees[i], q, k_c);
    return s;
}

// Sum theta_i (e^{-rho u_i} E[e^{-rho alpha min(2q-min)}] + rho u_i - 1).
double exp_jump_sum(double q, const std::vector<double>& ell,
                    const std::vector<double>& u,
                    const std::vector<DarkPoolSpec>& pools,
                    const std::vector<double>& fees, double rho, double alpha,
                    double k_c) {
    double s = 0.0;
    for (std::size_t i = 0; i < pools.size(); ++i) {
        const double ebar =
            exp_min_exponential_moment(pools[i], ell[i], fees[i], q, rho, alpha, k_c);
        s += pools[i].theta * (std::exp(-rho * u[i]) * ebar + rho * u[i] - 1.0);
    }
    return s;
}

// Safeguarded Newton on a strictly decreasing g over (-inf, 0]; returns the
// root of g clamped to nu <= 0 (g(0) >= 0 means the unclamped argmax is
// nonnegative, i.e. not a sell).
template <typename G, typename Gp>
double newton_rate(G&& g, Gp&& gp) {
    if (g(0.0) >= 0.0) return 0.0;
    double lo = -1.0;
    while (g(lo) <= 0.0) {
        lo *= 2.0;
        if (lo < -1e6) throw std::runtime_error("lit rate: bracketing failed");
    }
    double hi = 0.0, nu = 0.5 * lo;
    for (int it = 0; it < 200; ++it) {
        const double gv = g(nu);
        if (gv > 0.0)
            lo = nu;
        else
            hi = nu;
        const double step = gv / gp(nu);
        double next = nu - step;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - nu) < 1e-14) return next;
        nu = next;
    }
    return nu;
}

}  // namespace

double optimal_lit_rate_linear(double q, double z, double c_l, const MarketParams& p,
                               const std::vector<double>& ell_hat,
                               const std::vector<DarkPoolSpec>& pools,
                               const std::vector<double>& fees) {
    if (q <= 0.0) return 0.0;
    const double zterm = z == 0.0 ? 0.0 : p.gamma * z / p.sigma;
    if (p.k_theta == 0.0)
        return negative_part(-(2.0 * p.alpha * q - c_l - zterm) / (2.0 * p.eta));

    const double jump = linear_jump_sum(q, ell_hat, pools, fees, p.k_c);
    if (-2.0 * p.eta + p.alpha * p.k_theta * p.k_theta * jump >= 0.0)
        throw std::runtime_error(
            "lit rate: driver f not concave in nu (admissibility violated)");
    const double lin = c_l - 2.0 * p.alpha * q + zterm;
    const auto g = [&](double nu) {
        return -2.0 * p.eta * nu + lin +
               p.alpha * p.k_theta * std::exp(p.k_theta * nu) * jump;
    };
    const auto gp = [&](double nu) {
        return -2.0 * p.eta +
               p.alpha * p.k_theta * p.k_theta * std::exp(p.k_theta * nu) * jump;
    };
    return newton_rate(g, gp);
}

double optimal_lit_rate_exp(double q, double c_l, const std::vector<double>& u,
                            const MarketParams& p, const std::vector<double>& ell_hat,
                            const std::vector<DarkPoolSpec>& pools,
                            const std::vector<double>& fees) {
    if (q <= 0.0) return 0.0;
    if (p.k_theta == 0.0)
        return negative_part(-(2.0 * p.alpha * q - c_l) / (2.0 * p.eta));

    const double jump = exp_jump_sum(q, ell_hat, u, pools, fees, p.rho, p.alpha, p.k_c);
    if (-2.0 * p.eta - p.k_theta * p.k_theta / p.rho * std::min(0.0, jump) >= 0.0)
        throw std::runtime_error("lit rate: u outside the concavity set U");
    const double lin = c_l - 2.0 * p.alpha * q;
    const auto g = [&](double nu) {
        return -2.0 * p.eta * nu + lin -
               p.k_theta / p.rho * std::exp(p.k_theta * nu) * jump;
    };
    const auto gp = [&](double nu) {
        return -2.0 * p.eta -
               p.k_theta * p.k_theta / p.rho * std::exp(p.k_theta * nu) * jump;
    };
    return newton_rate(g, gp);
}

double driver_f(double t, double q, double z, double nu, const std::vector<double>& ell,
                const FeeVec& fees, const MarketParams& p,
                const std::vector<DarkPoolSpec>& pools) {
    (void)t;
    check_pool_sizes(pools, fees.c_d);
    const double lambda = p.lambda_rate;
    const double zterm = z == 0.0 ? 0.0 : (p.gamma * z / p.sigma) * nu;
    return -p.phi * q * q - p.eta * nu * nu + fees.c_l * nu +
           q * (p.epsilon * lambda - 2.0 * p.alpha * nu) + zterm +
           p.alpha * std::exp(p.k_theta * nu) *
               linear_jump_sum(q, ell, pools, fees.c_d, p.k_c);
}

double driver_h_with_moments(double q, double z, const std::vector<double>& u,
                             double nu, double c_l, const MarketParams& p,
                             const std::vector<DarkPoolSpec>& pools,
                             const std::vector<double>& exp_moments) {
    if (u.size() != pools.size() || exp_moments.size() != pools.size())
        throw std::invalid_argument("driver_h: u/moment size must match pool count");
    const double lambda = p.lambda_rate;
    const double zq = z + q * p.sigma;
    double jump = 0.0;
    for (std::size_t i = 0; i < pools.size(); ++i)
        jump += pools[i].theta *
                (std::exp(-p.rho * u[i]) * exp_moments[i] + p.rho * u[i] - 1.0);
    return -p.phi * q * q - p.eta * nu * nu + c_l * nu +
           q * (p.epsilon * lambda - 2.0 * p.alpha * nu) - 0.5 * p.rho * zq * zq -
           std::exp(p.k_theta * nu) / p.rho * jump;
}

double driver_h(double t, double q, double z, const std::vector<double>& u, double nu,
                const std::vector<double>& ell, const FeeVec& fees,
                const MarketParams& p, const std::vector<DarkPoolSpec>& pools) {
    (void)t;
    check_pool_sizes(pools, fees.c_d);
    if (u.size() != pools.size())
        throw std::invalid_argument("driver_h: u size must match pool count");
    std::vector<double> moments(pools.size());
    for (std::size_t i = 0; i < pools.size(); ++i)
        moments[i] = exp_min_exponential_moment(pools[i], ell[i], fees.c_d[i], q,
                                                p.rho, p.alpha, p.k_c);
    return driver_h_with_moments(q, z, u, nu, fees.c_l, p, pools, moments);
}

HamiltonianResult hamiltonian_H(double t, double q, double z,
                                const std::vector<double>& u, const FeeVec& fees,
                                const MarketParams& p,
                                const std::vector<DarkPoolSpec>& pools) {
    HamiltonianResult out;
    AllocationResult alloc =
        optimal_dark_alloc_exp(q, pools, fees.c_d, p.rho, p.alpha, p.k_c);
    if (p.k_theta > 0.0) {
        const double jump =
            exp_jump_sum(std::max(q, 0.0), alloc.ell, u, pools, fees.c_d, p.rho,
                         p.alpha, p.k_c);
        if (-2.0 * p.eta - p.k_theta * p.k_theta / p.rho * std::min(0.0, jump) >= 0.0)
            throw std::invalid_argument("hamiltonian_H: u outside the set U");
    }
    const double nu = optimal_lit_rate_exp(q, fees.c_l, u, p, alloc.ell, pools, fees.c_d);
    out.value = driver_h(t, q, z, u, nu, alloc.ell, fees, p, pools);
    out.controls.nu = nu;
    out.controls.ell = std::move(alloc.ell);
    return out;
}

double compensation_xi(const std::vector<PathStep>& path, double y0,
                       const MarketParams& p, const std::vector<DarkPoolSpec>& pools) {
    double xi = y0;
    for (const PathStep& step : path) {
        if (step.jumps.size() != pools.size() || step.u.size() != pools.size())
            throw std::invalid_argument("compensation_xi: malformed path step");
        if (!(step.dt > 0.0) || !std::isfinite(step.dW))
            throw std::invalid_argument("compensation_xi: missing increments");
        const double H =
            hamiltonian_H(step.t, step.q, step.z, step.u, step.fees, p, pools).value;
        xi += -H * step.dt + step.z * step.dW;
        for (std::size_t i = 0; i < pools.size(); ++i)
            xi += step.u[i] * (step.jumps[i] - pools[i].theta * step.dt);
    }
    return xi;
}

AlmgrenChrissResult almgren_chriss_benchmark(const MarketParams& p, int n_steps,
                                             int n_paths, std::uint64_t seed) {
    if (n_steps < 1 || n_paths < 1)
        throw std::invalid_argument("almgren_chriss_benchmark: bad sizes");
    AlmgrenChrissResult out;
    const double dt = p.T / n_steps;
    out.t.resize(n_steps + 1);
    out.q.resize(n_steps + 1);
    out.nu.resize(n_steps + 1);

    if (p.phi == 0.0) {
        const double b = -p.alpha * p.Q0 / (p.eta + p.alpha * p.T);
        for (int n = 0; n <= n_steps; ++n) {
            out.t[n] = n * dt;
            out.q[n] = p.Q0 + b * out.t[n];
            out.nu[n] = b;
        }
    } else {
        const double k = std::sqrt(p.phi / p.eta);
        const double c = p.alpha / (p.eta * k);
        const double a = p.Q0 / (std::cosh(k * p.T) + c * std::sinh(k * p.T));
        for (int n = 0; n <= n_steps; ++n) {
            const double t = n * dt, tau = p.T - t;
            out.t[n] = t;
            out.q[n] = a * (std::cosh(k * tau) + c * std::sinh(k * tau));
            out.nu[n] = -a * k * (std::sinh(k * tau) + c * std::cosh(k * tau));
        }
    }

    // Exponential utility of running the schedule lit-only with zero fees.
    // Work in log domain: with rho = 300, exp(-rho * wealth) underflows.
    std::vector<double> neg_rho_w(n_paths);
    for (int path = 0; path < n_paths; ++path) {
        Rng rng(mix_seed(seed, static_cast<std::uint64_t>(path)));
        double s = p.S0, x = p.X0, qpen = 0.0;
        for (int n = 0; n < n_steps; ++n) {
            const double nu = out.nu[n];
            x -= (s + p.eta * nu) * nu * dt;
            qpen += p.phi * out.q[n] * out.q[n] * dt;
            s += (p.gamma * nu + p.epsilon * p.lambda_rate) * dt +
                 p.sigma * std::sqrt(dt) * rng.gaussian();
        }
        const double qT = out.q[n_steps];
        neg_rho_w[path] = -p.rho * (x + qT * (s - p.alpha * qT) - qpen);
    }

    // log-mean-exp with standard error propagated to the certainty equivalent.
    const double mx = *std::max_element(neg_rho_w.begin(), neg_rho_w.end());
    double sum = 0.0, sum2 = 0.0;
    for (double v : neg_rho_w) {
        const double e = std::exp(v - mx);
        sum += e;
        sum2 += e * e;
    }
    const double mean = sum / n_paths;
    const double var = std::max(0.0, sum2 / n_paths - mean * mean);
    const double se = std::sqrt(var / n_paths);
    out.log_neg_r0 = mx + std::log(mean);
    out.ce = -out.log_neg_r0 / p.rho;
    out.ce_se = se / mean / p.rho;
    return out;
}

}  // namespace darkpool
