#pragma once

#include <vector>

#include "darkpool/fill_law.hpp"
#include "darkpool/params.hpp"
#include "darkpool/state.hpp"

namespace darkpool {

// Pointwise fees used by the strategy formulas (the FeeSchedule closures are
// evaluated into this before calling the solvers).
struct FeeVec {
    double c_l = 0.0;
    std::vector<double> c_d;
};

struct AllocationResult {
    std::vector<double> ell;
    double multiplier = 0.0;  // Lagrange multiplier on the budget constraint
    int iterations = 0;
};

// BSDE contract controls: initial certainty-equivalent value, diffusion
// exposure, per-pool jump exposures.
struct BsdeControls {
    double y0 = 0.0;
    double z = 0.0;
    std::vector<double> u;
};

// Linear-utility dark allocation. M=1: ell = q. M>1: equalizes the marginals
// 2 theta_i (q - ell_i)(1 - F(ell_i e^{k_c c_d})) by bisection on the
// multiplier with monotone per-pool inner root-finds.
AllocationResult optimal_dark_alloc_linear(double q,
                                           const std::vector<DarkPoolSpec>& pools,
                                           const std::vector<double>& fees, double k_c);

// Exponential-utility dark allocation. Marginal is
// 2 theta_i rho alpha (q - ell_i) e^{-rho alpha ell_i (2q - ell_i)} (1 - F(.));
// the budget Sum ell = q binds for M > 1.
AllocationResult optimal_dark_alloc_exp(double q,
                                        const std::vector<DarkPoolSpec>& pools,
                                        const std::vector<double>& fees, double rho,
                                        double alpha, double k_c);

// Linear-utility lit rate. Closed form when k_theta = 0:
// ((-(2 alpha q - c_l - gamma z / sigma)) / (2 eta))^-. Otherwise a
// safeguarded Newton root of d/dnu f = 0 on the strictly concave driver.
double optimal_lit_rate_linear(double q, double z, double c_l, const MarketParams& p,
                               const std::vector<double>& ell_hat,
                               const std::vector<DarkPoolSpec>& pools,
                               const std::vector<double>& fees);

// Exponential-utility lit rate; closed form ((-(2 alpha q - c_l))/(2 eta))^-
// when k_theta = 0.
double optimal_lit_rate_exp(double q, double c_l, const std::vector<double>& u,
                            const MarketParams& p, const std::vector<double>& ell_hat,
                            const std::vector<DarkPoolSpec>& pools,
                            const std::vector<double>& fees);

// Linear-utility BSDE driver f.
double driver_f(double t, double q, double z, double nu, const std::vector<double>& ell,
                const FeeVec& fees, const MarketParams& p,
                const std::vector<DarkPoolSpec>& pools);

// Exponential-utility BSDE driver h.
double driver_h(double t, double q, double z, const std::vector<double>& u, double nu,
                const std::vector<double>& ell, const FeeVec& fees,
                const MarketParams& p, const std::vector<DarkPoolSpec>& pools);

// driver_h with the per-pool moments E[e^{-rho alpha min(ell,r)(2q-min)}]
// already computed (they depend only on (q, ell, c_d), so callers scanning
// many (z, u) pairs reuse them).
double driver_h_with_moments(double q, double z, const std::vector<double>& u,
                             double nu, double c_l, const MarketParams& p,
                             const std::vector<DarkPoolSpec>& pools,
                             const std::vector<double>& exp_moments);

struct HamiltonianResult {
    double value = 0.0;
    ControlPair controls;
};

// H(t,z,u) = sup over (nu, ell) of h; the sup decomposes into the dark
// allocation followed by the lit rate. Rejects u outside the concavity set.
HamiltonianResult hamiltonian_H(double t, double q, double z,
                                const std::vector<double>& u, const FeeVec& fees,
                                const MarketParams& p,
                                const std::vector<DarkPoolSpec>& pools);

// Per-step record of a simulated path, as consumed by compensation_xi.
struct PathStep {
    double t = 0.0;
    double dt = 0.0;
    double q = 0.0;
    double z = 0.0;
    std::vector<double> u;
    FeeVec fees;
    double dW = 0.0;
    std::vector<int> jumps;  // raw jump counts per pool this step
};

// Realized compensation xi = y0 - Sum H dt + Sum z dW + Sum u (dN - theta dt).
double compensation_xi(const std::vector<PathStep>& path, double y0,
                       const MarketParams& p, const std::vector<DarkPoolSpec>& pools);

struct AlmgrenChrissResult {
    std::vector<double> t;
    std::vector<double> q;
    std::vector<double> nu;
    double ce = 0.0;          // certainty equivalent: R0 = -e^{-rho ce}
    double log_neg_r0 = 0.0;  // log(-R0) = -rho ce
    double ce_se = 0.0;       // Monte-Carlo standard error of ce
};

// Deterministic schedule minimizing int(eta nu^2 + phi q^2)dt + alpha q_T^2
// (hyperbolic-sine solution; linear when phi = 0), plus the exponential
// utility of running it lit-only with zero fees, estimated by Monte Carlo.
// Utilities are kept in log domain: exp(-rho * wealth) underflows at
// rho = 300.
AlmgrenChrissResult almgren_chriss_benchmark(const MarketParams& p, int n_steps = 1000,
                                             int n_paths = 10000,
                                             std::uint64_t seed = 1);

}  // namespace darkpool
