#pragma once

#include <vector>

#include "darkpool/params.hpp"

namespace darkpool {

struct MFGConfig {
    int n_time = 1000;
    int n_q = 400;
    double q_max = 1.2;
    double omega = 0.5;    // relaxation weight
    double tol = 1e-6;     // sup-norm convergence tolerance on mu
    int max_iters = 200;
    std::vector<double> mu_init;  // optional initial guess, size n_time + 1
    std::vector<double> snapshot_times;  // density export times
};

// Closed-form Riccati coefficient h2(t) = -alpha eta / (eta + alpha (T - t)).
double riccati_h2(double t, double alpha, double eta, double T);

struct MinorBvpResult {
    std::vector<double> E;   // mean inventory path
    std::vector<double> mu;  // E'
};

// Two-point BVP 2 eta E'' + gamma E' = -gamma0 nu0, E(0) = E0,
// Robin E'(T) + (alpha/eta) E(T) = 0, solved by finite differences
// (tridiagonal with a second-order one-sided terminal row).
MinorBvpResult solve_minor_bvp(const std::vector<double>& nu0_path,
                               const MarketParams& p, double E0, double T);

struct H1H0 {
    std::vector<double> h1;
    std::vector<double> h0;
};

// h1 = 2 eta E' - 2 h2 E; h0 by backward quadrature of h0' = -h1^2/(4 eta).
H1H0 recover_h1_h0(const std::vector<double>& E, const std::vector<double>& h2,
                   const MarketParams& p, double T);

struct DensitySnapshot {
    double t = 0.0;
    std::vector<double> density;  // cell-averaged values on the q grid
    double mass = 0.0;            // exact transported mass
    double moment = 0.0;          // exact transported first moment
};

struct PushforwardResult {
    std::vector<double> Phi, psi, E;
    std::vector<DensitySnapshot> snapshots;
};

// Pushforward solution of the transport equation with affine flow
// q' = A(t) + B(t) q: Phi = exp(int B), psi = Phi int A/Phi,
// m(t) = flow # m0. m0 is a piecewise-linear density on the uniform q grid;
// snapshot masses/moments are integrated exactly against that representation.
PushforwardResult fp_pushforward(const std::vector<double>& A_path,
                                 const std::vector<double>& B_path,
                                 const std::vector<double>& m0, double q_max, double T,
                                 const std::vector<double>& snapshot_times);

struct MajorValue {
    std::vector<std::vector<double>> h0_grid;  // (n_time+1) x (n_q+1)
    std::vector<std::vector<double>> nu0;      // feedback lit rate table
    // feedback dark allocations, per pool: ell0[i][n][j]
    std::vector<std::vector<std::vector<double>>> ell0;
    std::vector<double> b;  // dark threshold path b(t)
    double t_step = 0.0, q_step = 0.0;

    double lookup(const std::vector<std::vector<double>>& table, double t,
                  double q) const;  // bilinear interpolation
};

// M=1 threshold rule ell = min(q, (q - b)+) with b the root of the marginal;
// M>1 equalizes theta_i (1 - F(ell_i)) (-d_q h0(q - ell_i)) by bisection on
// the common level. `dqh_slice` is the marginal value on the q grid.
std::vector<double> major_dark_alloc(double q, const std::vector<double>& dqh_slice,
                                     double q_step,
                                     const std::vector<DarkPoolSpec>& pools);

// Backward explicit upwind sweep of the major HJB given the mean-field rate
// path mu. Dark fills are fee-free in the competitive market.
MajorValue solve_major_hjb(const std::vector<double>& mu_path, const MarketParams& p,
                           const std::vector<DarkPoolSpec>& pools,
                           const MFGConfig& grid);

struct MinorEquilibrium {
    std::vector<double> h0, h1, h2;
    std::vector<double> E, mu;
    PushforwardResult flow;
};

struct MFGSolution {
    MinorEquilibrium minor;
    MajorValue major;
    std::vector<double> Q0bar;  // major expected inventory path
    int iterations = 0;
    double residual = 0.0;
    std::vector<double> residual_history;
    bool converged = false;
};

// Relaxed fixed point: major HJB -> major mean inventory ODE -> minor BVP ->
// mu update until the sup-norm test passes.
MFGSolution mfg_fixed_point(const MFGConfig& config, const MarketParams& p,
                            const std::vector<DarkPoolSpec>& pools);

// Default minor initial density: Gaussian(E0, 0.05) truncated to [0, q_max],
// normalized so its piecewise-linear grid integral is exactly 1.
std::vector<double> default_minor_density(double E0, double q_max, int n_q);

}  // namespace darkpool
