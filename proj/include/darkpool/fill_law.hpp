#pragma once

#include "darkpool/params.hpp"
#include "darkpool/rng.hpp"

namespace darkpool {

// Dark-pool fill law. Available liquidity is r = A e^{-k_c c_d} with
// A ~ support_eps + Exp(mean size_mean - support_eps); a posted volume ell
// executes min(ell, r) on arrival. All expectations below are closed form for
// this shifted-exponential law except the exponential-utility moment, which
// is reduced to a 1-d smooth integral and evaluated by adaptive quadrature.

// P(r <= x). Rejects x < 0.
double dark_liquidity_cdf(const DarkPoolSpec& pool, double c_d, double x, double k_c);

// Density of r at x (0 below the shifted support).
double dark_liquidity_pdf(const DarkPoolSpec& pool, double c_d, double x, double k_c);

// One draw of min(ell, r).
double sample_dark_fill(const DarkPoolSpec& pool, double ell, double c_d, double k_c,
                        Rng& rng);

// E[min(ell, r)].
double expected_fill(const DarkPoolSpec& pool, double ell, double c_d, double k_c);

// E[min(ell,r) (2q - min(ell,r))], the linear-utility jump moment.
// Requires 0 <= ell <= q.
double exp_min_linear_moment(const DarkPoolSpec& pool, double ell, double c_d,
                             double q, double k_c);

// E[exp(-rho alpha min(ell,r)(2q - min(ell,r)))], the exponential-utility
// jump moment; value in (0, 1]. Requires 0 <= ell <= q.
double exp_min_exponential_moment(const DarkPoolSpec& pool, double ell, double c_d,
                                  double q, double rho, double alpha, double k_c);

}  // namespace darkpool
