#include "darkpool/fill_law.hpp"

#include <cmath>
#include <stdexcept>

#include "darkpool/math_util.hpp"

namespace darkpool {

namespace {
// Shift and scale of the law of r = A e^{-k_c c_d}.
struct Scaled {
    double shift;  // support_eps * e^{-k_c c_d}
    double scale;  // (size_mean - support_eps) * e^{-k_c c_d}
};

Scaled scaled_law(const DarkPoolSpec& pool, double c_d, double k_c) {
    const double damp = std::exp(-k_c * c_d);
    return {pool.support_eps * damp, (pool.size_mean - pool.support_eps) * damp};
}

void check_ell_q(double ell, double q) {
    if (ell < 0.0) throw std::invalid_argument("fill law: ell must be >= 0");
    if (q < ell - 1e-12) throw std::invalid_argument("fill law: requires q >= ell");
}
}  // namespace

double dark_liquidity_cdf(const DarkPoolSpec& pool, double c_d, double x, double k_c) {
    if (x < 0.0) throw std::invalid_argument("dark_liquidity_cdf: x must be >= 0");
    const Scaled law = scaled_law(pool, c_d, k_c);
    if (x <= law.shift) return 0.0;
    return 1.0 - std::exp(-(x - law.shift) / law.scale);
}

double dark_liquidity_pdf(const DarkPoolSpec& pool, double c_d, double x, double k_c) {
    const Scaled law = scaled_law(pool, c_d, k_c);
    if (x < law.shift) return 0.0;
    return std::exp(-(x - law.shift) / law.scale) / law.scale;
}

double sample_dark_fill(const DarkPoolSpec& pool, double ell, double c_d, double k_c,
                        Rng& rng) {
    if (ell < 0.0) throw std::invalid_argument("sample_dark_fill: ell must be >= 0");
    const double a = pool.support_eps + rng.exponential(pool.size_mean - pool.support_eps);
    const double r = a * std::exp(-k_c * c_d);
    return std::min(ell, r);
}

double expected_fill(const DarkPoolSpec& pool, double ell, double c_d, double k_c) {
    if (ell <= 0.0) return 0.0;
    const Scaled law = scaled_law(pool, c_d, k_c);
    if (ell <= law.shift) return ell;
    // integral of the survival function: shift + m(1 - e^{-(ell-shift)/m})
    return law.shift + law.scale * (1.0 - std::exp(-(ell - law.shift) / law.scale));
}

double exp_min_linear_moment(const DarkPoolSpec& pool, double ell, double c_d,
                             double q, double k_c) {
    check_ell_q(ell, q);
    if (ell <= 0.0) return 0.0;
    const Scaled law = scaled_law(pool, c_d, k_c);
    const double s0 = law.shift, m = law.scale;
    double m1, m2;
    if (ell <= s0) {
        m1 = ell;
        m2 = ell * ell;
    } else {
        const double tail = std::exp(-(ell - s0) / m);
        m1 = s0 + m * (1.0 - tail);
        m2 = s0 * s0 + 2.0 * m * s0 + 2.0 * m * m - 2.0 * m * (ell + m) * tail;
    }
    return 2.0 * q * m1 - m2;
}

double exp_min_exponential_moment(const DarkPoolSpec& pool, double ell, double c_d,
                                  double q, double rho, double alpha, double k_c) {
    check_ell_q(ell, q);
    if (ell <= 0.0) return 1.0;
    const Scaled law = scaled_law(pool, c_d, k_c);
    const double s0 = law.shift, m = law.scale;
    const double at_ell = std::exp(-rho * alpha * ell * (2.0 * q - ell));
    if (ell <= s0) return at_ell;
    const double tail = std::exp(-(ell - s0) / m);
    // Body integral in the standardized size x = (r - s0)/m with density
    // e^{-x}: composite Gauss-Legendre on exponentially spaced panels (the
    // mass beyond 45 decay lengths is below 3e-20 and dropped).
    static const GaussLegendre gl(16);
    static const double edges[] = {0.0, 2.0, 5.0, 10.0, 20.0, 45.0};
    const double x_max = std::min((ell - s0) / m, 45.0);
    double body = 0.0;
    for (int pi = 0; pi + 1 < 6 && edges[pi] < x_max; ++pi) {
        const double x0 = edges[pi], x1 = std::min(edges[pi + 1], x_max);
        const double mid = 0.5 * (x0 + x1), half = 0.5 * (x1 - x0);
        for (std::size_t j = 0; j < gl.x.size(); ++j) {
            const double x = mid + half * gl.x[j];
            const double r = s0 + m * x;
            body += half * gl.w[j] *
                    std::exp(-rho * alpha * r * (2.0 * q - r) - x);
        }
    }
    return body + at_ell * tail;
}

}  // namespace darkpool
