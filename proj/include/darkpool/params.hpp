#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace darkpool {

// How the preset's liquidity size parameter `a` is interpreted when building
// the exponential size law: as the distribution mean, or as the rate (mean
// 1/a). See docs/config.md.
enum class LiquidityParam { Mean, Rate };

// Per-pool arrival intensity and liquidity size law. The available liquidity
// is r = A e^{-k_c c_d} with A = support_eps + Exp(size_mean - support_eps),
// i.e. an exponential law of mean `size_mean` shifted to [support_eps, inf).
struct DarkPoolSpec {
    double theta = 0.0;        // Poisson arrival intensity (events / unit time)
    double size_mean = 0.0;    // mean of A (shares)
    double support_eps = 0.0;  // lower support bound of A (shares)

    void validate() const {
        if (!(theta > 0.0)) throw std::invalid_argument("pool: theta must be > 0");
        if (!(size_mean > 0.0)) throw std::invalid_argument("pool: size_mean must be > 0");
        if (support_eps < 0.0) throw std::invalid_argument("pool: support_eps must be >= 0");
        if (support_eps >= size_mean)
            throw std::invalid_argument("pool: support_eps must be < size_mean");
    }
};

// Scalar model constants, keyed to the usual impact-model symbols.
struct MarketParams {
    double T = 1.0;            // horizon
    double sigma = 0.02;       // volatility
    double gamma = 0.01;       // permanent impact, large trader
    double epsilon = 0.01;     // permanent impact, small traders
    double eta = 0.02;         // temporary impact
    double alpha = 0.04;       // terminal inventory penalty
    double phi = 0.0;          // running inventory penalty
    double rho = 300.0;        // risk aversion
    double kappa = 1.0;        // exchange impact weight in its PnL
    double lambda_rate = -0.01;  // constant small-trader rate
    double k_theta = 0.0;      // lit-rate sensitivity of dark arrivals
    double k_c = 100.0;        // fee sensitivity of dark liquidity
    double fee_cap = 0.01;     // admissible fee bound
    double Q0 = 1.0;           // initial inventory
    double S0 = 1.0;           // initial price
    double X0 = 0.0;           // initial cash
    // Competitive-market (major/minor) constants; defaults tie to the above.
    double gamma0 = 0.01;      // major permanent impact
    double eta0 = 0.02;        // major temporary impact
    double alpha0 = 0.04;      // major terminal penalty
    double E0 = 0.1;           // minor mean initial inventory

    void validate() const {
        if (!(T > 0.0)) throw std::invalid_argument("params: T must be > 0");
        if (sigma < 0.0) throw std::invalid_argument("params: sigma must be >= 0");
        if (!(eta > 0.0)) throw std::invalid_argument("params: eta must be > 0");
        if (alpha < 0.0) throw std::invalid_argument("params: alpha must be >= 0");
        if (phi < 0.0) throw std::invalid_argument("params: phi must be >= 0");
        if (!(rho > 0.0)) throw std::invalid_argument("params: rho must be > 0");
        if (k_theta < 0.0) throw std::invalid_argument("params: k_theta must be >= 0");
        if (k_c < 0.0) throw std::invalid_argument("params: k_c must be >= 0");
        if (fee_cap < 0.0) throw std::invalid_argument("params: fee_cap must be >= 0");
        if (!(eta0 > 0.0)) throw std::invalid_argument("params: eta0 must be > 0");
    }
};

struct ModelPreset {
    MarketParams params;
    std::vector<DarkPoolSpec> pools;
};

// Builds the size law from a preset entry. With `Rate` the preset value is
// the exponential rate, so the mean is 1/a.
DarkPoolSpec make_pool(double theta, double a, LiquidityParam interp,
                       double support_eps = 0.0);

// "table1": regulated-market constants (two pools, theta = 30/20, a = 100/150).
// "table2": competitive-market constants (one pool, theta = 30, a = 200).
ModelPreset load_preset(const std::string& name,
                        LiquidityParam interp = LiquidityParam::Rate);

}  // namespace darkpool
