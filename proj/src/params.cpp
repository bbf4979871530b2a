#include "darkpool/params.hpp"

namespace darkpool {

DarkPoolSpec make_pool(double theta, double a, LiquidityParam interp,
                       double support_eps) {
    DarkPoolSpec pool;
    pool.theta = theta;
    pool.size_mean = interp == LiquidityParam::Mean ? a : 1.0 / a;
    pool.support_eps = support_eps;
    pool.validate();
    return pool;
}

ModelPreset load_preset(const std::string& name, LiquidityParam interp) {
    ModelPreset preset;
    MarketParams& p = preset.params;
    if (name == "table1") {
        p.T = 1.0;
        p.sigma = 0.02;
        p.gamma = 0.01;
        p.epsilon = 0.01;
        p.eta = 0.02;
        p.alpha = 0.04;
        p.phi = 0.0;
        p.rho = 300.0;
        p.kappa = 1.0;
        p.lambda_rate = -0.01;
        p.k_theta = 0.0;
        p.k_c = 100.0;
        p.fee_cap = 0.01;
        p.Q0 = 1.0;
        p.S0 = 1.0;
        p.X0 = 0.0;
        preset.pools = {make_pool(30.0, 100.0, interp), make_pool(20.0, 150.0, interp)};
    } else if (name == "table2") {
        p.T = 1.0;
        p.sigma = 0.02;
        p.gamma = 0.01;
        p.epsilon = 0.01;
        p.eta = 0.02;
        p.alpha = 0.04;
        p.phi = 0.0;
        p.rho = 300.0;
        p.kappa = 1.0;
        p.lambda_rate = -0.01;
        p.k_theta = 0.0;
        p.k_c = 100.0;
        p.fee_cap = 0.01;
        p.Q0 = 1.0;
        p.S0 = 1.0;
        p.X0 = 0.0;
        p.gamma0 = p.gamma;
        p.eta0 = p.eta;
        p.alpha0 = p.alpha;
        p.E0 = 0.1;
        preset.pools = {make_pool(30.0, 200.0, interp)};
    } else {
        throw std::invalid_argument("unknown preset: " + name);
    }
    p.validate();
    return preset;
}

}  // namespace darkpool
