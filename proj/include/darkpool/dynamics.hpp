#pragma once

#include <numeric>

#include "darkpool/params.hpp"
#include "darkpool/state.hpp"

namespace darkpool {

// dS = (gamma nu + epsilon lambda) dt + sigma dW
inline double lit_price_step(double s, double nu, double lambda, double dt, double dW,
                             const MarketParams& p) {
    return s + (p.gamma * nu + p.epsilon * lambda) * dt + p.sigma * dW;
}

// Temporary impact: the price actually received on lit flow.
inline double executed_price(double s, double nu, const MarketParams& p) {
    return s + p.eta * nu;
}

// One Euler step of the trader state. `fills` are the realized dark
// executions this step (already min(ell, r), possibly zero).
inline TraderState step_state(const TraderState& state, const ControlPair& controls,
                              const std::vector<double>& fills, double c_l,
                              double lambda, double dt, double dW,
                              const MarketParams& p) {
    TraderState next = state;
    next.t = state.t + dt;
    double dark = 0.0, revenue = 0.0;
    for (double f : fills) {
        dark += f;
        revenue += state.s * f;
    }
    next.q = state.q + controls.nu * dt - dark;
    next.x = state.x -
             ((state.s + p.eta * controls.nu) * controls.nu - c_l * controls.nu) * dt +
             revenue;
    next.s = lit_price_step(state.s, controls.nu, lambda, dt, dW, p);
    return next;
}

// Exchange revenue increment: lit fees on both traders' flow, dark fees on
// fills, plus the weighted permanent-impact externality.
inline double exchange_pnl_step(const ExchangeState& state, const ControlPair& controls,
                                const std::vector<double>& fills,
                                const std::vector<double>& dark_fees, double c_l,
                                double lambda, double dt, const MarketParams& p) {
    (void)state;
    double dark = 0.0;
    for (std::size_t i = 0; i < fills.size(); ++i) dark += dark_fees[i] * fills[i];
    return -c_l * (controls.nu + lambda) * dt + dark +
           p.kappa * (p.gamma * controls.nu + p.epsilon * lambda) * dt;
}

}  // namespace darkpool
