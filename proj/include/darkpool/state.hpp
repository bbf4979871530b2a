#pragma once

#include <functional>
#include <stdexcept>
#include <vector>

namespace darkpool {

struct TraderState {
    double t = 0.0;  // time
    double q = 0.0;  // inventory (shares)
    double s = 0.0;  // mid price
    double x = 0.0;  // cash
};

// Trader state plus the exchange's accumulated revenue and the trader's
// continuation value (tracked for compensation construction).
struct ExchangeState {
    TraderState trader;
    double iota = 0.0;  // accumulated exchange revenue I_t (I_0 = 0)
    double y = 0.0;     // trader continuation value Y_t
};

struct ControlPair {
    double nu = 0.0;          // lit rate, <= 0 for the seller
    std::vector<double> ell;  // dark posted volumes, >= 0 each

    void validate(double q) const {
        if (nu > 0.0) throw std::invalid_argument("controls: nu must be <= 0");
        double total = 0.0;
        for (double l : ell) {
            if (l < 0.0) throw std::invalid_argument("controls: ell must be >= 0");
            total += l;
        }
        if (total > q + 1e-12)
            throw std::invalid_argument("controls: sum of ell exceeds inventory");
    }
};

// Lit and per-pool dark fees as functions of time and state. `time_only`
// marks schedules that ignore the state, which lets the simulator pretabulate
// allocation and Hamiltonian grids.
struct FeeSchedule {
    using Fee = std::function<double(double t, const ExchangeState&)>;
    Fee lit_fee;
    std::vector<Fee> dark_fees;
    bool time_only = true;

    static FeeSchedule constant(double c_l, const std::vector<double>& c_d) {
        FeeSchedule f;
        f.lit_fee = [c_l](double, const ExchangeState&) { return c_l; };
        for (double c : c_d)
            f.dark_fees.push_back([c](double, const ExchangeState&) { return c; });
        f.time_only = true;
        return f;
    }
};

}  // namespace darkpool
