#include "darkpool/fee_train.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "darkpool/math_util.hpp"
#include "darkpool/trader.hpp"

namespace darkpool {

using Eigen::MatrixXd;
using Eigen::RowVectorXd;
using Eigen::VectorXd;

void TrainConfig::validate() const {
    if (batch_size < 1) throw std::invalid_argument("train: batch_size must be >= 1");
    if (!(lr > 0.0)) throw std::invalid_argument("train: lr must be > 0");
    if (lr_final < 0.0 || lr_final > lr)
        throw std::invalid_argument("train: lr_final must be in [0, lr]");
    if (!(dt > 0.0)) throw std::invalid_argument("train: dt must be > 0");
    if (!(fd_step > 0.0)) throw std::invalid_argument("train: fd_step must be > 0");
    if (epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");
    if (k_critic < 1 || k_actor < 1 || k_target < 1)
        throw std::invalid_argument("train: update periods must be >= 1");
    if (critic_inner < 1)
        throw std::invalid_argument("train: critic_inner must be >= 1");
    if (actor_inner < 1)
        throw std::invalid_argument("train: actor_inner must be >= 1");
    if (!(z_scale > 0.0)) throw std::invalid_argument("train: z_scale must be > 0");
    if (!(tau > 0.0 && tau <= 1.0)) throw std::invalid_argument("train: tau in (0, 1]");
    if (!(q_bound > 0.0 && s_bound > 0.0 && x_bound > 0.0 && iota_bound > 0.0))
        throw std::invalid_argument("train: state bounds must be > 0");
    if (terminal_frac < 0.0 || terminal_frac > 1.0)
        throw std::invalid_argument("train: terminal_frac in [0, 1]");
    if (jump_quad_nodes < 2)
        throw std::invalid_argument("train: jump_quad_nodes must be >= 2");
}

CriticFn wrap_critic(nn::Critic& critic) {
    return [&critic](const MatrixXd& states) { return critic.forward(states, false); };
}

namespace {

// Second-order stencil for one dimension: two extra points, one-sided at the
// box boundary.
struct Stencil {
    double p1 = 0.0, p2 = 0.0;  // the two offset coordinate values
    enum Mode { Central, Forward, Backward } mode = Central;
};

Stencil make_stencil(double x, double lo, double hi, double h) {
    Stencil s;
    if (x - h >= lo && x + h <= hi) {
        s.mode = Stencil::Central;
        s.p1 = x + h;
        s.p2 = x - h;
    } else if (x - h < lo) {
        s.mode = Stencil::Forward;
        s.p1 = x + h;
        s.p2 = x + 2.0 * h;
    } else {
        s.mode = Stencil::Backward;
        s.p1 = x - h;
        s.p2 = x - 2.0 * h;
    }
    return s;
}

double first_deriv(const Stencil& s, double v0, double v1, double v2, double h) {
    switch (s.mode) {
        case Stencil::Central:
            return (v1 - v2) / (2.0 * h);
        case Stencil::Forward:
            return (-3.0 * v0 + 4.0 * v1 - v2) / (2.0 * h);
        default:
            return (3.0 * v0 - 4.0 * v1 + v2) / (2.0 * h);
    }
}

double second_deriv(const Stencil& s, double v0, double v1, double v2, double h) {
    if (s.mode == Stencil::Central) return (v1 - 2.0 * v0 + v2) / (h * h);
    return (v0 - 2.0 * v1 + v2) / (h * h);  // first-order one-sided fallback
}

// Quadrature of the fill size m = min(ell, r): composite Gauss-Legendre in
// the standardized size x = (m - shift)/scale with density e^{-x} (panels of
// about 5 decay lengths, truncated where the mass drops below 1e-19), plus
// the atom at m = ell carrying the remaining probability. Weights sum to 1
// exactly. The quantile substitution is avoided on purpose: for ell many
// decay lengths above the support its log map is singular at the endpoint
// and fixed-order quadrature stalls.
struct JumpQuad {
    std::vector<double> m, w;
};

JumpQuad jump_quadrature(const DarkPoolSpec& pool, double ell, double c_d, double k_c,
                         const GaussLegendre& gl) {
    const double damp = std::exp(-k_c * c_d);
    const double shift = pool.support_eps * damp;
    const double scale = (pool.size_mean - pool.support_eps) * damp;
    JumpQuad q;
    if (ell <= shift + 1e-300) {
        q.m.assign(1, ell);  // deterministic fill: r >= shift >= ell a.s.
        q.w.assign(1, 1.0);
        return q;
    }
    static const double edges[] = {0.0, 2.0, 5.0, 10.0, 20.0, 45.0};
    const double x_max = std::min((ell - shift) / scale, 45.0);
    const int n = static_cast<int>(gl.x.size());
    double body = 0.0;
    for (int pi = 0; pi + 1 < 6 && edges[pi] < x_max; ++pi) {
        const double x0 = edges[pi], x1 = std::min(edges[pi + 1], x_max);
        const double mid = 0.5 * (x0 + x1), half = 0.5 * (x1 - x0);
        for (int j = 0; j < n; ++j) {
            const double x = mid + half * gl.x[j];
            const double w = half * gl.w[j] * std::exp(-x);
            q.m.push_back(shift + scale * x);
            q.w.push_back(w);
            body += w;
        }
    }
    q.m.push_back(ell);
    q.w.push_back(1.0 - body);
    return q;
}

// Per unique dark-fee vector of one state: the dark allocation and everything
// downstream that depends only on (q, c_d). Control sets of the same state
// that differ only in (c_l, z, u) share the entry.
struct FeeBundle {
    std::vector<double> c_d;
    std::vector<double> ell;
    std::vector<double> moments;  // E[e^{-rho alpha min(2q - min)}] per pool
    std::vector<JumpQuad> quads;
    long row_start = 0;  // first jump row in the evaluation matrix
    long n_rows = 0;
};

}  // namespace

VectorXd evaluate_operator_multi(const MatrixXd& states,
                                 const std::vector<std::vector<ExchangeControls>>& ctrls,
                                 const CriticFn& critic, const MarketParams& p,
                                 const std::vector<DarkPoolSpec>& pools,
                                 const TrainConfig& cfg) {
    const int K = static_cast<int>(states.rows());
    if (static_cast<int>(ctrls.size()) != K)
        throw std::invalid_argument("operator: controls/states size mismatch");
    const int M = static_cast<int>(pools.size());
    const double h = cfg.fd_step;
    const GaussLegendre gl(cfg.jump_quad_nodes);

    // derivative dims: q, s, x, iota (columns 1..4)
    const double hi[4] = {cfg.q_bound, cfg.s_bound, cfg.x_bound, cfg.iota_bound};

    std::vector<std::array<Stencil, 4>> stencils(K);
    std::vector<std::vector<FeeBundle>> bundles(K);  // unique c_d sets per state
    std::vector<std::vector<int>> bundle_of(K);      // ctrl index -> bundle index

    long rows = 0;
    for (int k = 0; k < K; ++k) {
        rows += 9;
        const double q = states(k, 1);
        bundle_of[k].reserve(ctrls[k].size());
        for (const ExchangeControls& c : ctrls[k]) {
            int idx = -1;
            for (std::size_t b = 0; b < bundles[k].size(); ++b)
                if (bundles[k][b].c_d == c.c_d) {
                    idx = static_cast<int>(b);
                    break;
                }
            if (idx < 0) {
                FeeBundle fb;
                fb.c_d = c.c_d;
                fb.ell.assign(M, 0.0);
                if (q > 0.0)
                    fb.ell = optimal_dark_alloc_exp(q, pools, c.c_d, p.rho, p.alpha,
                                                    p.k_c)
                                 .ell;
                fb.moments.resize(M);
                fb.quads.resize(M);
                for (int i = 0; i < M; ++i) {
                    fb.moments[i] = exp_min_exponential_moment(
                        pools[i], fb.ell[i], c.c_d[i], std::max(q, fb.ell[i]), p.rho,
                        p.alpha, p.k_c);
                    fb.quads[i] =
                        jump_quadrature(pools[i], fb.ell[i], c.c_d[i], p.k_c, gl);
                    fb.n_rows += static_cast<long>(fb.quads[i].m.size());
                }
                rows += fb.n_rows;
                bundles[k].push_back(std::move(fb));
                idx = static_cast<int>(bundles[k].size()) - 1;
            }
            bundle_of[k].push_back(idx);
        }
    }

    MatrixXd pts(rows, 5);
    long r = 0;
    for (int k = 0; k < K; ++k) {
        const RowVectorXd base = states.row(k);
        pts.row(r++) = base;
        for (int d = 0; d < 4; ++d) {
            stencils[k][d] = make_stencil(base(d + 1), 0.0, hi[d], h);
            RowVectorXd p1 = base, p2 = base;
            p1(d + 1) = stencils[k][d].p1;
            p2(d + 1) = stencils[k][d].p2;
            pts.row(r++) = p1;
            pts.row(r++) = p2;
        }
        for (FeeBundle& fb : bundles[k]) {
            fb.row_start = r;
            for (int i = 0; i < M; ++i) {
                for (double m : fb.quads[i].m) {
                    RowVectorXd jp = base;
                    jp(1) = base(1) - m;
                    jp(3) = base(3) + base(2) * m;
                    jp(4) = base(4) + fb.c_d[i] * m;
                    pts.row(r++) = jp;
                }
            }
        }
    }

    const VectorXd v = critic(pts);

    long n_out = 0;
    for (const auto& c : ctrls) n_out += static_cast<long>(c.size());
    VectorXd out(n_out);
    long o = 0;
    r = 0;
    for (int k = 0; k < K; ++k) {
        const double q = states(k, 1), s = states(k, 2);
        const double v0 = v(r);
        double d1[4], d2s = 0.0;
        for (int d = 0; d < 4; ++d) {
            const double v1 = v(r + 1 + 2 * d), v2 = v(r + 2 + 2 * d);
            d1[d] = first_deriv(stencils[k][d], v0, v1, v2, h);
            if (d == 1) d2s = second_deriv(stencils[k][d], v0, v1, v2, h);
        }
        const double d_q = d1[0], d_s = d1[1], d_x = d1[2], d_iota = d1[3];
        r += 9;

        // per-bundle jump expectations E[v(jump state)] per pool
        std::vector<std::vector<double>> ev(bundles[k].size());
        for (std::size_t b = 0; b < bundles[k].size(); ++b) {
            long jr = bundles[k][b].row_start;
            ev[b].resize(M);
            for (int i = 0; i < M; ++i) {
                double e = 0.0;
                for (double w : bundles[k][b].quads[i].w) e += w * v(jr++);
                ev[b][i] = e;
            }
            r += bundles[k][b].n_rows;
        }

        for (std::size_t c = 0; c < ctrls[k].size(); ++c) {
            const ExchangeControls& ctl = ctrls[k][c];
            const FeeBundle& fb = bundles[k][bundle_of[k][c]];
            const double nu =
                q > 0.0 ? optimal_lit_rate_exp(q, ctl.c_l, ctl.u, p, fb.ell, pools,
                                               ctl.c_d)
                        : 0.0;

            const double bracket =
                driver_h_with_moments(q, ctl.z, ctl.u, nu, ctl.c_l, p, pools,
                                      fb.moments) -
                (p.gamma * nu / p.sigma) * ctl.z;
            const double perm = p.gamma * nu + p.epsilon * p.lambda_rate;
            const double revenue_rate =
                -ctl.c_l * (nu + p.lambda_rate) + p.kappa * perm;
            const double drift = revenue_rate * d_iota + nu * d_q + perm * d_s -
                                 ((s + p.eta * nu) * nu - ctl.c_l * nu) * d_x +
                                 0.5 * p.sigma * p.sigma * d2s;

            double jump = 0.0;
            const double arrival_gain = std::exp(p.k_theta * nu);
            for (int i = 0; i < M; ++i)
                jump += pools[i].theta * arrival_gain *
                        (ev[bundle_of[k][c]][i] - v0 - ctl.u[i]);
            out(o++) = drift + bracket + jump;
        }
    }
    return out;
}

double evaluate_operator(const RowVectorXd& state, const ExchangeControls& ctrl,
                         const CriticFn& critic, const MarketParams& p,
                         const std::vector<DarkPoolSpec>& pools,
                         const TrainConfig& cfg) {
    MatrixXd states(1, 5);
    states.row(0) = state;
    return evaluate_operator_multi(states, {{ctrl}}, critic, p, pools, cfg)(0);
}

std::vector<ExchangeControls> actor_controls(nn::Actor& actor, const MatrixXd& states) {
    const nn::ActorOutput out = actor.forward(states, false);
    const int K = static_cast<int>(states.rows());
    const int M = actor.n_pools;
    std::vector<ExchangeControls> ctrls(K);
    for (int k = 0; k < K; ++k) {
        ctrls[k].c_l = out.c_l(k);
        ctrls[k].z = out.z(k);
        ctrls[k].c_d.resize(M);
        ctrls[k].u.resize(M);
        for (int i = 0; i < M; ++i) {
            ctrls[k].c_d[i] = out.c_d(k, i);
            ctrls[k].u[i] = out.u(k, i);
        }
    }
    return ctrls;
}

namespace {

// Shared by critic_loss and critic_step: Bellman targets with the terminal
// condition v(T, .) = iota enforced past the horizon.
VectorXd bellman_targets(const MatrixXd& states, nn::Critic& critic,
                         nn::Critic& target, nn::Actor& actor, const MarketParams& p,
                         const std::vector<DarkPoolSpec>& pools,
                         const TrainConfig& cfg) {
    const int K = static_cast<int>(states.rows());
    std::vector<ExchangeControls> ctrls = actor_controls(actor, states);
    std::vector<std::vector<ExchangeControls>> per_state(K);
    for (int k = 0; k < K; ++k) per_state[k] = {ctrls[k]};
    const VectorXd f =
        evaluate_operator_multi(states, per_state, wrap_critic(critic), p, pools, cfg);

    MatrixXd shifted = states;
    shifted.col(0).array() += cfg.dt;
    const VectorXd v_next = target.forward(shifted, false);

    VectorXd y(K);
    for (int k = 0; k < K; ++k) {
        const double t = states(k, 0);
        if (t + cfg.dt <= p.T)
            y(k) = v_next(k) + f(k) * cfg.dt;
        else
            y(k) = states(k, 4) + f(k) * (p.T - t);
    }
    return y;
}

}  // namespace

CriticLossResult critic_loss(const MatrixXd& states, nn::Critic& critic,
                             nn::Critic& target, nn::Actor& actor,
                             const MarketParams& p,
                             const std::vector<DarkPoolSpec>& pools,
                             const TrainConfig& cfg) {
    CriticLossResult res;
    res.y = bellman_targets(states, critic, target, actor, p, pools, cfg);
    res.residual = res.y - critic.forward(states, false);
    res.loss = res.residual.squaredNorm() / static_cast<double>(states.rows());
    return res;
}

double actor_loss(const MatrixXd& states, nn::Critic& critic, nn::Actor& actor,
                  const MarketParams& p, const std::vector<DarkPoolSpec>& pools,
                  const TrainConfig& cfg) {
    const int K = static_cast<int>(states.rows());
    std::vector<ExchangeControls> ctrls = actor_controls(actor, states);
    std::vector<std::vector<ExchangeControls>> per_state(K);
    for (int k = 0; k < K; ++k) per_state[k] = {ctrls[k]};
    const VectorXd f =
        evaluate_operator_multi(states, per_state, wrap_critic(critic), p, pools, cfg);
    return -f.mean();
}

double critic_step(const MatrixXd& states, nn::Critic& critic, nn::Critic& target,
                   nn::Actor& actor, nn::Adam& opt, const MarketParams& p,
                   const std::vector<DarkPoolSpec>& pools, const TrainConfig& cfg) {
    const int K = static_cast<int>(states.rows());
    const VectorXd y = bellman_targets(states, critic, target, actor, p, pools, cfg);

    // targets are expensive (operator evaluation); descending on them more
    // than once per epoch is nearly free and sharpens the fit
    auto params = critic.params();
    double first_loss = 0.0;
    for (int it = 0; it < cfg.critic_inner; ++it) {
        nn::zero_grads(params);
        const VectorXd v = critic.forward(states, true);
        const VectorXd residual = v - y;
        if (it == 0) first_loss = residual.squaredNorm() / K;
        critic.backward(residual * (2.0 / K));
        opt.step(params);
    }
    return first_loss;
}

double actor_step(const MatrixXd& states, nn::Critic& critic, nn::Actor& actor,
                  nn::Adam& opt, const MarketParams& p,
                  const std::vector<DarkPoolSpec>& pools, const TrainConfig& cfg) {
    const int K = static_cast<int>(states.rows());
    const int M = static_cast<int>(pools.size());

    // train-mode forward: caches set for backward, controls taken from it
    auto params = actor.params();
    nn::zero_grads(params);
    const nn::ActorOutput out = actor.forward(states, true);

    // perturbation layout per state: base, then +- per control output
    const int n_ctl = 2 + 2 * M;  // c_l, c_d[i], z, u[i]
    std::vector<std::vector<ExchangeControls>> per_state(K);
    for (int k = 0; k < K; ++k) {
        ExchangeControls base;
        base.c_l = out.c_l(k);
        base.z = out.z(k);
        base.c_d.resize(M);
        base.u.resize(M);
        for (int i = 0; i < M; ++i) {
            base.c_d[i] = out.c_d(k, i);
            base.u[i] = out.u(k, i);
        }
        auto& list = per_state[k];
        list.reserve(1 + 2 * n_ctl);
        list.push_back(base);
        auto push_pair = [&](auto&& set, double step) {
            ExchangeControls up = base, dn = base;
            set(up, step);
            set(dn, -step);
            list.push_back(up);
            list.push_back(dn);
        };
        push_pair([](ExchangeControls& c, double d) { c.c_l += d; }, cfg.fee_step);
        for (int i = 0; i < M; ++i)
            push_pair([i](ExchangeControls& c, double d) { c.c_d[i] += d; },
                      cfg.fee_step);
        push_pair([](ExchangeControls& c, double d) { c.z += d; }, cfg.z_step);
        for (int i = 0; i < M; ++i)
            push_pair([i](ExchangeControls& c, double d) { c.u[i] += d; }, cfg.u_step);
    }

    const VectorXd f =
        evaluate_operator_multi(states, per_state, wrap_critic(critic), p, pools, cfg);

    VectorXd d_cl(K), d_z(K);
    MatrixXd d_cd(K, M), d_u(K, M);
    double loss = 0.0;
    const int stride = 1 + 2 * n_ctl;
    for (int k = 0; k < K; ++k) {
        const long b = static_cast<long>(k) * stride;
        loss -= f(b) / K;
        auto fd = [&](int slot, double step) {
            return (f(b + 1 + 2 * slot) - f(b + 2 + 2 * slot)) / (2.0 * step);
        };
        // dL/d output = -(1/K) dF/d output
        d_cl(k) = -fd(0, cfg.fee_step) / K;
        for (int i = 0; i < M; ++i) d_cd(k, i) = -fd(1 + i, cfg.fee_step) / K;
        d_z(k) = -fd(1 + M, cfg.z_step) / K;
        for (int i = 0; i < M; ++i) d_u(k, i) = -fd(2 + M + i, cfg.u_step) / K;
    }

    actor.backward(d_cl, d_cd, d_z, d_u);
    opt.step(params);
    // extra steps reuse the operator gradient to traverse the fee sigmoids
    // (re-linearized through the heads each step); the z/u heads sit at
    // interior optima where a reused gradient would just oscillate
    const VectorXd zero_z = VectorXd::Zero(K);
    const MatrixXd zero_u = MatrixXd::Zero(K, M);
    for (int it = 1; it < cfg.actor_inner; ++it) {
        nn::zero_grads(params);
        actor.forward(states, true);
        actor.backward(d_cl, d_cd, zero_z, zero_u);
        opt.step(params);
    }
    return loss;
}

MatrixXd sample_batch(const TrainConfig& cfg, const MarketParams& p, Rng& rng) {
    const int K = cfg.batch_size;
    const int n_term = static_cast<int>(std::lround(cfg.terminal_frac * K));
    MatrixXd states(K, 5);
    for (int k = 0; k < K; ++k) {
        states(k, 0) = k >= K - n_term ? p.T : p.T * rng.uniform();
        states(k, 1) = cfg.q_bound * rng.uniform();
        states(k, 2) = cfg.s_bound * rng.uniform();
        states(k, 3) = cfg.x_bound * rng.uniform();
        states(k, 4) = cfg.iota_bound * rng.uniform();
    }
    return states;
}

Eigen::RowVectorXd input_scale(const TrainConfig& cfg, const MarketParams& p) {
    Eigen::RowVectorXd scale(5);
    scale << 1.0 / p.T, 1.0 / cfg.q_bound, 1.0 / cfg.s_bound, 1.0 / cfg.x_bound,
        1.0 / cfg.iota_bound;
    return scale;
}

TrainResult train(const TrainConfig& cfg, const MarketParams& p,
                  const std::vector<DarkPoolSpec>& pools) {
    cfg.validate();
    p.validate();
    TrainResult res;
    Rng init_rng(mix_seed(cfg.seed, 0));
    res.critic.init(init_rng);
    res.actor.init(static_cast<int>(pools.size()), p.fee_cap, init_rng);
    res.target.init(init_rng);
    const Eigen::RowVectorXd scale = input_scale(cfg, p);
    res.critic.in_scale = scale;
    res.actor.in_scale = scale;
    res.actor.z_scale = cfg.z_scale;
    nn::copy_into(res.target, res.critic);

    nn::Adam critic_opt, actor_opt;
    critic_opt.lr = cfg.lr;
    actor_opt.lr = cfg.lr;

    std::ofstream log;
    if (!cfg.log_path.empty()) {
        log.open(cfg.log_path);
        if (!log) throw std::runtime_error("train: cannot write " + cfg.log_path);
        log << "epoch,critic_loss,actor_loss\n";
        log.precision(12);
    }

    for (int e = 0; e < cfg.epochs; ++e) {
        if (cfg.lr_final > 0.0 && cfg.epochs > 1) {
            // anneal the critic only; the actor's bounded heads need a
            // constant step size to traverse their squashing functions
            const double frac = static_cast<double>(e) / (cfg.epochs - 1);
            critic_opt.lr = cfg.lr * std::pow(cfg.lr_final / cfg.lr, frac);
        }
        Rng rng(mix_seed(cfg.seed, 1 + static_cast<std::uint64_t>(e)));
        const MatrixXd batch = sample_batch(cfg, p, rng);
        double closs = std::nan(""), aloss = std::nan("");
        if (e % cfg.k_critic == 0) {
            closs = critic_step(batch, res.critic, res.target, res.actor, critic_opt,
                                p, pools, cfg);
            if (!std::isfinite(closs))
                throw std::runtime_error("train: critic loss diverged at epoch " +
                                         std::to_string(e));
            res.critic_losses.push_back(closs);
        }
        if (e % cfg.k_actor == 0) {
            aloss = actor_step(batch, res.critic, res.actor, actor_opt, p, pools, cfg);
            if (!std::isfinite(aloss))
                throw std::runtime_error("train: actor loss diverged at epoch " +
                                         std::to_string(e));
            res.actor_losses.push_back(aloss);
        }
        if (e % cfg.k_target == 0) nn::soft_update(res.target, res.critic, cfg.tau);
        if (log.is_open()) log << e << "," << closs << "," << aloss << "\n";
    }
    return res;
}

FeeSchedule extract_fee_schedule(std::shared_ptr<nn::Actor> actor) {
    auto eval = [actor](double t, const ExchangeState& st) {
        MatrixXd row(1, 5);
        row << t, st.trader.q, st.trader.s, st.trader.x, st.iota;
        return actor->forward(row, false);
    };
    FeeSchedule f;
    f.time_only = false;
    f.lit_fee = [eval](double t, const ExchangeState& st) {
        return eval(t, st).c_l(0);
    };
    for (int i = 0; i < actor->n_pools; ++i)
        f.dark_fees.push_back([eval, i](double t, const ExchangeState& st) {
            return eval(t, st).c_d(0, i);
        });
    return f;
}

ActorExposures extract_exposures(std::shared_ptr<nn::Actor> actor) {
    auto eval = [actor](double t, const ExchangeState& st) {
        MatrixXd row(1, 5);
        row << t, st.trader.q, st.trader.s, st.trader.x, st.iota;
        return actor->forward(row, false);
    };
    ActorExposures e;
    e.z = [eval](double t, const ExchangeState& st) { return eval(t, st).z(0); };
    for (int i = 0; i < actor->n_pools; ++i)
        e.u.push_back([eval, i](double t, const ExchangeState& st) {
            return eval(t, st).u(0, i);
        });
    return e;
}

}  // namespace darkpool
