#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "darkpool/fee_train.hpp"
#include "darkpool/fill_law.hpp"
#include "darkpool/trader.hpp"
#include "doctest.h"

using namespace darkpool;
using Eigen::MatrixXd;
using Eigen::RowVectorXd;
using Eigen::VectorXd;

namespace {

TrainConfig test_cfg() {
    TrainConfig cfg;
    cfg.batch_size = 16;
    cfg.jump_quad_nodes = 24;
    return cfg;
}

ExchangeControls test_controls() {
    ExchangeControls c;
    c.c_l = 0.005;
    c.c_d = {0.002, 0.004};
    c.z = -0.01;
    c.u = {0.002, 0.001};
    return c;
}

RowVectorXd test_state() {
    RowVectorXd s(5);
    s << 0.4, 0.8, 1.1, 0.7, 0.02;
    return s;
}

// Quadratic-plus-cubic test critic with analytic derivatives and a jump
// expectation reducible to the closed-form fill moments.
struct PolyCritic {
    double a0 = 0.3, a1 = 1.4, a2 = -0.7, a3 = 0.5, a4 = 2.1, a5 = -0.9, a6 = 0.4,
           a7 = 3.0;

    double operator()(double t, double q, double s, double x, double iota) const {
        (void)t;
        return a0 + a1 * iota + a2 * q + a3 * x + a4 * q * q + a5 * s * s +
               a6 * s * s * s + a7 * x * iota;
    }

    CriticFn fn() const {
        return [*this](const MatrixXd& pts) {
            VectorXd v(pts.rows());
            for (long r = 0; r < pts.rows(); ++r)
                v(r) = (*this)(pts(r, 0), pts(r, 1), pts(r, 2), pts(r, 3), pts(r, 4));
            return v;
        };
    }
};

// Symbolic operator value for PolyCritic under explicit controls.
double symbolic_operator(const PolyCritic& c, const RowVectorXd& st,
                         const ExchangeControls& ctl, const MarketParams& p,
                         const std::vector<DarkPoolSpec>& pools) {
    const double t = st(0), q = st(1), s = st(2), x = st(3), iota = st(4);
    const auto alloc = optimal_dark_alloc_exp(q, pools, ctl.c_d, p.rho, p.alpha, p.k_c);
    const double nu = optimal_lit_rate_exp(q, ctl.c_l, ctl.u, p, alloc.ell, pools,
                                           ctl.c_d);

    const double d_iota = c.a1 + c.a7 * x;
    const double d_q = c.a2 + 2.0 * c.a4 * q;
    const double d_s = 2.0 * c.a5 * s + 3.0 * c.a6 * s * s;
    const double d_x = c.a3 + c.a7 * iota;
    const double d_ss = 2.0 * c.a5 + 6.0 * c.a6 * s;

    const FeeVec fees{ctl.c_l, ctl.c_d};
    const double bracket =
        driver_h(t, q, ctl.z, ctl.u, nu, alloc.ell, fees, p, pools) -
        (p.gamma * nu / p.sigma) * ctl.z;
    const double perm = p.gamma * nu + p.epsilon * p.lambda_rate;
    const double revenue = -ctl.c_l * (nu + p.lambda_rate) + p.kappa * perm;
    double value = revenue * d_iota + nu * d_q + perm * d_s -
                   ((s + p.eta * nu) * nu - ctl.c_l * nu) * d_x +
                   0.5 * p.sigma * p.sigma * d_ss + bracket;

    for (std::size_t i = 0; i < pools.size(); ++i) {
        const double cd = ctl.c_d[i];
        const double em = expected_fill(pools[i], alloc.ell[i], cd, p.k_c);
        const double em2 =
            2.0 * q * em - exp_min_linear_moment(pools[i], alloc.ell[i], cd, q, p.k_c);
        const double coeff_m = c.a1 * cd - c.a2 + c.a3 * s - 2.0 * c.a4 * q +
                               c.a7 * (x * cd + iota * s);
        const double coeff_m2 = c.a4 + c.a7 * s * cd;
        const double ev = coeff_m * em + coeff_m2 * em2;
        value += pools[i].theta * std::exp(p.k_theta * nu) * (ev - ctl.u[i]);
    }
    return value;
}

}  // namespace

TEST_CASE("operator: constant critic leaves only the driver bracket and -u term") {
    const ModelPreset preset = load_preset("table1");
    const TrainConfig cfg = test_cfg();
    const ExchangeControls ctl = test_controls();
    const RowVectorXd st = test_state();

    CriticFn constant = [](const MatrixXd& pts) {
        return VectorXd::Constant(pts.rows(), 7.3);
    };
    const double got =
        evaluate_operator(st, ctl, constant, preset.params, preset.pools, cfg);

    const auto& p = preset.params;
    const double q = st(1);
    const auto alloc =
        optimal_dark_alloc_exp(q, preset.pools, ctl.c_d, p.rho, p.alpha, p.k_c);
    const double nu =
        optimal_lit_rate_exp(q, ctl.c_l, ctl.u, p, alloc.ell, preset.pools, ctl.c_d);
    const FeeVec fees{ctl.c_l, ctl.c_d};
    double want = driver_h(st(0), q, ctl.z, ctl.u, nu, alloc.ell, fees, p,
                           preset.pools) -
                  (p.gamma * nu / p.sigma) * ctl.z;
    for (std::size_t i = 0; i < preset.pools.size(); ++i)
        want -= preset.pools[i].theta * std::exp(p.k_theta * nu) * ctl.u[i];
    CHECK(got == doctest::Approx(want).epsilon(1e-10));
}

TEST_CASE("operator: affine critic v = iota recovers the exchange revenue rate") {
    const ModelPreset preset = load_preset("table1");
    const TrainConfig cfg = test_cfg();
    const ExchangeControls ctl = test_controls();
    const RowVectorXd st = test_state();

    CriticFn iota_critic = [](const MatrixXd& pts) { return VectorXd(pts.col(4)); };
    const double got =
        evaluate_operator(st, ctl, iota_critic, preset.params, preset.pools, cfg);

    const auto& p = preset.params;
    const double q = st(1);
    const auto alloc =
        optimal_dark_alloc_exp(q, preset.pools, ctl.c_d, p.rho, p.alpha, p.k_c);
    const double nu =
        optimal_lit_rate_exp(q, ctl.c_l, ctl.u, p, alloc.ell, preset.pools, ctl.c_d);
    const FeeVec fees{ctl.c_l, ctl.c_d};
    double want = -ctl.c_l * (nu + p.lambda_rate) +
                  p.kappa * (p.gamma * nu + p.epsilon * p.lambda_rate) +
                  driver_h(st(0), q, ctl.z, ctl.u, nu, alloc.ell, fees, p,
                           preset.pools) -
                  (p.gamma * nu / p.sigma) * ctl.z;
    for (std::size_t i = 0; i < preset.pools.size(); ++i) {
        const double fill = expected_fill(preset.pools[i], alloc.ell[i], ctl.c_d[i],
                                          p.k_c);
        want += preset.pools[i].theta * std::exp(p.k_theta * nu) *
                (ctl.c_d[i] * fill - ctl.u[i]);
    }
    CHECK(got == doctest::Approx(want).epsilon(1e-8));
}

TEST_CASE("operator: polynomial critic matches symbolic value with O(h^2) error") {
    const ModelPreset preset = load_preset("table1");
    const ExchangeControls ctl = test_controls();
    const RowVectorXd st = test_state();
    const PolyCritic pc;

    const double want = symbolic_operator(pc, st, ctl, preset.params, preset.pools);

    TrainConfig cfg = test_cfg();
    cfg.fd_step = 1e-3;
    const double v_h =
        evaluate_operator(st, ctl, pc.fn(), preset.params, preset.pools, cfg);
    cfg.fd_step = 5e-4;
    const double v_h2 =
        evaluate_operator(st, ctl, pc.fn(), preset.params, preset.pools, cfg);

    const double err_h = std::abs(v_h - want);
    const double err_h2 = std::abs(v_h2 - want);
    CHECK(err_h < 1e-4);
    CHECK(err_h / err_h2 == doctest::Approx(4.0).epsilon(0.15));
}

TEST_CASE("operator: one-sided differences at the box boundary stay accurate") {
    const ModelPreset preset = load_preset("table1");
    const TrainConfig cfg = test_cfg();
    const ExchangeControls ctl = test_controls();
    const PolyCritic pc;

    RowVectorXd st(5);
    st << 0.4, 1.2, 0.0, 2.0, 0.0;  // q at the top, s/x/iota on boundaries
    const double want = symbolic_operator(pc, st, ctl, preset.params, preset.pools);
    const double got =
        evaluate_operator(st, ctl, pc.fn(), preset.params, preset.pools, cfg);
    CHECK(got == doctest::Approx(want).epsilon(5e-3));
}

TEST_CASE("critic loss: terminal branch anchors to iota; permutation invariant") {
    const ModelPreset preset = load_preset("table1");
    TrainConfig cfg = test_cfg();
    cfg.jump_quad_nodes = 8;
    Rng rng(5);
    nn::Critic critic, target;
    critic.init(rng);
    target.init(rng);
    nn::Actor actor;
    actor.init(2, preset.params.fee_cap, rng);

    MatrixXd states(2, 5);
    states << preset.params.T, 0.8, 1.1, 0.7, 0.02,  // terminal
        preset.params.T, 0.3, 0.9, 0.4, 0.01;        // terminal
    const auto res = critic_loss(states, critic, target, actor, preset.params,
                                 preset.pools, cfg);
    // at t = T the target is exactly iota
    const VectorXd v = critic.forward(states, false);
    CHECK(res.y(0) == doctest::Approx(0.02).epsilon(1e-12));
    CHECK(res.y(1) == doctest::Approx(0.01).epsilon(1e-12));
    const double want =
        0.5 * (std::pow(0.02 - v(0), 2) + std::pow(0.01 - v(1), 2));
    CHECK(res.loss == doctest::Approx(want).epsilon(1e-12));

    // interior batch: loss invariant under row permutation
    Rng srng(9);
    TrainConfig scfg = cfg;
    scfg.batch_size = 6;
    scfg.terminal_frac = 0.0;
    MatrixXd batch = sample_batch(scfg, preset.params, srng);
    const double l1 =
        critic_loss(batch, critic, target, actor, preset.params, preset.pools, cfg)
            .loss;
    MatrixXd perm(6, 5);
    const int order[6] = {4, 2, 0, 5, 1, 3};
    for (int i = 0; i < 6; ++i) perm.row(i) = batch.row(order[i]);
    const double l2 =
        critic_loss(perm, critic, target, actor, preset.params, preset.pools, cfg)
            .loss;
    CHECK(l1 == doctest::Approx(l2).epsilon(1e-12));
}

TEST_CASE("actor loss: equals minus the mean operator value") {
    const ModelPreset preset = load_preset("table1");
    TrainConfig cfg = test_cfg();
    cfg.jump_quad_nodes = 8;
    Rng rng(7);
    nn::Critic critic;
    critic.init(rng);
    nn::Actor actor;
    actor.init(2, preset.params.fee_cap, rng);

    Rng srng(8);
    TrainConfig scfg = cfg;
    scfg.batch_size = 5;
    MatrixXd states = sample_batch(scfg, preset.params, srng);

    const double loss =
        actor_loss(states, critic, actor, preset.params, preset.pools, cfg);
    auto ctrls = actor_controls(actor, states);
    double mean = 0.0;
    for (int k = 0; k < 5; ++k)
        mean += evaluate_operator(states.row(k), ctrls[k], wrap_critic(critic),
                                  preset.params, preset.pools, cfg) /
                5.0;
    CHECK(loss == doctest::Approx(-mean).epsilon(1e-10));
}

TEST_CASE("freeze discipline: each step leaves the other network bit-identical") {
    const ModelPreset preset = load_preset("table1");
    TrainConfig cfg = test_cfg();
    cfg.jump_quad_nodes = 6;
    Rng rng(13);
    nn::Critic critic, target;
    critic.init(rng);
    nn::copy_into(target, critic);
    nn::Actor actor;
    actor.init(2, preset.params.fee_cap, rng);
    nn::Adam copt, aopt;

    Rng srng(14);
    TrainConfig scfg = cfg;
    scfg.batch_size = 8;
    MatrixXd batch = sample_batch(scfg, preset.params, srng);

    auto snapshot = [](const std::vector<const nn::Tensor*>& ps) {
        std::vector<MatrixXd> vals;
        for (auto* t : ps) vals.push_back(t->value);
        return vals;
    };
    auto identical = [](const std::vector<MatrixXd>& a,
                        const std::vector<MatrixXd>& b) {
        for (std::size_t i = 0; i < a.size(); ++i)
            if ((a[i].array() != b[i].array()).any()) return false;
        return true;
    };

    const auto actor_before = snapshot(
        static_cast<const nn::Actor&>(actor).params());
    critic_step(batch, critic, target, actor, copt, preset.params, preset.pools, cfg);
    CHECK(identical(actor_before,
                    snapshot(static_cast<const nn::Actor&>(actor).params())));

    const auto critic_before = snapshot(
        static_cast<const nn::Critic&>(critic).params());
    actor_step(batch, critic, actor, aopt, preset.params, preset.pools, cfg);
    CHECK(identical(critic_before,
                    snapshot(static_cast<const nn::Critic&>(critic).params())));
}

TEST_CASE("descent: one step lowers each loss on a fixed batch") {
    const ModelPreset preset = load_preset("table1");
    TrainConfig cfg = test_cfg();
    cfg.jump_quad_nodes = 6;
    Rng rng(17);
    nn::Critic critic, target;
    critic.init(rng);
    nn::copy_into(target, critic);
    nn::Actor actor;
    actor.init(2, preset.params.fee_cap, rng);
    nn::Adam copt, aopt;

    Rng srng(18);
    TrainConfig scfg = cfg;
    scfg.batch_size = 32;
    MatrixXd batch = sample_batch(scfg, preset.params, srng);

    const double a0 = actor_loss(batch, critic, actor, preset.params, preset.pools,
                                 cfg);
    actor_step(batch, critic, actor, aopt, preset.params, preset.pools, cfg);
    const double a1 = actor_loss(batch, critic, actor, preset.params, preset.pools,
                                 cfg);
    CHECK(a1 < a0);

    const double c0 = critic_loss(batch, critic, target, actor, preset.params,
                                  preset.pools, cfg)
                          .loss;
    for (int i = 0; i < 10; ++i)
        critic_step(batch, critic, target, actor, copt, preset.params, preset.pools,
                    cfg);
    const double c1 = critic_loss(batch, critic, target, actor, preset.params,
                                  preset.pools, cfg)
                          .loss;
    CHECK(c1 < c0);
}

TEST_CASE("train: deterministic in the seed") {
    const ModelPreset preset = load_preset("table1");
    TrainConfig cfg;
    cfg.batch_size = 16;
    cfg.epochs = 12;
    cfg.jump_quad_nodes = 6;
    cfg.seed = 33;

    const TrainResult r1 = train(cfg, preset.params, preset.pools);
    const TrainResult r2 = train(cfg, preset.params, preset.pools);
    CHECK(r1.critic_losses == r2.critic_losses);
    CHECK(r1.actor_losses == r2.actor_losses);
    auto p1 = static_cast<const nn::Critic&>(r1.critic).params();
    auto p2 = static_cast<const nn::Critic&>(r2.critic).params();
    for (std::size_t i = 0; i < p1.size(); ++i)
        CHECK((p1[i]->value.array() == p2[i]->value.array()).all());
}

TEST_CASE("fee schedule extraction: bounded fees, finite exposures") {
    const ModelPreset preset = load_preset("table1");
    Rng rng(23);
    auto actor = std::make_shared<nn::Actor>();
    actor->init(2, preset.params.fee_cap, rng);

    const FeeSchedule fees = extract_fee_schedule(actor);
    const ActorExposures exp = extract_exposures(actor);
    CHECK_FALSE(fees.time_only);

    Rng srng(24);
    for (int i = 0; i < 200; ++i) {
        ExchangeState st;
        st.trader.t = srng.uniform();
        st.trader.q = 1.2 * srng.uniform();
        st.trader.s = 2.0 * srng.uniform();
        st.trader.x = 2.0 * srng.uniform();
        st.iota = 0.05 * srng.uniform();
        const double cl = fees.lit_fee(st.trader.t, st);
        CHECK(cl >= 0.0);
        CHECK(cl <= 0.01);
        for (const auto& f : fees.dark_fees) {
            const double cd = f(st.trader.t, st);
            CHECK(cd >= 0.0);
            CHECK(cd <= 0.01);
        }
        CHECK(std::isfinite(exp.z(st.trader.t, st)));
        for (const auto& u : exp.u) CHECK(u(st.trader.t, st) >= 0.0);
    }
}
