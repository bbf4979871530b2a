#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "darkpool/nn.hpp"
#include "darkpool/params.hpp"
#include "darkpool/state.hpp"

namespace darkpool {

struct TrainConfig {
    int batch_size = 200;
    double lr = 1e-3;
    double lr_final = 0.0;  // if > 0, geometric decay from lr to lr_final
    double dt = 1e-3;       // Bellman time step
    double fd_step = 1e-3;  // critic derivative step h
    int epochs = 5000;
    int k_critic = 1;      // critic update period (epochs)
    int k_actor = 2;       // actor update period
    int critic_inner = 1;  // descent steps per critic update (fixed targets)
    int actor_inner = 1;   // ascent steps per actor update (fixed control gradient)
    int k_target = 1;  // target soft-update period
    double tau = 0.01;
    // sampling box [0,T] x [0,q_bound] x [0,s_bound] x [0,x_bound] x [0,iota_bound]
    double q_bound = 1.2, s_bound = 2.0, x_bound = 2.0, iota_bound = 0.05;
    double terminal_frac = 0.4;  // share of each batch pinned to t = T
    int jump_quad_nodes = 8;      // Gauss-Legendre nodes for the jump expectation
    // finite-difference steps for the actor gradient, per head
    double fee_step = 1e-4, z_step = 1e-3, u_step = 1e-3;
    // actor z-head range; sized to the diffusion exposures that actually
    // occur (|z*| <= sigma q_bound), which keeps the head well conditioned
    double z_scale = 0.05;
    std::uint64_t seed = 1;
    std::string log_path;  // optional per-epoch CSV (epoch, critic loss, actor loss)

    void validate() const;
};

// Exchange controls at one state: fees plus BSDE exposures.
struct ExchangeControls {
    double c_l = 0.0;
    std::vector<double> c_d;
    double z = 0.0;
    std::vector<double> u;
};

// Critic as a black-box batch map (rows are (t,q,s,x,iota) states).
using CriticFn = std::function<Eigen::VectorXd(const Eigen::MatrixXd&)>;

CriticFn wrap_critic(nn::Critic& critic);

// Reduced-HJB operator F~ at one state under given exchange controls. The
// trader's best responses (nu, ell) are computed internally; critic
// derivatives use central differences of step cfg.fd_step (one-sided at the
// sampling-box boundary); the jump expectation integrates the fill law by
// composite Gauss-Legendre panels in the standardized size variable plus the
// exact atom at ell.
double evaluate_operator(const Eigen::RowVectorXd& state, const ExchangeControls& ctrl,
                         const CriticFn& critic, const MarketParams& p,
                         const std::vector<DarkPoolSpec>& pools,
                         const TrainConfig& cfg);

// Batched operator: one critic call over a deterministic point layout. For
// each state k, evaluates F~ under every control set in ctrls[k] (the
// derivative stencil is shared across control sets of the same state).
// Returns values flattened in (state, control) order.
Eigen::VectorXd evaluate_operator_multi(
    const Eigen::MatrixXd& states, const std::vector<std::vector<ExchangeControls>>& ctrls,
    const CriticFn& critic, const MarketParams& p,
    const std::vector<DarkPoolSpec>& pools, const TrainConfig& cfg);

// Actor outputs at given states, as per-row control structs.
std::vector<ExchangeControls> actor_controls(nn::Actor& actor,
                                             const Eigen::MatrixXd& states);

// Mean squared Bellman residual; the t+dt term uses the target network (or
// the terminal condition iota past the horizon, with the operator scaled by
// the remaining time). Pure evaluation in eval mode.
struct CriticLossResult {
    double loss = 0.0;
    Eigen::VectorXd y;         // targets
    Eigen::VectorXd residual;  // y - critic(t, .)
};
CriticLossResult critic_loss(const Eigen::MatrixXd& states, nn::Critic& critic,
                             nn::Critic& target, nn::Actor& actor,
                             const MarketParams& p,
                             const std::vector<DarkPoolSpec>& pools,
                             const TrainConfig& cfg);

// L_pi = -mean F~ under the actor's controls.
double actor_loss(const Eigen::MatrixXd& states, nn::Critic& critic, nn::Actor& actor,
                  const MarketParams& p, const std::vector<DarkPoolSpec>& pools,
                  const TrainConfig& cfg);

// One critic gradient step (semi-gradient: targets held fixed) and one actor
// gradient step (central finite differences of F~ in the control outputs,
// chained through the heads). Exposed for the unit tests.
double critic_step(const Eigen::MatrixXd& states, nn::Critic& critic,
                   nn::Critic& target, nn::Actor& actor, nn::Adam& opt,
                   const MarketParams& p, const std::vector<DarkPoolSpec>& pools,
                   const TrainConfig& cfg);
double actor_step(const Eigen::MatrixXd& states, nn::Critic& critic, nn::Actor& actor,
                  nn::Adam& opt, const MarketParams& p,
                  const std::vector<DarkPoolSpec>& pools, const TrainConfig& cfg);

// Uniform batch from the sampling box; the last terminal_frac rows are pinned
// to t = T.
Eigen::MatrixXd sample_batch(const TrainConfig& cfg, const MarketParams& p, Rng& rng);

// Per-input scaling (reciprocal sampling bounds) applied inside the networks.
Eigen::RowVectorXd input_scale(const TrainConfig& cfg, const MarketParams& p);

struct TrainResult {
    nn::Critic critic;
    nn::Critic target;
    nn::Actor actor;
    std::vector<double> critic_losses;  // one entry per critic step
    std::vector<double> actor_losses;   // one entry per actor step
};

// Algorithm: per epoch draw a fresh batch; critic step every k_critic epochs,
// actor step every k_actor, target soft update every k_target. Deterministic
// given cfg.seed. Throws on NaN/inf loss.
TrainResult train(const TrainConfig& cfg, const MarketParams& p,
                  const std::vector<DarkPoolSpec>& pools);

// Wraps a trained actor as the state-dependent FeeSchedule consumed by the
// simulator.
FeeSchedule extract_fee_schedule(std::shared_ptr<nn::Actor> actor);

// BSDE exposure closures (z, u) from the trained actor, for compensation
// accrual along simulated paths.
struct ActorExposures {
    std::function<double(double t, const ExchangeState&)> z;
    std::vector<std::function<double(double t, const ExchangeState&)>> u;
};
ActorExposures extract_exposures(std::shared_ptr<nn::Actor> actor);

}  // namespace darkpool
