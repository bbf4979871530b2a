#pragma once

#include <Eigen/Dense>
#include <array>
#include <string>
#include <vector>

#include "darkpool/rng.hpp"

namespace darkpool::nn {

using Eigen::MatrixXd;
using Eigen::RowVectorXd;
using Eigen::VectorXd;

// Parameter tensor with gradient and Adam moments.
struct Tensor {
    MatrixXd value, grad, m, v;
    void init(int rows, int cols) {
        value.setZero(rows, cols);
        grad.setZero(rows, cols);
        m.setZero(rows, cols);
        v.setZero(rows, cols);
    }
};

struct Adam {
    double lr = 1e-3, beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    long step_count = 0;

    void step(std::vector<Tensor*>& params);
};

// One hidden block: affine -> batch norm -> leaky rectifier (slope 0.01).
struct HiddenBlock {
    Tensor W, b, bn_gamma, bn_beta;
    RowVectorXd running_mean, running_var;
    double bn_momentum = 0.1, bn_eps = 1e-5;

    // forward caches (train mode)
    MatrixXd in, z, xhat, out;
    RowVectorXd mean, inv_std;

    void init(int in_dim, int out_dim, Rng& rng);
    MatrixXd forward(const MatrixXd& x, bool train);
    MatrixXd backward(const MatrixXd& dout);  // returns d(in), fills grads
};

struct LinearOut {
    Tensor W, b;
    MatrixXd in;

    void init(int in_dim, int out_dim, Rng& rng);  // U[-3e-3, 3e-3]
    MatrixXd forward(const MatrixXd& x);
    MatrixXd backward(const MatrixXd& dout);
};

// Critic: (t,q,s,x,iota) -> scalar. 3 hidden x 64 with batch norm + leaky
// rectifier, linear output. Inputs are multiplied by in_scale first so
// dimensions with very different ranges contribute comparably.
struct Critic {
    RowVectorXd in_scale = RowVectorXd::Ones(5);
    std::array<HiddenBlock, 3> hidden;
    LinearOut out;

    void init(Rng& rng);
    VectorXd forward(const MatrixXd& states, bool train);
    void backward(const VectorXd& dvalues);  // after a train-mode forward
    std::vector<Tensor*> params();
    std::vector<const Tensor*> params() const;
};

struct ActorOutput {
    VectorXd c_l;   // [0, fee_cap]
    MatrixXd c_d;   // K x M, [0, fee_cap]
    VectorXd z;     // [-z_scale, z_scale]
    MatrixXd u;     // K x M, >= 0 (softplus, beta = 0.1)
};

// Actor: shared 2 x 64 base, four heads (lit fee, dark fees, diffusion
// exposure, jump exposures).
struct Actor {
    int n_pools = 1;
    double fee_cap = 0.01, z_scale = 1.0, softplus_beta = 0.1;
    RowVectorXd in_scale = RowVectorXd::Ones(5);
    std::array<HiddenBlock, 2> base;
    LinearOut head_cl, head_cd, head_z, head_u;

    // forward caches
    MatrixXd base_out;
    ActorOutput last;

    void init(int pools, double cap, Rng& rng);
    ActorOutput forward(const MatrixXd& states, bool train);
    // gradients w.r.t. the post-activation outputs
    void backward(const VectorXd& d_cl, const MatrixXd& d_cd, const VectorXd& d_z,
                  const MatrixXd& d_u);
    std::vector<Tensor*> params();
    std::vector<const Tensor*> params() const;
};

// target <- (1 - tau) target + tau live, including batch-norm running stats.
void soft_update(Critic& target, const Critic& live, double tau);

// Hard parameter copy (used to initialize the target network).
void copy_into(Critic& dst, const Critic& src);

void zero_grads(std::vector<Tensor*> params);

// Versioned text checkpoints.
void save_critic(const Critic& c, const std::string& path);
void load_critic(Critic& c, const std::string& path);
void save_actor(const Actor& a, const std::string& path);
void load_actor(Actor& a, const std::string& path);

}  // namespace darkpool::nn
