#include "darkpool/nn.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace darkpool::nn {

namespace {
constexpr double kLeakySlope = 0.01;

MatrixXd gaussian_matrix(int rows, int cols, Rng& rng) {
    MatrixXd m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = rng.gaussian();
    return m;
}

// Orthogonal init: thin QR of a Gaussian matrix, sign-fixed by diag(R).
MatrixXd orthogonal(int rows, int cols, Rng& rng) {
    const bool flip = rows < cols;
    const int r = flip ? cols : rows, c = flip ? rows : cols;
    MatrixXd a = gaussian_matrix(r, c, rng);
    Eigen::HouseholderQR<MatrixXd> qr(a);
    MatrixXd q = qr.householderQ() * MatrixXd::Identity(r, c);
    const MatrixXd rmat = qr.matrixQR().topRows(c).triangularView<Eigen::Upper>();
    for (int j = 0; j < c; ++j)
        if (rmat(j, j) < 0.0) q.col(j) = -q.col(j);
    return flip ? MatrixXd(q.transpose()) : q;
}
}  // namespace

void Adam::step(std::vector<Tensor*>& params) {
    ++step_count;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step_count));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step_count));
    for (Tensor* p : params) {
        p->m = beta1 * p->m + (1.0 - beta1) * p->grad;
        p->v = beta2 * p->v.array().matrix() +
               (1.0 - beta2) * p->grad.array().square().matrix();
        p->value.array() -=
            lr * (p->m.array() / bc1) / ((p->v.array() / bc2).sqrt() + eps);
    }
}

void zero_grads(std::vector<Tensor*> params) {
    for (Tensor* p : params) p->grad.setZero();
}

void HiddenBlock::init(int in_dim, int out_dim, Rng& rng) {
    W.init(out_dim, in_dim);
    W.value = orthogonal(out_dim, in_dim, rng);
    b.init(1, out_dim);
    bn_gamma.init(1, out_dim);
    bn_gamma.value.setOnes();
    bn_beta.init(1, out_dim);
    running_mean.setZero(out_dim);
    running_var.setOnes(out_dim);
}

MatrixXd HiddenBlock::forward(const MatrixXd& x, bool train) {
    const long k = x.rows();
    MatrixXd zz = x * W.value.transpose();
    zz.rowwise() += RowVectorXd(b.value.row(0));

    MatrixXd xh;
    if (train) {
        in = x;
        z = zz;
        mean = zz.colwise().mean();
        MatrixXd centered = zz.rowwise() - mean;
        RowVectorXd var = centered.array().square().colwise().mean();
        inv_std = (var.array() + bn_eps).sqrt().inverse();
        xhat = centered.array().rowwise() * inv_std.array();
        running_mean = (1.0 - bn_momentum) * running_mean + bn_momentum * mean;
        running_var = (1.0 - bn_momentum) * running_var + bn_momentum * var;
        xh = xhat;
    } else {
        RowVectorXd istd = (running_var.array() + bn_eps).sqrt().inverse();
        xh = (zz.rowwise() - running_mean).array().rowwise() * istd.array();
    }
    MatrixXd y = (xh.array().rowwise() * RowVectorXd(bn_gamma.value.row(0)).array())
                     .matrix();
    y.rowwise() += RowVectorXd(bn_beta.value.row(0));
    MatrixXd act = y.array().max(kLeakySlope * y.array());
    if (train) out = y;  // pre-activation of the rectifier
    (void)k;
    return act;
}

MatrixXd HiddenBlock::backward(const MatrixXd& dact) {
    // rectifier
    MatrixXd dy =
        (out.array() > 0.0).select(dact, kLeakySlope * dact.array().matrix());

    // batch norm (train-mode statistics)
    const double k = static_cast<double>(dy.rows());
    bn_gamma.grad.row(0) += (dy.array() * xhat.array()).colwise().sum().matrix();
    bn_beta.grad.row(0) += dy.colwise().sum();
    MatrixXd dxhat =
        dy.array().rowwise() * RowVectorXd(bn_gamma.value.row(0)).array();
    RowVectorXd sum_dxhat = dxhat.colwise().sum();
    RowVectorXd sum_dxhat_xhat = (dxhat.array() * xhat.array()).colwise().sum();
    MatrixXd dz =
        ((dxhat.array() * k).rowwise() - sum_dxhat.array()).matrix();
    dz.array() -= xhat.array().rowwise() * sum_dxhat_xhat.array();
    dz.array().rowwise() *= (inv_std.array() / k);

    // affine
    W.grad += dz.transpose() * in;
    b.grad.row(0) += dz.colwise().sum();
    return dz * W.value;
}

void LinearOut::init(int in_dim, int out_dim, Rng& rng) {
    W.init(out_dim, in_dim);
    b.init(1, out_dim);
    for (int i = 0; i < out_dim; ++i)
        for (int j = 0; j < in_dim; ++j)
            W.value(i, j) = 3e-3 * (2.0 * rng.uniform() - 1.0);
}

MatrixXd LinearOut::forward(const MatrixXd& x) {
    in = x;
    MatrixXd y = x * W.value.transpose();
    y.rowwise() += RowVectorXd(b.value.row(0));
    return y;
}

MatrixXd LinearOut::backward(const MatrixXd& dout) {
    W.grad += dout.transpose() * in;
    b.grad.row(0) += dout.colwise().sum();
    return dout * W.value;
}

void Critic::init(Rng& rng) {
    hidden[0].init(5, 64, rng);
    hidden[1].init(64, 64, rng);
    hidden[2].init(64, 64, rng);
    out.init(64, 1, rng);
}

VectorXd Critic::forward(const MatrixXd& states, bool train) {
    MatrixXd h = states.array().rowwise() * in_scale.array();
    for (auto& block : hidden) h = block.forward(h, train);
    return out.forward(h).col(0);
}

void Critic::backward(const VectorXd& dvalues) {
    MatrixXd d = out.backward(dvalues);
    for (int i = 2; i >= 0; --i) d = hidden[i].backward(d);
}

std::vector<Tensor*> Critic::params() {
    std::vector<Tensor*> p;
    for (auto& blk : hidden) {
        p.push_back(&blk.W);
        p.push_back(&blk.b);
        p.push_back(&blk.bn_gamma);
        p.push_back(&blk.bn_beta);
    }
    p.push_back(&out.W);
    p.push_back(&out.b);
    return p;
}

std::vector<const Tensor*> Critic::params() const {
    std::vector<const Tensor*> p;
    for (const auto& blk : hidden) {
        p.push_back(&blk.W);
        p.push_back(&blk.b);
        p.push_back(&blk.bn_gamma);
        p.push_back(&blk.bn_beta);
    }
    p.push_back(&out.W);
    p.push_back(&out.b);
    return p;
}

void Actor::init(int pools, double cap, Rng& rng) {
    n_pools = pools;
    fee_cap = cap;
    base[0].init(5, 64, rng);
    base[1].init(64, 64, rng);
    head_cl.init(64, 1, rng);
    head_cd.init(64, pools, rng);
    head_z.init(64, 1, rng);
    head_u.init(64, pools, rng);
}

ActorOutput Actor::forward(const MatrixXd& states, bool train) {
    MatrixXd h = states.array().rowwise() * in_scale.array();
    for (auto& blk : base) h = blk.forward(h, train);
    base_out = h;

    ActorOutput o;
    o.c_l = (1.0 / (1.0 + (-head_cl.forward(h).col(0).array()).exp())) * fee_cap;
    o.c_d = (1.0 / (1.0 + (-head_cd.forward(h).array()).exp())) * fee_cap;
    o.z = head_z.forward(h).col(0).array().tanh() * z_scale;
    const MatrixXd up = head_u.forward(h);
    // numerically stable softplus with inverse temperature beta
    o.u = (up.array() * softplus_beta)
              .unaryExpr([](double v) {
                  return v > 30.0 ? v : std::log1p(std::exp(v));
              })
              .matrix() /
          softplus_beta;
    last = o;
    return o;
}

void Actor::backward(const VectorXd& d_cl, const MatrixXd& d_cd, const VectorXd& d_z,
                     const MatrixXd& d_u) {
    // chain through the head activations, then the shared base
    const Eigen::ArrayXd s_cl = last.c_l.array() / fee_cap;
    MatrixXd pre_cl = (d_cl.array() * fee_cap * s_cl * (1.0 - s_cl)).matrix();
    const Eigen::ArrayXXd s_cd = last.c_d.array() / fee_cap;
    MatrixXd pre_cd = (d_cd.array() * fee_cap * s_cd * (1.0 - s_cd)).matrix();
    const Eigen::ArrayXd th = last.z.array() / z_scale;
    MatrixXd pre_z = (d_z.array() * z_scale * (1.0 - th * th)).matrix();
    // d softplus/dx = sigmoid(beta x) = 1 - exp(-beta u)
    MatrixXd pre_u =
        (d_u.array() * (1.0 - (-softplus_beta * last.u.array()).exp())).matrix();

    MatrixXd d = head_cl.backward(pre_cl);
    d += head_cd.backward(pre_cd);
    d += head_z.backward(pre_z);
    d += head_u.backward(pre_u);
    for (int i = 1; i >= 0; --i) d = base[i].backward(d);
}

std::vector<Tensor*> Actor::params() {
    std::vector<Tensor*> p;
    for (auto& blk : base) {
        p.push_back(&blk.W);
        p.push_back(&blk.b);
        p.push_back(&blk.bn_gamma);
        p.push_back(&blk.bn_beta);
    }
    for (LinearOut* head : {&head_cl, &head_cd, &head_z, &head_u}) {
        p.push_back(&head->W);
        p.push_back(&head->b);
    }
    return p;
}

std::vector<const Tensor*> Actor::params() const {
    auto* self = const_cast<Actor*>(this);
    std::vector<const Tensor*> p;
    for (Tensor* t : self->params()) p.push_back(t);
    return p;
}

void soft_update(Critic& target, const Critic& live, double tau) {
    auto tp = target.params();
    auto lp = live.params();
    for (std::size_t i = 0; i < tp.size(); ++i)
        tp[i]->value = (1.0 - tau) * tp[i]->value + tau * lp[i]->value;
    target.in_scale = live.in_scale;
    for (int i = 0; i < 3; ++i) {
        target.hidden[i].running_mean = (1.0 - tau) * target.hidden[i].running_mean +
                                        tau * live.hidden[i].running_mean;
        target.hidden[i].running_var = (1.0 - tau) * target.hidden[i].running_var +
                                       tau * live.hidden[i].running_var;
    }
}

void copy_into(Critic& dst, const Critic& src) {
    auto dp = dst.params();
    auto sp = src.params();
    for (std::size_t i = 0; i < dp.size(); ++i) dp[i]->value = sp[i]->value;
    dst.in_scale = src.in_scale;
    for (int i = 0; i < 3; ++i) {
        dst.hidden[i].running_mean = src.hidden[i].running_mean;
        dst.hidden[i].running_var = src.hidden[i].running_var;
    }
}

namespace {
void write_matrix(std::ostream& os, const MatrixXd& m) {
    os << m.rows() << " " << m.cols() << "\n";
    for (long i = 0; i < m.rows(); ++i) {
        for (long j = 0; j < m.cols(); ++j) os << m(i, j) << " ";
        os << "\n";
    }
}

MatrixXd read_matrix(std::istream& is) {
    long rows = 0, cols = 0;
    is >> rows >> cols;
    if (!is || rows < 0 || cols < 0) throw std::runtime_error("checkpoint: bad matrix header");
    MatrixXd m(rows, cols);
    for (long i = 0; i < rows; ++i)
        for (long j = 0; j < cols; ++j) is >> m(i, j);
    if (!is) throw std::runtime_error("checkpoint: truncated matrix");
    return m;
}

void expect_tag(std::istream& is, const std::string& tag) {
    std::string got;
    is >> got;
    if (got != tag) throw std::runtime_error("checkpoint: expected '" + tag + "'");
}
}  // namespace

void save_critic(const Critic& c, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path);
    os.precision(17);
    os << "darkpool-critic v1\n";
    write_matrix(os, c.in_scale);
    for (const Tensor* t : c.params()) write_matrix(os, t->value);
    for (int i = 0; i < 3; ++i) {
        write_matrix(os, c.hidden[i].running_mean);
        write_matrix(os, c.hidden[i].running_var);
    }
}

void load_critic(Critic& c, const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot read " + path);
    expect_tag(is, "darkpool-critic");
    expect_tag(is, "v1");
    c.in_scale = read_matrix(is);
    for (Tensor* t : c.params()) t->value = read_matrix(is);
    for (int i = 0; i < 3; ++i) {
        c.hidden[i].running_mean = read_matrix(is);
        c.hidden[i].running_var = read_matrix(is);
    }
}

void save_actor(const Actor& a, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path);
    os.precision(17);
    os << "darkpool-actor v1\n";
    os << a.n_pools << " " << a.fee_cap << " " << a.z_scale << " " << a.softplus_beta
       << "\n";
    write_matrix(os, a.in_scale);
    for (const Tensor* t : a.params()) write_matrix(os, t->value);
    for (int i = 0; i < 2; ++i) {
        write_matrix(os, a.base[i].running_mean);
        write_matrix(os, a.base[i].running_var);
    }
}

void load_actor(Actor& a, const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot read " + path);
    expect_tag(is, "darkpool-actor");
    expect_tag(is, "v1");
    int pools = 0;
    double cap = 0.0;
    is >> pools >> cap >> a.z_scale >> a.softplus_beta;
    Rng rng(0);
    a.init(pools, cap, rng);
    a.in_scale = read_matrix(is);
    for (Tensor* t : a.params()) t->value = read_matrix(is);
    for (int i = 0; i < 2; ++i) {
        a.base[i].running_mean = read_matrix(is);
        a.base[i].running_var = read_matrix(is);
    }
}

}  // namespace darkpool::nn
