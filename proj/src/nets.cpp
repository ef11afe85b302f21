#include "acrl/nets.hpp"

#include <cmath>
#include <istream>
#include <ostream>

namespace acrl {

namespace {

constexpr char kMagic[9] = "ACRLNET1";
constexpr double kHalfLog2Pi = 0.9189385332046727;  // 0.5 * log(2*pi)

void write_raw(std::ostream& out, const void* p, std::size_t n) {
    out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

void read_raw(std::istream& in, void* p, std::size_t n) {
    in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (!in) throw std::runtime_error("truncated checkpoint");
}

void write_mat(std::ostream& out, const Mat& m) {
    const std::int32_t rows = static_cast<std::int32_t>(m.rows());
    const std::int32_t cols = static_cast<std::int32_t>(m.cols());
    write_raw(out, &rows, sizeof rows);
    write_raw(out, &cols, sizeof cols);
    for (std::int32_t i = 0; i < rows; ++i)
        for (std::int32_t j = 0; j < cols; ++j) {
            const double v = m(i, j);
            write_raw(out, &v, sizeof v);
        }
}

Mat read_mat(std::istream& in) {
    std::int32_t rows = 0, cols = 0;
    read_raw(in, &rows, sizeof rows);
    read_raw(in, &cols, sizeof cols);
    if (rows < 0 || cols < 0 || rows * static_cast<long>(cols) > (1L << 28))
        throw std::runtime_error("corrupt checkpoint dimensions");
    Mat m(rows, cols);
    for (std::int32_t i = 0; i < rows; ++i)
        for (std::int32_t j = 0; j < cols; ++j) {
            double v;
            read_raw(in, &v, sizeof v);
            m(i, j) = v;
        }
    return m;
}

}  // namespace

// ---------------------------------------------------------------------------
// Mlp

Mlp Mlp::make(const std::vector<int>& dims, Rng& rng) {
    if (dims.size() < 2) throw std::invalid_argument("need at least input and output dims");
    Mlp m;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        const int in = dims[l], out = dims[l + 1];
        if (in <= 0 || out <= 0) throw std::invalid_argument("non-positive layer width");
        const double scale = std::sqrt(2.0 / in);
        std::normal_distribution<double> g(0.0, scale);
        m.W.push_back(Mat::NullaryExpr(out, in, [&] { return g(rng); }));
        m.b.push_back(Vec::Zero(out));
    }
    return m;
}

std::size_t Mlp::param_count() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < W.size(); ++l) n += W[l].size() + b[l].size();
    return n;
}

Mat Mlp::forward(const Mat& X, Cache& cache) const {
    if (X.rows() != input_dim()) throw std::invalid_argument("input dimension mismatch");
    cache.acts.clear();
    cache.acts.reserve(W.size() + 1);
    cache.acts.push_back(X);
    Mat a = X;
    for (std::size_t l = 0; l < W.size(); ++l) {
        Mat z = (W[l] * a).colwise() + b[l];
        a = (l + 1 < W.size()) ? z.cwiseMax(0.0) : std::move(z);
        cache.acts.push_back(a);
    }
    return cache.acts.back();
}

Mat Mlp::apply_batch(const Mat& X) const {
    Cache cache;
    return forward(X, cache);
}

Vec Mlp::apply(const Vec& x) const { return apply_batch(x); }

Mlp::Grads Mlp::Grads::zeros_like(const Mlp& m) {
    Grads g;
    for (std::size_t l = 0; l < m.W.size(); ++l) {
        g.dW.push_back(Mat::Zero(m.W[l].rows(), m.W[l].cols()));
        g.db.push_back(Vec::Zero(m.b[l].size()));
    }
    return g;
}

void Mlp::Grads::scale(double f) {
    for (auto& m : dW) m *= f;
    for (auto& v : db) v *= f;
}

void Mlp::Grads::add(const Grads& other, double f) {
    for (std::size_t l = 0; l < dW.size(); ++l) {
        dW[l] += f * other.dW[l];
        db[l] += f * other.db[l];
    }
}

Mat Mlp::backward(const Cache& cache, const Mat& upstream, Grads& grads) const {
    if (grads.dW.empty()) grads = Grads::zeros_like(*this);
    Mat delta = upstream;
    for (int l = static_cast<int>(W.size()) - 1; l >= 0; --l) {
        if (l + 1 < static_cast<int>(W.size())) {
            // ReLU mask from the stored post-activation
            delta = delta.cwiseProduct(
                (cache.acts[l + 1].array() > 0.0).cast<double>().matrix());
        }
        grads.dW[l] += delta * cache.acts[l].transpose();
        grads.db[l] += delta.rowwise().sum();
        if (l > 0) delta = W[l].transpose() * delta;
    }
    return W[0].transpose() * delta;
}

std::pair<Mlp::Grads, Vec> mlp_grad(const Mlp& m, const Vec& x, const Vec& upstream) {
    if (upstream.size() != m.output_dim())
        throw std::invalid_argument("upstream dimension mismatch");
    Mlp::Cache cache;
    m.forward(x, cache);
    Mlp::Grads grads = Mlp::Grads::zeros_like(m);
    Mat input_grad = m.backward(cache, upstream, grads);
    return {std::move(grads), Vec(input_grad.col(0))};
}

void Mlp::save(std::ostream& out) const {
    write_raw(out, kMagic, 8);
    const std::int32_t layers = static_cast<std::int32_t>(W.size());
    write_raw(out, &layers, sizeof layers);
    for (std::size_t l = 0; l < W.size(); ++l) {
        write_mat(out, W[l]);
        write_mat(out, b[l]);
    }
}

Mlp Mlp::load(std::istream& in) {
    char magic[8];
    read_raw(in, magic, 8);
    if (std::string(magic, 8) != std::string(kMagic, 8))
        throw std::runtime_error("bad checkpoint magic");
    std::int32_t layers = 0;
    read_raw(in, &layers, sizeof layers);
    Mlp m;
    for (std::int32_t l = 0; l < layers; ++l) {
        m.W.push_back(read_mat(in));
        m.b.push_back(Vec(read_mat(in)));
    }
    return m;
}

// ---------------------------------------------------------------------------
// Adam

Adam::Adam(const Mlp& net, double lr_) : lr(lr_) {
    m_ = Mlp::Grads::zeros_like(net);
    v_ = Mlp::Grads::zeros_like(net);
}

void Adam::step(Mlp& net, const Mlp::Grads& grads) {
    ++t;
    const double bc1 = 1.0 - std::pow(beta1, t);
    const double bc2 = 1.0 - std::pow(beta2, t);
    for (std::size_t l = 0; l < net.W.size(); ++l) {
        m_.dW[l] = beta1 * m_.dW[l] + (1.0 - beta1) * grads.dW[l];
        v_.dW[l] = beta2 * v_.dW[l].array().matrix() +
                   (1.0 - beta2) * grads.dW[l].cwiseProduct(grads.dW[l]);
        net.W[l].array() -= lr * (m_.dW[l].array() / bc1) /
                            ((v_.dW[l].array() / bc2).sqrt() + eps);
        m_.db[l] = beta1 * m_.db[l] + (1.0 - beta1) * grads.db[l];
        v_.db[l] = beta2 * v_.db[l] + (1.0 - beta2) * grads.db[l].cwiseProduct(grads.db[l]);
        net.b[l].array() -= lr * (m_.db[l].array() / bc1) /
                            ((v_.db[l].array() / bc2).sqrt() + eps);
    }
}

// ---------------------------------------------------------------------------
// GaussianPolicy

GaussianPolicy GaussianPolicy::make(int state_dim, const Vec& lo, const Vec& hi,
                                    const std::vector<int>& hidden, Rng& rng) {
    if (lo.size() != hi.size() || lo.size() == 0)
        throw std::invalid_argument("bad action box");
    GaussianPolicy p;
    p.ds = state_dim;
    p.da = static_cast<int>(lo.size());
    p.lo = lo;
    p.hi = hi;
    std::vector<int> dims;
    dims.push_back(state_dim + 2);
    for (int h : hidden) dims.push_back(h);
    dims.push_back(2 * p.da);
    p.trunk = Mlp::make(dims, rng);
    return p;
}

Vec GaussianPolicy::trunk_input(const EnvState& s, const Preference& lam) const {
    Vec in(ds + 2);
    in.head(ds) = s.x;
    in[ds] = lam.lambda_r;
    in[ds + 1] = lam.lambda_c;
    return in;
}

namespace {

// log(1 - tanh^2(u)) evaluated without the catastrophic cancellation of the
// direct form, which freezes at a few ulps once |u| exceeds ~13 and breaks
// both the density and its finite differences. Identity:
// 1 - tanh^2(u) = 4 e^{-2|u|} / (1 + e^{-2|u|})^2.
inline double log_one_minus_tanh_sq(double u) {
    const double au = std::abs(u);
    return 2.0 * (std::log(2.0) - au - std::log1p(std::exp(-2.0 * au)));
}

}  // namespace

GaussianPolicy::Sample GaussianPolicy::sample(const EnvState& s, const Preference& lam,
                                              Rng& rng) const {
    std::normal_distribution<double> g(0.0, 1.0);
    Vec eps = Vec::NullaryExpr(da, [&] { return g(rng); });
    return sample_with_eps(s, lam, eps);
}

GaussianPolicy::Sample GaussianPolicy::sample_with_eps(const EnvState& s, const Preference& lam,
                                                       const Vec& eps) const {
    const Vec out = trunk.apply(trunk_input(s, lam));
    Sample r;
    r.eps = eps;
    r.mu = out.head(da);
    r.log_sigma = out.tail(da).cwiseMax(kLogSigmaMin).cwiseMin(kLogSigmaMax);
    const Vec sigma = r.log_sigma.array().exp();
    r.u = r.mu + sigma.cwiseProduct(eps);
    r.a = Vec(da);
    r.logp = 0.0;
    for (int i = 0; i < da; ++i) {
        const double t = std::tanh(r.u[i]);
        const double half = 0.5 * (hi[i] - lo[i]);
        r.a[i] = lo[i] + half * (t + 1.0);
        r.logp += -0.5 * eps[i] * eps[i] - r.log_sigma[i] - kHalfLog2Pi;
        r.logp -= log_one_minus_tanh_sq(r.u[i]) + std::log(half);
    }
    return r;
}

Action GaussianPolicy::mean_action(const EnvState& s, const Preference& lam) const {
    const Vec out = trunk.apply(trunk_input(s, lam));
    Action a(da);
    for (int i = 0; i < da; ++i)
        a[i] = lo[i] + 0.5 * (hi[i] - lo[i]) * (std::tanh(out[i]) + 1.0);
    return a;
}

GaussianPolicy::BatchSample GaussianPolicy::sample_batch(const Mat& Xs, const Preference& lam,
                                                         const Mat& Eps) const {
    const int B = static_cast<int>(Xs.cols());
    BatchSample r;
    r.trunk_in = Mat(ds + 2, B);
    r.trunk_in.topRows(ds) = Xs;
    r.trunk_in.row(ds).setConstant(lam.lambda_r);
    r.trunk_in.row(ds + 1).setConstant(lam.lambda_c);
    const Mat out = trunk.forward(r.trunk_in, r.cache);
    r.Mu = out.topRows(da);
    r.LogSigma = out.bottomRows(da).cwiseMax(kLogSigmaMin).cwiseMin(kLogSigmaMax);
    r.Eps = Eps;
    const Mat Sigma = r.LogSigma.array().exp();
    r.U = r.Mu + Sigma.cwiseProduct(Eps);
    r.Tanh = r.U.array().tanh();
    r.A = Mat(da, B);
    r.logp = Vec::Zero(B);
    for (int i = 0; i < da; ++i) {
        const double half = 0.5 * (hi[i] - lo[i]);
        r.A.row(i) = (lo[i] + half) + half * r.Tanh.row(i).array();
        r.logp.array() += -0.5 * Eps.row(i).array().square() - r.LogSigma.row(i).array() -
                          kHalfLog2Pi - std::log(half) -
                          r.U.row(i).array().unaryExpr(&log_one_minus_tanh_sq);
    }
    return r;
}

void GaussianPolicy::save(std::ostream& out) const {
    trunk.save(out);
    write_mat(out, lo);
    write_mat(out, hi);
}

GaussianPolicy GaussianPolicy::load(std::istream& in) {
    GaussianPolicy p;
    p.trunk = Mlp::load(in);
    p.lo = Vec(read_mat(in));
    p.hi = Vec(read_mat(in));
    p.da = static_cast<int>(p.lo.size());
    p.ds = p.trunk.input_dim() - 2;
    return p;
}

// ---------------------------------------------------------------------------
// VectorCritic

VectorCritic VectorCritic::make(int state_dim, int action_dim, const std::vector<int>& hidden,
                                Rng& rng) {
    VectorCritic c;
    c.ds = state_dim;
    c.da = action_dim;
    std::vector<int> dims;
    dims.push_back(state_dim + action_dim + 2);
    for (int h : hidden) dims.push_back(h);
    dims.push_back(2);
    c.q1 = Mlp::make(dims, rng);
    c.q2 = Mlp::make(dims, rng);
    c.target1 = c.q1;
    c.target2 = c.q2;
    return c;
}

Vec VectorCritic::input(const EnvState& s, const Action& a, const Preference& lam) const {
    Vec in(ds + da + 2);
    in.head(ds) = s.x;
    in.segment(ds, da) = a;
    in[ds + da] = lam.lambda_r;
    in[ds + da + 1] = lam.lambda_c;
    return in;
}

Eigen::Vector2d VectorCritic::eval(const Mlp& head, const EnvState& s, const Action& a,
                                   const Preference& lam) const {
    const Vec q = head.apply(input(s, a, lam));
    return {q[0], q[1]};
}

void VectorCritic::sync_targets() {
    target1 = q1;
    target2 = q2;
}

void VectorCritic::save(std::ostream& out) const {
    q1.save(out);
    q2.save(out);
    target1.save(out);
    target2.save(out);
}

VectorCritic VectorCritic::load(std::istream& in) {
    VectorCritic c;
    c.q1 = Mlp::load(in);
    c.q2 = Mlp::load(in);
    c.target1 = Mlp::load(in);
    c.target2 = Mlp::load(in);
    return c;
}

void soft_update(Mlp& target, const Mlp& online, double tau) {
    if (target.W.size() != online.W.size()) throw std::invalid_argument("net shape mismatch");
    for (std::size_t l = 0; l < target.W.size(); ++l) {
        target.W[l] = (1.0 - tau) * target.W[l] + tau * online.W[l];
        target.b[l] = (1.0 - tau) * target.b[l] + tau * online.b[l];
    }
}

}  // namespace acrl
