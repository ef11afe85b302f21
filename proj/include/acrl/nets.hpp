#pragma once

#include <iosfwd>
#include <random>
#include <vector>

#include "acrl/types.hpp"

namespace acrl {

using Rng = std::mt19937_64;

/// Fully connected net, ReLU hidden layers, linear output. Batched passes
/// store samples in columns.
struct Mlp {
    std::vector<Mat> W;  // W[l]: out x in
    std::vector<Vec> b;

    struct Cache {
        std::vector<Mat> acts;  // acts[0] = input, acts[L] = output
    };

    struct Grads {
        std::vector<Mat> dW;
        std::vector<Vec> db;

        static Grads zeros_like(const Mlp& m);
        void scale(double f);
        void add(const Grads& other, double f = 1.0);
    };

    static Mlp make(const std::vector<int>& dims, Rng& rng);

    int input_dim() const { return static_cast<int>(W.front().cols()); }
    int output_dim() const { return static_cast<int>(W.back().rows()); }
    std::size_t param_count() const;

    Mat forward(const Mat& X, Cache& cache) const;
    Mat apply_batch(const Mat& X) const;
    Vec apply(const Vec& x) const;

    /// Reverse pass for the scalar sum over the batch of upstream' * output.
    /// Accumulates parameter grads into `grads`, returns the input gradient.
    Mat backward(const Cache& cache, const Mat& upstream, Grads& grads) const;

    void save(std::ostream& out) const;
    static Mlp load(std::istream& in);
};

/// Exact reverse-mode gradient of upstream' * m(x) for a single input.
std::pair<Mlp::Grads, Vec> mlp_grad(const Mlp& m, const Vec& x, const Vec& upstream);

/// Adam with beta = (0.9, 0.999), eps = 1e-8.
struct Adam {
    double lr = 3e-4;
    double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    long t = 0;
    Mlp::Grads m_, v_;

    explicit Adam(const Mlp& net, double lr = 3e-4);
    void step(Mlp& net, const Mlp::Grads& grads);
};

/// Tanh-squashed Gaussian actor over a compact action box, conditioned on the
/// preference. Trunk input is [state, lambda], output is (mu, log_sigma).
struct GaussianPolicy {
    Mlp trunk;
    Vec lo, hi;
    int ds = 0, da = 0;

    static constexpr double kLogSigmaMin = -20.0;
    static constexpr double kLogSigmaMax = 2.0;

    static GaussianPolicy make(int state_dim, const Vec& lo, const Vec& hi,
                               const std::vector<int>& hidden, Rng& rng);

    struct Sample {
        Action a;
        double logp = 0.0;
        Vec u, eps, mu, log_sigma;
    };

    Vec trunk_input(const EnvState& s, const Preference& lam) const;

    Sample sample(const EnvState& s, const Preference& lam, Rng& rng) const;
    /// Reparameterized sample with the noise supplied by the caller;
    /// deterministic, used by the losses and their finite-difference checks.
    Sample sample_with_eps(const EnvState& s, const Preference& lam, const Vec& eps) const;
    /// Mode of the squashed distribution.
    Action mean_action(const EnvState& s, const Preference& lam) const;

    /// Batched reparameterized sampling. Xs: ds x B, Eps: da x B.
    /// Returns actions (da x B), per-sample logp, and tensors needed by the
    /// policy-loss backward pass.
    struct BatchSample {
        Mat A;           // squashed actions
        Vec logp;        // per sample
        Mat U, Mu, LogSigma, Tanh;
        Mat Eps;
        Mlp::Cache cache;
        Mat trunk_in;    // (ds+2) x B
    };
    BatchSample sample_batch(const Mat& Xs, const Preference& lam, const Mat& Eps) const;

    void save(std::ostream& out) const;
    static GaussianPolicy load(std::istream& in);
};

/// Preference-conditioned twin critics with target copies. Each head maps
/// [state, action, lambda] to the 2-vector action value.
struct VectorCritic {
    Mlp q1, q2;
    Mlp target1, target2;
    int ds = 0, da = 0;

    static VectorCritic make(int state_dim, int action_dim, const std::vector<int>& hidden,
                             Rng& rng);

    Vec input(const EnvState& s, const Action& a, const Preference& lam) const;
    /// Value of one head: [Q_r, Q_c].
    Eigen::Vector2d eval(const Mlp& head, const EnvState& s, const Action& a,
                         const Preference& lam) const;

    void sync_targets();  // hard copy

    void save(std::ostream& out) const;
    static VectorCritic load(std::istream& in);
};

/// target <- (1 - tau) * target + tau * online
void soft_update(Mlp& target, const Mlp& online, double tau);

}  // namespace acrl
