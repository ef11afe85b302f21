#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>

namespace acrl {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// State of a continuous environment: feature vector plus episode bookkeeping.
struct EnvState {
    Vec x;
    int step_index = 0;
    bool done = false;
};

using Action = Vec;

/// Two-component reward [task reward, violation penalty].
/// For any emitted transition exactly one of (c == 0) or (r == 0, c == -K) holds.
struct AugmentedReward {
    double r = 0.0;
    double c = 0.0;
};

/// Point on the 2-simplex weighting (task reward, violation penalty).
struct Preference {
    double lambda_r = 1.0;
    double lambda_c = 0.0;

    static Preference of(double lr) {
        if (lr < 0.0 || lr > 1.0)
            throw std::invalid_argument("preference weight outside [0,1]");
        return Preference{lr, 1.0 - lr};
    }

    bool on_simplex(double tol = 1e-12) const {
        return lambda_r >= 0.0 && lambda_c >= 0.0 &&
               std::abs(lambda_r + lambda_c - 1.0) <= tol;
    }
};

struct PenaltyConfig {
    double penalty = 0.1;  // K
    double gamma = 0.99;

    void validate() const {
        if (penalty <= 0.0) throw std::invalid_argument("penalty must be positive");
        if (gamma <= 0.0 || gamma >= 1.0) throw std::invalid_argument("gamma must be in (0,1)");
    }
};

inline double scalarize(const AugmentedReward& q, const Preference& lam) {
    return lam.lambda_r * q.r + lam.lambda_c * q.c;
}

inline double scalarize(double qr, double qc, const Preference& lam) {
    return lam.lambda_r * qr + lam.lambda_c * qc;
}

}  // namespace acrl
