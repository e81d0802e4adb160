#pragma once

// Seeded generators shared by the unit and acceptance suites.

#include <Eigen/Dense>
#include <random>

namespace testgen {

class Rng {
  public:
    explicit Rng(unsigned long seed) : rng_(seed) {}

    double uniform(double lo = 0.0, double hi = 1.0) {
        return lo + (hi - lo) * std::generate_canonical<double, 53>(rng_);
    }

    double normal(double mu = 0.0, double sigma = 1.0) {
        std::normal_distribution<double> dist(mu, sigma);
        return dist(rng_);
    }

    int uniform_int(int lo, int hi) {  // inclusive
        std::uniform_int_distribution<int> dist(lo, hi);
        return dist(rng_);
    }

    std::mt19937_64& raw() { return rng_; }

  private:
    std::mt19937_64 rng_;
};

// Random SPD covariance with controlled conditioning: Q diag(d) Q' with
// eigenvalues in [0.2, 2] times a scale.
inline Eigen::MatrixXd random_spd(Rng& rng, int n, double scale = 1.0) {
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) m(i, j) = rng.normal();
    }
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
    const Eigen::MatrixXd q = qr.householderQ();
    Eigen::VectorXd eig(n);
    for (int i = 0; i < n; ++i) eig(i) = rng.uniform(0.2, 2.0) * scale;
    return q * eig.asDiagonal() * q.transpose();
}

inline Eigen::VectorXd random_vector(Rng& rng, int n, double mu = 0.0, double sigma = 1.0) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v(i) = rng.normal(mu, sigma);
    return v;
}

}  // namespace testgen
