#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace pomdpgeo {

/// Seeded generator whose output is identical across standard libraries:
/// only the raw mt19937_64 stream is used, never std::*_distribution.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform in (0, 1).
    double uniform() {
        double u = 0.0;
        while (u == 0.0) u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
        return u;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double gaussian() {
        const double u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    std::uint64_t below(std::uint64_t n) { return engine_() % n; }

    /// Dirichlet(1, ..., 1) sample of length n.
    Eigen::VectorXd simplex(Eigen::Index n) {
        Eigen::VectorXd v(n);
        for (Eigen::Index i = 0; i < n; ++i) v(i) = -std::log(uniform());
        return v / v.sum();
    }

    /// Row-stochastic matrix with Dirichlet(1, ..., 1) rows.
    Eigen::MatrixXd stochastic(Eigen::Index rows, Eigen::Index cols) {
        Eigen::MatrixXd m(rows, cols);
        for (Eigen::Index r = 0; r < rows; ++r) m.row(r) = simplex(cols).transpose();
        return m;
    }

private:
    std::mt19937_64 engine_;
};

} // namespace pomdpgeo
