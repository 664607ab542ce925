#pragma once

#include "pomdpgeo/freq.hpp"
#include "pomdpgeo/model.hpp"

#include <functional>
#include <vector>

namespace pomdpgeo {

/// Accepted fits must reproduce the sampled function to this absolute error.
inline constexpr double kRationalFitTol = 1e-7;

/**
 * Univariate rational function num/den on [0, 1], identified numerically.
 *
 * Coefficients are ascending in the curve parameter. Internally the fit is
 * carried out in the centred variable t = 2x - 1, which keeps the least
 * squares system well conditioned; `num_centered`/`den_centered` hold
 * that representation and are what evaluation uses.
 */
struct RationalCurve {
    VectorXd num;
    VectorXd den;  // normalized so that den(1/2) = 1
    VectorXd num_centered;
    VectorXd den_centered;
    double fit_residual = 0.0;
    int fitted_degree = 0;
    std::vector<double> fit_grid;
    std::vector<double> validation_grid;

    double operator()(double x) const;
    double derivative(double x) const;
};

struct DegreeCertificate {
    int bound = 0;
    int fitted_degree = 0;
    double fit_residual = 0.0;
    std::vector<double> witness_grid;
    bool within_bound() const { return fitted_degree <= bound; }
};

struct PathPoint {
    Policy policy;
    double reward = 0.0;
    int segment = 0;  // 1: frequency-constant segment, 2: conditioning pullback
    double t = 0.0;   // position within the segment, in [0, 1]
};

struct DeterministicOptimum {
    Policy policy;
    double reward = 0.0;
};

/// Number of states that emit at least one of `varying_obs` with positive
/// probability.
int degree_bound(const PomdpModel& model, const std::vector<std::size_t>& varying_obs);

/// Smallest-degree rational fit of `f` with residual <= 1e-7.
/// Throws DegreeExceededError when no degree up to `max_degree` fits.
RationalCurve fit_rational_curve(const std::function<double(double)>& f, int max_degree);

/// Fits the reward along the segment pi0 -> pi1 (observation policies) and
/// compares the fitted degree with the bound for the observations on which
/// the two policies differ.
DegreeCertificate certify_line_degree(const PomdpModel& model, const Policy& pi0, const Policy& pi1,
                                      int max_degree);

/// Interpolation speed c(lambda) = det(I - gamma p1) lambda / det(I - gamma p_lambda)
/// for state policies differing on at most one state.
double interpolation_speed(const PomdpModel& model, const Policy& pi0, const Policy& pi1,
                           double lambda);

/// Returns pi made deterministic on observation `o` without decreasing the
/// reward. Requires o to be emitted by at most one state.
Policy vertex_improvement(const PomdpModel& model, const Policy& pi, std::size_t o);

/// Applies vertex_improvement to every admissible observation in order.
Policy determinize(const PomdpModel& model, const Policy& pi);

/// Exhaustive search over the |A|^rows deterministic policies.
DeterministicOptimum deterministic_optimum(const PomdpModel& model, PolicyKind kind);

/// Monotone path from a state policy to a global optimum of a fully
/// observable model, discretized into `steps` points.
std::vector<PathPoint> improvement_path(const PomdpModel& model, const Policy& pi, int steps);

} // namespace pomdpgeo
