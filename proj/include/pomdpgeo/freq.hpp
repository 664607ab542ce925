#pragma once

#include "pomdpgeo/model.hpp"

#include <vector>

namespace pomdpgeo {

/// Reward normalization. `normalized` scales the discounted return by
/// (1 - gamma) so that R = <r, eta>; `unnormalized` drops the factor.
enum class RewardConvention { normalized, unnormalized };

struct ValueBundle {
    VectorXd V;        // per state; empty when unavailable (gamma = 1)
    MatrixXd Q;        // |S| x |A|, Q = (I - gamma P)^{-1} r; empty when unavailable
    double R = 0.0;
    bool values_available = true;
    RewardConvention convention = RewardConvention::normalized;
};

struct GradientBundle {
    MatrixXd grad;      // |O| x |A| (or |S| x |A| for state policies)
    MatrixXd jacobian;  // (|S||A|) x (|S||A|): d eta / d tau(a|s), column (s,a)
};

struct SeriesResult {
    Frequency frequency;
    long terms = 0;            // number of summands used
    double tail_bound = 0.0;   // total-variation bound on the truncation error
};

struct ConditioningResult {
    Policy policy;               // state policy
    std::vector<bool> flagged;   // rows with rho(s) <= threshold, set to uniform
};

/// Frequency for the model's gamma: discounted stationary distribution for
/// gamma < 1, the unique stationary distribution for gamma = 1.
/// Throws ErgodicityError when gamma = 1 and the stationary distribution is
/// not unique.
Frequency state_action_frequency(const PomdpModel& model, const Policy& pi);

/// Same as above on a raw |S|x|A| effective policy. Rows need not be
/// stochastic (used for ambient derivatives); gamma must be < 1 then.
Frequency frequency_from_effective(const PomdpModel& model, const MatrixXd& tau);

/// Discounted (1-gamma) sum_{t<=T} gamma^t (P^T)^t (mu*tau), truncated so
/// the tail is below `tol`. For gamma = 1 a Cesaro average is used instead,
/// doubling the horizon until the stationarity residual drops below tol.
SeriesResult truncated_series_oracle(const PomdpModel& model, const Policy& pi, double tol);

/// Number of discounted terms T with gamma^{T+1} <= tol (1 - gamma) gamma.
long series_terms(double gamma, double tol);

/// ||eta - gamma P^T eta - (1-gamma)(mu*tau)||_inf.
double fixed_point_residual(const PomdpModel& model, const Policy& pi, const Frequency& freq);

ValueBundle value_bundle(const PomdpModel& model, const Policy& pi,
                         RewardConvention convention = RewardConvention::normalized);

/// Expected reward R = <r, eta> in the normalized convention.
double expected_reward(const PomdpModel& model, const Policy& pi);
double expected_reward_effective(const PomdpModel& model, const MatrixXd& tau);

/// Gradient of the normalized reward in the ambient coordinates of the
/// policy, and the Jacobian of tau -> eta. Requires gamma < 1.
GradientBundle policy_gradient(const PomdpModel& model, const Policy& pi);

/// Recovers a state policy from a frequency by conditioning.
ConditioningResult conditioning_inverse(const PomdpModel& model, const Frequency& freq,
                                        double threshold = 1e-12);

} // namespace pomdpgeo
