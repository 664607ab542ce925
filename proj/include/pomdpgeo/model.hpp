#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace pomdpgeo {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Absolute per-row tolerance for stochasticity checks.
inline constexpr double kStochasticTol = 1e-12;

/**
 * A finite POMDP with discount and initial distribution.
 *
 * The transition kernel is stored flattened: row `s * |A| + a` of
 * `alpha()` is the distribution of the next state given (s, a). The same
 * row-major (state, action) flattening is used for every vector over S×A
 * in the library.
 *
 * Dimensions are checked at construction; stochasticity is not (use
 * `validate`), so that malformed documents can still be loaded and
 * reported on.
 */
class PomdpModel {
public:
    PomdpModel(std::vector<std::string> states, std::vector<std::string> observations,
               std::vector<std::string> actions, MatrixXd alpha, MatrixXd beta,
               MatrixXd reward, double gamma, VectorXd mu);

    std::size_t num_states() const { return states_.size(); }
    std::size_t num_observations() const { return observations_.size(); }
    std::size_t num_actions() const { return actions_.size(); }
    std::size_t num_pairs() const { return states_.size() * actions_.size(); }

    const std::vector<std::string>& states() const { return states_; }
    const std::vector<std::string>& observations() const { return observations_; }
    const std::vector<std::string>& actions() const { return actions_; }

    /// (|S||A|) x |S| transition matrix, row `pair_index(s, a)`.
    const MatrixXd& alpha() const { return alpha_; }
    double alpha(std::size_t s, std::size_t a, std::size_t next) const {
        return alpha_(static_cast<Eigen::Index>(pair_index(s, a)),
                      static_cast<Eigen::Index>(next));
    }
    /// |S| x |O| observation kernel.
    const MatrixXd& beta() const { return beta_; }
    /// |S| x |A| instantaneous reward.
    const MatrixXd& reward() const { return reward_; }
    double gamma() const { return gamma_; }
    const VectorXd& mu() const { return mu_; }

    std::size_t pair_index(std::size_t s, std::size_t a) const { return s * actions_.size() + a; }

    PomdpModel with_gamma(double gamma) const;
    PomdpModel with_mu(VectorXd mu) const;
    PomdpModel with_reward(MatrixXd reward) const;
    PomdpModel with_beta(MatrixXd beta, std::vector<std::string> observations) const;

    std::size_t state_index(std::string_view label) const;
    std::size_t observation_index(std::string_view label) const;
    std::size_t action_index(std::string_view label) const;

private:
    std::vector<std::string> states_;
    std::vector<std::string> observations_;
    std::vector<std::string> actions_;
    MatrixXd alpha_;
    MatrixXd beta_;
    MatrixXd reward_;
    double gamma_;
    VectorXd mu_;
};

enum class PolicyKind { observation, state };

/// Row-stochastic matrix; rows are observations (or states), columns actions.
struct Policy {
    PolicyKind kind = PolicyKind::observation;
    MatrixXd matrix;

    static Policy observation_policy(MatrixXd m) { return {PolicyKind::observation, std::move(m)}; }
    static Policy state_policy(MatrixXd m) { return {PolicyKind::state, std::move(m)}; }
    /// Uniform policy over `rows` rows and `actions` actions.
    static Policy uniform(PolicyKind kind, std::size_t rows, std::size_t actions);
    /// Deterministic policy: row i puts all mass on `choice[i]`.
    static Policy deterministic(PolicyKind kind, const std::vector<std::size_t>& choice,
                                std::size_t actions);
};

/// Joint distribution over S×A plus its state marginal.
struct Frequency {
    MatrixXd eta;  // |S| x |A|
    VectorXd rho;  // row sums of eta

    static Frequency from_eta(MatrixXd eta);
    /// Flattened view in (state, action) row-major order.
    VectorXd flat() const;
};

struct Violation {
    std::string path;
    std::string message;
    double magnitude = 0.0;
};

struct ValidationReport {
    bool ok = true;
    std::vector<Violation> violations;
};

/// Transition kernels induced by a policy: P on S×A and p on S.
struct TransitionKernels {
    MatrixXd P;  // (|S||A|) x (|S||A|), P(row=(s,a), col=(s',a'))
    MatrixXd p;  // |S| x |S|
};

/// Parses the canonical JSON model document; the graph form (an `edges`
/// array) is detected and compiled to the canonical form.
PomdpModel parse_model(std::string_view text);
PomdpModel parse_canonical_model(std::string_view text);
PomdpModel parse_graph_model(std::string_view text);
PomdpModel load_model(const std::string& path);

/// Canonical document; `parse_model(serialize_model(m))` is bit-exact.
std::string serialize_model(const PomdpModel& model);

/// Checks every stochasticity and range invariant; never throws.
ValidationReport validate(const PomdpModel& model);
ValidationReport validate_policy(const PomdpModel& model, const Policy& pi);

/// tau(a|s) = sum_o beta(o|s) pi(a|o).
Policy effective_policy(const Policy& pi, const MatrixXd& beta);
/// Observation policies are composed with the model's beta; state
/// policies are returned unchanged after a shape check.
Policy effective_policy(const PomdpModel& model, const Policy& pi);

TransitionKernels transition_kernels(const PomdpModel& model, const Policy& pi);

/// p_tau(s'|s) = sum_a tau(a|s) alpha(s'|s,a) for an arbitrary |S|x|A|
/// matrix tau (rows need not be stochastic).
MatrixXd state_kernel(const PomdpModel& model, const MatrixXd& tau);
/// P_tau((s,a),(s',a')) = alpha(s'|s,a) tau(a'|s').
MatrixXd pair_kernel(const PomdpModel& model, const MatrixXd& tau);

/// (mu * tau)(s,a) = mu(s) tau(a|s), flattened.
VectorXd initial_pair_distribution(const PomdpModel& model, const MatrixXd& tau);

bool is_fully_observable(const PomdpModel& model, double tol = kStochasticTol);

} // namespace pomdpgeo
