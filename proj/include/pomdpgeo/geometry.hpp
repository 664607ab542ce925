#pragma once

#include "pomdpgeo/model.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace pomdpgeo {

inline constexpr double kPseudoinverseRankTol = 1e-10;
inline constexpr double kSupportTol = 1e-12;
inline constexpr double kSupportWarnTol = 1e-8;
inline constexpr double kFeasibleEqualityTol = 1e-8;
inline constexpr double kFeasibleNonnegTol = 1e-10;
inline constexpr double kFeasiblePolyTol = 1e-8;

/// Equalities W eta = rhs over flattened S×A, plus eta >= 0.
struct HalfspaceSystem {
    MatrixXd W;     // one row per state
    VectorXd rhs;
    bool nonnegative = true;

    /// W eta - rhs.
    VectorXd residual(const Frequency& f) const;
};

struct MembershipResiduals {
    double u = 0.0;        // component of tau outside range(beta)
    double c = 0.0;        // most negative entry of beta^+ tau (0 if none)
    double d = 0.0;        // row sums of beta^+ tau minus one
    double simplex = 0.0;  // tau itself row-stochastic and nonnegative
    double max() const;
};

struct EffectivePolytopeDescription {
    MatrixXd kernel_basis;  // |S| x dim ker(beta^T), orthonormal columns
    MatrixXd cone_rows;     // beta^+, |O| x |S|

    MembershipResiduals membership(const MatrixXd& tau) const;
};

/// Exponent vector over flattened S×A.
using Exponents = std::vector<int>;

struct PolynomialConstraint {
    std::size_t action = 0;
    std::size_t observation = 0;
    std::vector<std::size_t> support_states;  // S_o
    std::vector<double> weights;              // beta^+_{o s} for s in S_o
    std::map<Exponents, double> terms;

    double evaluate(const MatrixXd& eta) const;
    /// sum_{s in S_o} beta^+_{os} eta_{sa} prod_{s' != s} rho_{s'}.
    double evaluate_product_form(const MatrixXd& eta) const;
    int degree() const { return static_cast<int>(support_states.size()); }
};

struct ConstraintSystem {
    MatrixXd beta_plus;
    std::vector<PolynomialConstraint> constraints;  // ordered by (observation, action)
    std::vector<std::string> warnings;
};

struct PolyValue {
    std::size_t action = 0;
    std::size_t observation = 0;
    double value = 0.0;
};

struct FeasibilityReport {
    VectorXd mdp_residuals;
    std::vector<PolyValue> poly_values;
    double min_eta = 0.0;
    bool feasible = false;
    std::vector<std::string> reasons;
};

struct FaceDescriptor {
    std::vector<std::pair<std::size_t, std::size_t>> active_zeros;  // (action, observation)
    std::vector<std::uint32_t> free_mask;                           // free actions per row
    int dimension = 0;
    bool certified = false;
};

struct FaceLattice {
    std::vector<FaceDescriptor> faces;
    std::vector<std::pair<std::size_t, std::size_t>> covers;  // (lower, upper) face indices
    std::vector<int> f_vector;                                // faces per dimension
    bool certified = false;
};

HalfspaceSystem mdp_polytope(const PomdpModel& model);

/// nu(s, s') = sum_a eta(s, a) alpha(s' | s, a).
MatrixXd kirchhoff_image(const PomdpModel& model, const Frequency& f);
/// max |nu 1 - gamma nu^T 1 - (1 - gamma) mu|.
double kirchhoff_balance_residual(const PomdpModel& model, const MatrixXd& nu);

/// Moore-Penrose pseudoinverse of a matrix with independent columns.
MatrixXd pseudoinverse(const MatrixXd& beta);

EffectivePolytopeDescription effective_polytope(const MatrixXd& beta);

/// One polynomial per (action, observation). Both the expanded product form
/// and the sum over maps f: S_o -> A are built and compared; a mismatch is a
/// logic error.
ConstraintSystem constraint_polynomials(const MatrixXd& beta, std::size_t num_actions);

std::string format_polynomial(const PolynomialConstraint& p, const std::vector<std::string>& states,
                              const std::vector<std::string>& actions);

FeasibilityReport feasibility_report(const PomdpModel& model, const Frequency& f);

/// Faces of the product of `rows` simplices of dimension actions - 1.
std::vector<FaceDescriptor> enumerate_policy_faces(std::size_t rows, std::size_t actions);

/// Face lattice of the observation policy polytope, up to dimension
/// `max_dim` (negative: all), each face certified on its frequency image.
FaceLattice face_lattice(const PomdpModel& model, int max_dim = -1, int samples = 3,
                         std::uint64_t seed = 1);

} // namespace pomdpgeo
