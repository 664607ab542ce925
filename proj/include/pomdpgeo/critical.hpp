#pragma once

#include "pomdpgeo/model.hpp"
#include "pomdpgeo/rational.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace pomdpgeo {

enum class RootClass { max, min, saddle_flat };
enum class BoundaryClass { strict_max, strict_min, neither };

std::string to_string(RootClass c);
std::string to_string(BoundaryClass c);

struct CriticalRoot {
    double p = 0.0;  // pi(a1 | o)
    RootClass classification = RootClass::saddle_flat;
    double second_difference = 0.0;
    bool sign_change = false;  // R' changes sign across the root
};

struct CriticalSet {
    std::vector<CriticalRoot> interior_roots;  // ascending in p
    BoundaryClass p0 = BoundaryClass::neither;
    BoundaryClass p1 = BoundaryClass::neither;
    bool degenerate = false;
    bool merged_duplicates = false;
    int fitted_degree = 0;
    double fit_residual = 0.0;
    std::vector<double> grid_sign_changes;  // locations of discrete derivative sign changes
    bool grid_agrees = true;
};

/// Bound input restricted to the observations touched by the
/// active set.
struct BoundInput {
    std::vector<std::uint64_t> d;  // |{s : beta^+_{os} != 0}| per observation in O
    std::vector<std::uint64_t> k;  // active actions per observation in O
    std::int64_t m = 0;            // face dimension
};

/// Critical points of R(p) for a two-action blind controller, p = pi(a1|o).
CriticalSet blind_critical_points(const PomdpModel& model, int grid = 10000);

/// (prod_o d_o^{k_o}) * sum over compositions of m of prod_o (d_o - 1)^{i_o}.
/// Throws SizeCapError on 64-bit overflow.
std::uint64_t critical_point_bound(const BoundInput& in);

/// Builds the bound input for an active set of (action, observation) zeros.
/// Refuses observation matrices that are not square and invertible.
BoundInput make_bound_input(const MatrixXd& beta, std::size_t num_actions,
                            const std::vector<std::pair<std::size_t, std::size_t>>& active_set);

/// Three-term alternating sum for the polar degree of the rank-one
/// determinantal variety; checked against the closed form k.
std::int64_t polar_degree_rank_one(int k);

struct ScanAxis {
    std::size_t action = 0;
    std::size_t observation = 0;
};

struct ScanPoint {
    std::vector<double> coords;
    double reward = 0.0;
};

struct ScanResult {
    std::vector<ScanAxis> axes;
    std::vector<ScanPoint> points;
};

/// Evaluates R on a grid over one or two policy coordinates; the remaining
/// mass of each affected row is spread in proportion to `base`.
ScanResult landscape_scan(const PomdpModel& model, const std::vector<ScanAxis>& axes, int resolution,
                          const Policy& base);

struct KktReport {
    double residual = 0.0;       // norm of the gradient projected on the face's tangent space
    double max_inward = 0.0;     // largest directional slope into an active zero (<= 0 at a KKT point)
};

KktReport kkt_report(const PomdpModel& model, const Policy& pi);
double kkt_residual(const PomdpModel& model, const Policy& pi);

} // namespace pomdpgeo
