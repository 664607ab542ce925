#pragma once

#include "pomdpgeo/model.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace pomdpgeo {

inline constexpr int kEdgeTracePoints = 200;

struct ProjectedPoint {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
    std::string tag;   // "sample", "pomdp_edge" or "mdp_edge"
    int edge_id = -1;  // -1 for samples
};

struct Projection {
    MatrixXd basis;  // (|S||A|) x 3, orthonormal columns (identity-padded when |S||A| < 3)
    std::vector<ProjectedPoint> points;
    int pomdp_edges = 0;
    int mdp_edges = 0;
};

/// Frequencies of `samples` random observation policies plus the images of
/// all edges of the observation and state policy polytopes, mapped to 3-D by
/// a seeded random orthogonal projection.
Projection export_projection(const PomdpModel& model, int samples, std::uint64_t seed);

std::string projection_csv(const Projection& p);

} // namespace pomdpgeo
