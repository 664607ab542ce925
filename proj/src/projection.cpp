#include "pomdpgeo/projection.hpp"

#include "pomdpgeo/errors.hpp"
#include "pomdpgeo/freq.hpp"
#include "pomdpgeo/geometry.hpp"
#include "pomdpgeo/random.hpp"

#include <bit>
#include <cstdio>
#include <sstream>

namespace pomdpgeo {

using Eigen::Index;

namespace {

// Traces the frequency image of every 1-face of the product of `rows`
// simplices, rows being observations or states depending on `kind`.
int trace_edges(const PomdpModel& model, PolicyKind kind, std::size_t rows, const std::string& tag,
                const MatrixXd& basis, std::vector<ProjectedPoint>& out) {
    const std::size_t nA = model.num_actions();
    int edge = 0;
    for (const auto& face : enumerate_policy_faces(rows, nA)) {
        if (face.dimension != 1) continue;
        MatrixXd start = MatrixXd::Zero(static_cast<Index>(rows), static_cast<Index>(nA));
        MatrixXd end = start;
        for (std::size_t r = 0; r < rows; ++r) {
            bool first = true;
            for (std::size_t a = 0; a < nA; ++a) {
                if (!(face.free_mask[r] >> a & 1u)) continue;
                if (first) start(static_cast<Index>(r), static_cast<Index>(a)) = 1.0;
                if (!first || std::popcount(face.free_mask[r]) == 1) end(static_cast<Index>(r), static_cast<Index>(a)) = 1.0;
                first = false;
            }
        }
        for (int j = 0; j < kEdgeTracePoints; ++j) {
            const double t = static_cast<double>(j) / (kEdgeTracePoints - 1);
            const Policy pi{kind, (1.0 - t) * start + t * end};
            const VectorXd c = basis.transpose() * state_action_frequency(model, pi).flat();
            out.push_back({c(0), c(1), c(2), tag, edge});
        }
        ++edge;
    }
    return edge;
}

} // namespace

Projection export_projection(const PomdpModel& model, int samples, std::uint64_t seed) {
    if (samples < 1) throw PreconditionError("samples must be at least 1", "samples");
    const Index n = static_cast<Index>(model.num_pairs());
    Rng rng(seed);
    Projection p;
    if (n >= 3) {
        MatrixXd g(n, 3);
        for (Index j = 0; j < 3; ++j) {
            for (Index i = 0; i < n; ++i) g(i, j) = rng.gaussian();
        }
        Eigen::HouseholderQR<MatrixXd> qr(g);
        p.basis = qr.householderQ() * MatrixXd::Identity(n, 3);
    } else {
        p.basis = MatrixXd::Identity(n, 3);
    }

    const Index nO = static_cast<Index>(model.num_observations());
    const Index nA = static_cast<Index>(model.num_actions());
    for (int i = 0; i < samples; ++i) {
        const Policy pi = Policy::observation_policy(rng.stochastic(nO, nA));
        const VectorXd c = p.basis.transpose() * state_action_frequency(model, pi).flat();
        p.points.push_back({c(0), c(1), c(2), "sample", -1});
    }
    p.pomdp_edges = trace_edges(model, PolicyKind::observation, model.num_observations(), "pomdp_edge", p.basis,
                                p.points);
    p.mdp_edges = trace_edges(model, PolicyKind::state, model.num_states(), "mdp_edge", p.basis, p.points);
    return p;
}

std::string projection_csv(const Projection& p) {
    std::ostringstream os;
    os << "x,y,z,tag,edge_id\n";
    char buf[128];
    for (const auto& q : p.points) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,", q.x, q.y, q.z);
        os << buf << q.tag << ',' << q.edge_id << '\n';
    }
    return os.str();
}

} // namespace pomdpgeo
