#include "pomdpgeo/geometry.hpp"

#include "pomdpgeo/errors.hpp"
#include "pomdpgeo/freq.hpp"
#include "pomdpgeo/random.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <functional>
#include <stdexcept>
#include <unordered_map>

namespace pomdpgeo {

using Eigen::Index;

namespace {

Index idx(std::size_t i) { return static_cast<Index>(i); }

std::string fmt17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Visits every map f: {0..k-1} -> {0..n-1}.
void for_each_map(std::size_t k, std::size_t n, const std::function<void(const std::vector<std::size_t>&)>& fn) {
    std::vector<std::size_t> f(k, 0);
    while (true) {
        fn(f);
        std::size_t i = 0;
        while (i < k && ++f[i] == n) f[i++] = 0;
        if (i == k) return;
    }
}

} // namespace

VectorXd HalfspaceSystem::residual(const Frequency& f) const { return W * f.flat() - rhs; }

double MembershipResiduals::max() const { return std::max({u, c, d, simplex}); }

MembershipResiduals EffectivePolytopeDescription::membership(const MatrixXd& tau) const {
    MembershipResiduals r;
    if (kernel_basis.cols() > 0) r.u = (kernel_basis.transpose() * tau).cwiseAbs().maxCoeff();
    const MatrixXd lifted = cone_rows * tau;
    r.c = std::max(0.0, -lifted.minCoeff());
    r.d = (lifted.rowwise().sum().array() - 1.0).abs().maxCoeff();
    r.simplex = std::max((tau.rowwise().sum().array() - 1.0).abs().maxCoeff(), std::max(0.0, -tau.minCoeff()));
    return r;
}

double PolynomialConstraint::evaluate(const MatrixXd& eta) const {
    const Index nA = eta.cols();
    double total = 0.0;
    for (const auto& [exps, coeff] : terms) {
        double m = coeff;
        for (std::size_t i = 0; i < exps.size(); ++i) {
            for (int e = 0; e < exps[i]; ++e) m *= eta(idx(i) / nA, idx(i) % nA);
        }
        total += m;
    }
    return total;
}

double PolynomialConstraint::evaluate_product_form(const MatrixXd& eta) const {
    double total = 0.0;
    for (std::size_t i = 0; i < support_states.size(); ++i) {
        double term = weights[i] * eta(idx(support_states[i]), idx(action));
        for (std::size_t j = 0; j < support_states.size(); ++j) {
            if (j != i) term *= eta.row(idx(support_states[j])).sum();
        }
        total += term;
    }
    return total;
}

HalfspaceSystem mdp_polytope(const PomdpModel& model) {
    const Index nS = idx(model.num_states());
    const Index nA = idx(model.num_actions());
    HalfspaceSystem h;
    h.W = MatrixXd::Zero(nS, nS * nA);
    for (Index s = 0; s < nS; ++s) {
        for (Index sp = 0; sp < nS; ++sp) {
            for (Index a = 0; a < nA; ++a) {
                h.W(s, sp * nA + a) = (s == sp ? 1.0 : 0.0) - model.gamma() * model.alpha()(sp * nA + a, s);
            }
        }
    }
    h.rhs = (1.0 - model.gamma()) * model.mu();
    return h;
}

MatrixXd kirchhoff_image(const PomdpModel& model, const Frequency& f) {
    const Index nS = idx(model.num_states());
    const Index nA = idx(model.num_actions());
    MatrixXd nu = MatrixXd::Zero(nS, nS);
    for (Index s = 0; s < nS; ++s) {
        for (Index a = 0; a < nA; ++a) nu.row(s) += f.eta(s, a) * model.alpha().row(s * nA + a);
    }
    return nu;
}

double kirchhoff_balance_residual(const PomdpModel& model, const MatrixXd& nu) {
    const VectorXd out = nu.rowwise().sum();
    const VectorXd in = nu.colwise().sum().transpose();
    return (out - model.gamma() * in - (1.0 - model.gamma()) * model.mu()).cwiseAbs().maxCoeff();
}

MatrixXd pseudoinverse(const MatrixXd& beta) {
    Eigen::JacobiSVD<MatrixXd> svd(beta, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const VectorXd sv = svd.singularValues();
    if (beta.cols() > beta.rows() || sv.size() == 0 || sv(sv.size() - 1) <= kPseudoinverseRankTol) {
        throw RankError("observation matrix has linearly dependent columns; no polynomial description "
                        "is available without injectivity",
                        "beta");
    }
    return svd.matrixV() * sv.cwiseInverse().asDiagonal() * svd.matrixU().transpose();
}

EffectivePolytopeDescription effective_polytope(const MatrixXd& beta) {
    EffectivePolytopeDescription d;
    d.cone_rows = pseudoinverse(beta);
    Eigen::JacobiSVD<MatrixXd> svd(beta, Eigen::ComputeFullU);
    const Index rank = beta.cols();
    d.kernel_basis = svd.matrixU().rightCols(beta.rows() - rank);
    return d;
}

ConstraintSystem constraint_polynomials(const MatrixXd& beta, std::size_t num_actions) {
    ConstraintSystem sys;
    sys.beta_plus = pseudoinverse(beta);
    const std::size_t nS = static_cast<std::size_t>(beta.rows());
    const std::size_t nO = static_cast<std::size_t>(beta.cols());
    const std::size_t nA = num_actions;

    for (std::size_t o = 0; o < nO; ++o) {
        std::vector<std::size_t> support;
        std::vector<double> weights;
        for (std::size_t s = 0; s < nS; ++s) {
            const double b = sys.beta_plus(idx(o), idx(s));
            if (std::abs(b) > kSupportTol) {
                support.push_back(s);
                weights.push_back(b);
                if (std::abs(b) < kSupportWarnTol) {
                    sys.warnings.push_back("pseudoinverse entry (" + std::to_string(o) + ", " +
                                           std::to_string(s) + ") = " + fmt17(b) +
                                           " is close to zero; constraint degree is ill-conditioned");
                }
            }
        }
        const std::size_t k = support.size();
        for (std::size_t a = 0; a < nA; ++a) {
            PolynomialConstraint p;
            p.action = a;
            p.observation = o;
            p.support_states = support;
            p.weights = weights;

            // Sum over maps f: S_o -> A, coefficient sum of beta^+ over f^{-1}(a).
            std::map<Exponents, double> by_maps;
            for_each_map(k, nA, [&](const std::vector<std::size_t>& f) {
                double coeff = 0.0;
                bool hit = false;
                Exponents e(nS * nA, 0);
                for (std::size_t i = 0; i < k; ++i) {
                    e[support[i] * nA + f[i]] = 1;
                    if (f[i] == a) {
                        coeff += weights[i];
                        hit = true;
                    }
                }
                if (hit) by_maps[e] = coeff;
            });

            // Expansion of the product of marginals.
            std::map<Exponents, double> expanded;
            for (std::size_t i = 0; i < k; ++i) {
                for_each_map(k - 1, nA, [&](const std::vector<std::size_t>& g) {
                    Exponents e(nS * nA, 0);
                    e[support[i] * nA + a] = 1;
                    std::size_t gi = 0;
                    for (std::size_t j = 0; j < k; ++j) {
                        if (j != i) e[support[j] * nA + g[gi++]] = 1;
                    }
                    expanded[e] += weights[i];
                });
            }

            if (by_maps.size() != expanded.size()) {
                throw std::logic_error("constraint constructions disagree on the monomial support");
            }
            for (const auto& [e, c] : by_maps) {
                auto it = expanded.find(e);
                if (it == expanded.end() || std::abs(it->second - c) > 1e-12 * std::max(1.0, std::abs(c))) {
                    throw std::logic_error("constraint constructions disagree on a coefficient");
                }
            }
            p.terms = std::move(by_maps);
            sys.constraints.push_back(std::move(p));
        }
    }
    return sys;
}

std::string format_polynomial(const PolynomialConstraint& p, const std::vector<std::string>& states,
                              const std::vector<std::string>& actions) {
    const std::size_t nA = actions.size();
    std::string out;
    for (const auto& [exps, coeff] : p.terms) {
        if (!out.empty()) out += coeff < 0 ? " - " : " + ";
        else if (coeff < 0) out += "-";
        out += fmt17(std::abs(coeff));
        for (std::size_t i = 0; i < exps.size(); ++i) {
            for (int e = 0; e < exps[i]; ++e) out += "*eta[" + states[i / nA] + "," + actions[i % nA] + "]";
        }
    }
    return out.empty() ? "0" : out;
}

FeasibilityReport feasibility_report(const PomdpModel& model, const Frequency& f) {
    FeasibilityReport r;
    r.mdp_residuals = mdp_polytope(model).residual(f);
    r.min_eta = f.eta.minCoeff();
    const ConstraintSystem sys = constraint_polynomials(model.beta(), model.num_actions());
    bool ok = true;
    const double eq = r.mdp_residuals.cwiseAbs().maxCoeff();
    if (eq > kFeasibleEqualityTol) {
        ok = false;
        r.reasons.push_back("linear equality residual " + fmt17(eq));
    }
    if (r.min_eta < -kFeasibleNonnegTol) {
        ok = false;
        r.reasons.push_back("negative frequency " + fmt17(r.min_eta));
    }
    for (const auto& p : sys.constraints) {
        const double v = p.evaluate(f.eta);
        r.poly_values.push_back({p.action, p.observation, v});
        if (v < -kFeasiblePolyTol) {
            ok = false;
            r.reasons.push_back("polynomial (" + model.actions()[p.action] + ", " +
                                model.observations()[p.observation] + ") = " + fmt17(v));
        }
    }
    r.feasible = ok;
    return r;
}

std::vector<FaceDescriptor> enumerate_policy_faces(std::size_t rows, std::size_t actions) {
    if (actions == 0 || actions > 31) throw SizeCapError("unsupported number of actions", "actions");
    const std::uint32_t per_row = (1u << actions) - 1;  // nonempty free-action subsets
    std::vector<FaceDescriptor> faces;
    std::vector<std::uint32_t> mask(rows, 1);
    while (true) {
        FaceDescriptor f;
        f.free_mask = mask;
        for (std::size_t o = 0; o < rows; ++o) {
            f.dimension += std::popcount(mask[o]) - 1;
            for (std::size_t a = 0; a < actions; ++a) {
                if (!(mask[o] >> a & 1u)) f.active_zeros.emplace_back(a, o);
            }
        }
        faces.push_back(std::move(f));
        std::size_t i = 0;
        while (i < rows && ++mask[i] > per_row) mask[i++] = 1;
        if (i == rows) break;
    }
    std::stable_sort(faces.begin(), faces.end(),
                     [](const FaceDescriptor& x, const FaceDescriptor& y) { return x.dimension < y.dimension; });
    return faces;
}

FaceLattice face_lattice(const PomdpModel& model, int max_dim, int samples, std::uint64_t seed) {
    const std::size_t nO = model.num_observations();
    const std::size_t nA = model.num_actions();
    const std::size_t nS = model.num_states();
    if (nO * nA > 16) {
        throw SizeCapError("face enumeration limited to |O||A| <= 16, got " + std::to_string(nO * nA),
                           "observations");
    }
    if (samples < 1) throw PreconditionError("at least one certification sample is required", "samples");
    const ConstraintSystem sys = constraint_polynomials(model.beta(), nA);
    const bool rank_check = model.gamma() < 1.0;

    FaceLattice lat;
    for (auto& f : enumerate_policy_faces(nO, nA)) {
        if (max_dim < 0 || f.dimension <= max_dim) lat.faces.push_back(std::move(f));
    }
    int top = 0;
    for (const auto& f : lat.faces) top = std::max(top, f.dimension);
    lat.f_vector.assign(static_cast<std::size_t>(top) + 1, 0);

    std::map<std::vector<std::uint32_t>, std::size_t> index;
    for (std::size_t i = 0; i < lat.faces.size(); ++i) index[lat.faces[i].free_mask] = i;

    Rng rng(seed);
    lat.certified = true;
    for (std::size_t i = 0; i < lat.faces.size(); ++i) {
        FaceDescriptor& face = lat.faces[i];
        ++lat.f_vector[static_cast<std::size_t>(face.dimension)];

        // Covers: free one more action in a single row.
        for (std::size_t o = 0; o < nO; ++o) {
            for (std::size_t a = 0; a < nA; ++a) {
                if (face.free_mask[o] >> a & 1u) continue;
                auto up = face.free_mask;
                up[o] |= 1u << a;
                auto it = index.find(up);
                if (it != index.end()) lat.covers.emplace_back(i, it->second);
            }
        }

        bool ok = true;
        for (int t = 0; t < samples && ok; ++t) {
            MatrixXd pi = MatrixXd::Zero(idx(nO), idx(nA));
            for (std::size_t o = 0; o < nO; ++o) {
                const int free = std::popcount(face.free_mask[o]);
                const VectorXd w = rng.simplex(free);
                Index j = 0;
                for (std::size_t a = 0; a < nA; ++a) {
                    if (face.free_mask[o] >> a & 1u) pi(idx(o), idx(a)) = w(j++);
                }
            }
            const Policy policy = Policy::observation_policy(pi);
            const Frequency fr = state_action_frequency(model, policy);
            for (const auto& p : sys.constraints) {
                const bool active = !(face.free_mask[p.observation] >> p.action & 1u);
                const double v = p.evaluate(fr.eta);
                if (active ? std::abs(v) > kFeasiblePolyTol : v <= kFeasiblePolyTol) ok = false;
            }
            if (ok && rank_check && face.dimension > 0) {
                // Rank of the frequency map restricted to the face's tangent space.
                const MatrixXd J = policy_gradient(model, policy).jacobian;
                MatrixXd D = MatrixXd::Zero(idx(nS * nA), face.dimension);
                Index col = 0;
                for (std::size_t o = 0; o < nO; ++o) {
                    std::vector<std::size_t> free;
                    for (std::size_t a = 0; a < nA; ++a) {
                        if (face.free_mask[o] >> a & 1u) free.push_back(a);
                    }
                    for (std::size_t j = 1; j < free.size(); ++j, ++col) {
                        for (std::size_t s = 0; s < nS; ++s) {
                            const double b = model.beta()(idx(s), idx(o));
                            D(idx(s * nA + free[j]), col) += b;
                            D(idx(s * nA + free[0]), col) -= b;
                        }
                    }
                }
                Eigen::JacobiSVD<MatrixXd> svd(J * D);
                const VectorXd sv = svd.singularValues();
                Index rank = 0;
                for (Index j = 0; j < sv.size(); ++j) {
                    if (sv(j) > 1e-8 * std::max(1.0, sv(0))) ++rank;
                }
                if (rank != face.dimension) ok = false;
            }
        }
        face.certified = ok;
        lat.certified = lat.certified && ok;
    }
    return lat;
}

} // namespace pomdpgeo
