#include "pomdpgeo/rational.hpp"

#include "pomdpgeo/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace pomdpgeo {

using Eigen::Index;

namespace {

double horner(const VectorXd& c, double t) {
    double acc = 0.0;
    for (Index i = c.size() - 1; i >= 0; --i) acc = acc * t + c(i);
    return acc;
}

double horner_derivative(const VectorXd& c, double t) {
    double acc = 0.0;
    for (Index i = c.size() - 1; i >= 1; --i) acc = acc * t + static_cast<double>(i) * c(i);
    return acc;
}

// Coefficients in t = 2x - 1 -> coefficients in x.
VectorXd centered_to_monomial(const VectorXd& c) {
    const Index n = c.size();
    VectorXd out = VectorXd::Zero(n);
    for (Index j = 0; j < n; ++j) {
        // (2x - 1)^j = sum_i C(j,i) 2^i x^i (-1)^(j-i)
        double binom = 1.0;
        for (Index i = 0; i <= j; ++i) {
            const double sign = ((j - i) % 2 == 0) ? 1.0 : -1.0;
            out(i) += c(j) * binom * std::ldexp(1.0, static_cast<int>(i)) * sign;
            binom = binom * static_cast<double>(j - i) / static_cast<double>(i + 1);
        }
    }
    return out;
}

std::vector<double> chebyshev_nodes(int n) {
    std::vector<double> x(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
        x[static_cast<std::size_t>(j)] =
            0.5 - 0.5 * std::cos(std::numbers::pi * (j + 0.5) / static_cast<double>(n));
    }
    return x;
}

bool row_deterministic(const MatrixXd& m, Index row) {
    Index arg = 0;
    const double top = m.row(row).maxCoeff(&arg);
    if (top < 1.0 - 1e-12) return false;
    for (Index a = 0; a < m.cols(); ++a) {
        if (a != arg && m(row, a) > 1e-12) return false;
    }
    return true;
}

int emitting_states(const PomdpModel& model, std::size_t o) {
    int count = 0;
    for (Index s = 0; s < static_cast<Index>(model.num_states()); ++s) {
        if (model.beta()(s, static_cast<Index>(o)) > 0.0) ++count;
    }
    return count;
}

std::vector<Index> differing_rows(const MatrixXd& a, const MatrixXd& b) {
    std::vector<Index> rows;
    for (Index i = 0; i < a.rows(); ++i) {
        if ((a.row(i) - b.row(i)).cwiseAbs().maxCoeff() > 0.0) rows.push_back(i);
    }
    return rows;
}

} // namespace

double RationalCurve::operator()(double x) const {
    const double t = 2.0 * x - 1.0;
    return horner(num_centered, t) / horner(den_centered, t);
}

double RationalCurve::derivative(double x) const {
    const double t = 2.0 * x - 1.0;
    const double f = horner(num_centered, t);
    const double g = horner(den_centered, t);
    const double df = horner_derivative(num_centered, t);
    const double dg = horner_derivative(den_centered, t);
    return 2.0 * (df * g - f * dg) / (g * g);
}

int degree_bound(const PomdpModel& model, const std::vector<std::size_t>& varying_obs) {
    int count = 0;
    for (Index s = 0; s < static_cast<Index>(model.num_states()); ++s) {
        for (std::size_t o : varying_obs) {
            if (o >= model.num_observations()) throw DimensionError("observation out of range", "observations");
            if (model.beta()(s, static_cast<Index>(o)) > 0.0) {
                ++count;
                break;
            }
        }
    }
    return count;
}

RationalCurve fit_rational_curve(const std::function<double(double)>& f, int max_degree) {
    if (max_degree < 0) throw PreconditionError("max_degree must be non-negative", "max_degree");
    double best_residual = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= max_degree; ++k) {
        const int n = 4 * (k + 1);
        const std::vector<double> grid = chebyshev_nodes(n);
        VectorXd fx(n);
        for (int j = 0; j < n; ++j) fx(j) = f(grid[static_cast<std::size_t>(j)]);
        if (!fx.allFinite()) throw PreconditionError("function is not finite on [0, 1]", "curve");

        // Unknowns: num (k+1), den coefficients 1..k; den(t=0) = 1 fixed.
        MatrixXd M(n, 2 * k + 1);
        for (int j = 0; j < n; ++j) {
            const double t = 2.0 * grid[static_cast<std::size_t>(j)] - 1.0;
            double tp = 1.0;
            for (int i = 0; i <= k; ++i) {
                M(j, i) = tp;
                if (i > 0) M(j, k + i) = -fx(j) * tp;
                tp *= t;
            }
        }
        const VectorXd z = M.completeOrthogonalDecomposition().solve(fx);

        RationalCurve c;
        c.num_centered = z.head(k + 1);
        c.den_centered = VectorXd::Zero(k + 1);
        c.den_centered(0) = 1.0;
        for (int i = 1; i <= k; ++i) c.den_centered(i) = z(k + i);
        c.fitted_degree = k;
        c.fit_grid = grid;

        // Validate between fit nodes and at both endpoints.
        c.validation_grid.push_back(0.0);
        for (int j = 0; j + 1 < n; ++j) {
            c.validation_grid.push_back(0.5 * (grid[static_cast<std::size_t>(j)] +
                                               grid[static_cast<std::size_t>(j + 1)]));
        }
        c.validation_grid.push_back(1.0);
        double residual = 0.0;
        for (double x : c.validation_grid) {
            const double v = c(x);
            const double err = std::isfinite(v) ? std::abs(v - f(x)) : std::numeric_limits<double>::infinity();
            residual = std::max(residual, err);
        }
        for (int j = 0; j < n; ++j) {
            residual = std::max(residual, std::abs(c(grid[static_cast<std::size_t>(j)]) - fx(j)));
        }
        c.fit_residual = residual;
        best_residual = std::min(best_residual, residual);
        if (residual <= kRationalFitTol) {
            c.num = centered_to_monomial(c.num_centered);
            c.den = centered_to_monomial(c.den_centered);
            return c;
        }
    }
    char buf[160];
    std::snprintf(buf, sizeof buf, "no rational fit of degree <= %d (best residual %.3g)", max_degree,
                  best_residual);
    throw DegreeExceededError(buf);
}

DegreeCertificate certify_line_degree(const PomdpModel& model, const Policy& pi0, const Policy& pi1,
                                      int max_degree) {
    if (pi0.kind != pi1.kind || pi0.matrix.rows() != pi1.matrix.rows() ||
        pi0.matrix.cols() != pi1.matrix.cols()) {
        throw DimensionError("line endpoints have different shapes", "policy");
    }
    DegreeCertificate out;
    const std::vector<Index> rows = differing_rows(pi0.matrix, pi1.matrix);
    if (pi0.kind == PolicyKind::observation) {
        out.bound = degree_bound(model, std::vector<std::size_t>(rows.begin(), rows.end()));
    } else {
        out.bound = static_cast<int>(rows.size());
    }
    const auto R = [&](double lambda) {
        Policy p{pi0.kind, (1.0 - lambda) * pi0.matrix + lambda * pi1.matrix};
        return expected_reward(model, p);
    };
    const RationalCurve c = fit_rational_curve(R, max_degree);
    out.fitted_degree = c.fitted_degree;
    out.fit_residual = c.fit_residual;
    out.witness_grid = c.validation_grid;
    return out;
}

double interpolation_speed(const PomdpModel& model, const Policy& pi0, const Policy& pi1, double lambda) {
    if (pi0.kind != PolicyKind::state || pi1.kind != PolicyKind::state) {
        throw PreconditionError("interpolation speed is defined for state policies", "policy");
    }
    if (!(model.gamma() < 1.0)) throw UnsupportedError("interpolation speed requires gamma < 1", "gamma");
    if (differing_rows(pi0.matrix, pi1.matrix).size() > 1) {
        throw PreconditionError("policies differ on more than one state", "policy");
    }
    const Index n = static_cast<Index>(model.num_states());
    const MatrixXd I = MatrixXd::Identity(n, n);
    const double g = model.gamma();
    const MatrixXd tau_l = (1.0 - lambda) * pi0.matrix + lambda * pi1.matrix;
    const double d1 = (I - g * state_kernel(model, pi1.matrix)).partialPivLu().determinant();
    const double dl = (I - g * state_kernel(model, tau_l)).partialPivLu().determinant();
    return d1 * lambda / dl;
}

Policy vertex_improvement(const PomdpModel& model, const Policy& pi, std::size_t o) {
    if (pi.kind != PolicyKind::observation) {
        throw PreconditionError("vertex improvement acts on observation policies", "policy");
    }
    if (o >= model.num_observations()) throw DimensionError("observation out of range", "observation");
    const int support = emitting_states(model, o);
    if (support > 1) {
        throw PreconditionError("observation " + model.observations()[o] + " is emitted by " +
                                    std::to_string(support) + " states",
                                "observation");
    }
    if (!(model.gamma() < 1.0)) throw UnsupportedError("vertex improvement requires gamma < 1", "gamma");
    const Index row = static_cast<Index>(o);
    if (row_deterministic(pi.matrix, row)) return pi;

    Policy best = pi;
    double best_reward = -std::numeric_limits<double>::infinity();
    for (Index a = 0; a < static_cast<Index>(model.num_actions()); ++a) {
        Policy cand = pi;
        cand.matrix.row(row).setZero();
        cand.matrix(row, a) = 1.0;
        const double r = expected_reward(model, cand);
        // Ties go to the lowest action index.
        if (a == 0 || r > best_reward + 1e-12 * std::max(1.0, std::abs(best_reward))) {
            best_reward = r;
            best = std::move(cand);
        }
    }
    return best;
}

Policy determinize(const PomdpModel& model, const Policy& pi) {
    Policy out = pi;
    for (std::size_t o = 0; o < model.num_observations(); ++o) {
        if (emitting_states(model, o) <= 1) out = vertex_improvement(model, out, o);
    }
    return out;
}

DeterministicOptimum deterministic_optimum(const PomdpModel& model, PolicyKind kind) {
    const std::size_t rows = kind == PolicyKind::observation ? model.num_observations() : model.num_states();
    const std::size_t nA = model.num_actions();
    double count = std::pow(static_cast<double>(nA), static_cast<double>(rows));
    if (count > static_cast<double>(1 << 20)) {
        throw SizeCapError("deterministic search over " + std::to_string(nA) + "^" + std::to_string(rows) +
                               " policies exceeds the cap of 2^20",
                           "policy");
    }
    std::vector<std::size_t> choice(rows, 0);
    DeterministicOptimum best{Policy::deterministic(kind, choice, nA), -std::numeric_limits<double>::infinity()};
    while (true) {
        Policy p = Policy::deterministic(kind, choice, nA);
        const double r = expected_reward(model, p);
        if (r > best.reward) best = {std::move(p), r};
        std::size_t i = 0;
        while (i < rows && ++choice[i] == nA) choice[i++] = 0;
        if (i == rows) break;
    }
    return best;
}

std::vector<PathPoint> improvement_path(const PomdpModel& model, const Policy& pi, int steps) {
    if (!is_fully_observable(model)) {
        throw PreconditionError("improvement path requires a fully observable model", "beta");
    }
    if (!(model.gamma() < 1.0)) throw UnsupportedError("improvement path requires gamma < 1", "gamma");
    if (steps < 2) throw PreconditionError("at least two path points are required", "steps");
    const bool mu_positive = (model.mu().array() > 0.0).all();
    const bool alpha_positive = (model.alpha().array() > 0.0).all();
    if (!mu_positive && !alpha_positive) {
        throw PreconditionError("improvement path requires mu > 0 or alpha > 0", "mu");
    }
    const Index nS = static_cast<Index>(model.num_states());
    Policy start = pi;
    if (start.kind == PolicyKind::observation) start.kind = PolicyKind::state;
    if (start.matrix.rows() != nS || start.matrix.cols() != static_cast<Index>(model.num_actions())) {
        throw DimensionError("policy has wrong shape", "policy");
    }

    const Frequency f0 = state_action_frequency(model, start);
    const DeterministicOptimum opt = deterministic_optimum(model, PolicyKind::state);
    const Frequency f1 = state_action_frequency(model, opt.policy);

    // pi0 agrees with start wherever rho0 > 0 and takes the optimum's
    // conditional on states that become reachable only along the segment.
    Policy pi0 = start;
    for (Index s = 0; s < nS; ++s) {
        if (f0.rho(s) > 0.0) {
            pi0.matrix.row(s) = f0.eta.row(s) / f0.rho(s);
        } else if (f1.rho(s) > 0.0) {
            pi0.matrix.row(s) = f1.eta.row(s) / f1.rho(s);
        }
    }

    std::vector<PathPoint> path;
    const bool need_first = (pi0.matrix - start.matrix).cwiseAbs().maxCoeff() > 1e-15;
    const int n1 = need_first ? steps / 2 : 0;
    const int n2 = steps - n1;
    for (int j = 0; j < n1; ++j) {
        const double t = n1 == 1 ? 0.0 : static_cast<double>(j) / static_cast<double>(n1 - 1);
        Policy p = Policy::state_policy((1.0 - t) * start.matrix + t * pi0.matrix);
        const double r = expected_reward(model, p);
        path.push_back({std::move(p), r, 1, t});
    }
    for (int j = 0; j < n2; ++j) {
        const double t = n2 == 1 ? 1.0 : static_cast<double>(j) / static_cast<double>(n2 - 1);
        const MatrixXd eta = (1.0 - t) * f0.eta + t * f1.eta;
        Policy p = pi0;
        for (Index s = 0; s < nS; ++s) {
            const double rho = eta.row(s).sum();
            if (rho > 1e-14) p.matrix.row(s) = eta.row(s) / rho;
        }
        const double r = expected_reward(model, p);
        path.push_back({std::move(p), r, 2, t});
    }
    return path;
}

} // namespace pomdpgeo
