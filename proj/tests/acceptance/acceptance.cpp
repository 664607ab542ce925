// Prints one PASS/FAIL line per acceptance criterion; exits nonzero if any fails.
#include "pomdpgeo/pomdpgeo.hpp"
#include "support/random_models.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

using namespace pomdpgeo;
using namespace pomdpgeo::testing;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

double g_max_stationarity = 0.0;
long g_solves = 0;

Frequency solve(const PomdpModel& m, const Policy& pi) {
    Frequency f = state_action_frequency(m, pi);
    g_max_stationarity = std::max(g_max_stationarity, fixed_point_residual(m, pi, f));
    ++g_solves;
    return f;
}

double max_abs(const MatrixXd& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

std::size_t dim(Rng& rng, std::size_t hi) { return 1 + rng.below(hi); }

Outcome ac01() {
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(101);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const PomdpModel m = random_model(rng, {.states = dim(rng, 4), .observations = dim(rng, 4),
                                                .actions = dim(rng, 4), .gamma = i % 2 == 0 ? 0.3 : 0.9});
        const Policy pi = random_policy(rng, m);
        const Frequency f = solve(m, pi);
        worst = std::max(worst, max_abs(truncated_series_oracle(m, pi, 1e-12).frequency.eta - f.eta));
    }
    const double t = seconds_since(t0);
    return {worst <= 1e-8 && t < 5.0, fmt("max sup-norm gap %.3g", worst) + fmt(", %.2f s", t)};
}

Outcome ac03() {
    Rng rng(103);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const PomdpModel m = random_model(rng, {.states = dim(rng, 4), .observations = dim(rng, 4),
                                                .actions = dim(rng, 4), .gamma = 0.3 + 0.6 * rng.uniform()});
        const Policy pi = random_policy(rng, m);
        const MatrixXd tau = effective_policy(m, pi).matrix;
        const Frequency f = solve(m, pi);
        const ConditioningResult c = conditioning_inverse(m, f);
        for (Eigen::Index s = 0; s < tau.rows(); ++s) {
            if (f.rho(s) > 1e-6) worst = std::max(worst, max_abs(c.policy.matrix.row(s) - tau.row(s)));
        }
    }
    return {worst <= 1e-9, fmt("max recovery error %.3g", worst)};
}

Outcome ac04() {
    Rng rng(104);
    int violations = 0, mdp_bad = 0;
    double worst_res = 0.0;
    for (int i = 0; i < 50; ++i) {
        const std::size_t nS = dim(rng, 4), nO = dim(rng, 3);
        const PomdpModel m = random_model(rng, {.states = nS, .observations = nO, .actions = 2 + rng.below(2),
                                                .gamma = 0.3 + 0.6 * rng.uniform()});
        const Policy p0 = random_policy(rng, m);
        Policy p1 = p0;
        bool any = false;
        for (std::size_t o = 0; o < nO; ++o) {
            if (rng.uniform() < 0.5 || (!any && o + 1 == nO)) {
                p1.matrix.row(static_cast<Eigen::Index>(o)) = rng.simplex(m.num_actions()).transpose();
                any = true;
            }
        }
        try {
            const DegreeCertificate c = certify_line_degree(m, p0, p1, static_cast<int>(nS) + 1);
            if (!c.within_bound()) ++violations;
        } catch (const Error&) {
            ++violations;
        }
    }
    for (int i = 0; i < 50; ++i) {
        const PomdpModel m = random_model(rng, {.states = dim(rng, 4), .actions = 2 + rng.below(2),
                                                .gamma = 0.3 + 0.6 * rng.uniform(), .identity_beta = true});
        const Policy p0 = random_policy(rng, m);
        Policy p1 = p0;
        p1.matrix.row(static_cast<Eigen::Index>(rng.below(m.num_states()))) = rng.simplex(m.num_actions()).transpose();
        try {
            const DegreeCertificate c = certify_line_degree(m, p0, p1, 3);
            worst_res = std::max(worst_res, c.fit_residual);
            if (c.fitted_degree > 1 || c.fit_residual > 1e-7) ++mdp_bad;
        } catch (const Error&) {
            ++mdp_bad;
        }
    }
    return {violations == 0 && mdp_bad == 0,
            std::to_string(violations) + " bound violations, " + std::to_string(mdp_bad) +
                " bad MDP lines" + fmt(", max MDP residual %.3g", worst_res)};
}

Outcome ac05() {
    Rng rng(105);
    double worst = 0.0;
    int non_monotone = 0;
    for (int i = 0; i < 50; ++i) {
        const PomdpModel m = random_model(rng, {.states = dim(rng, 4), .observations = dim(rng, 3),
                                                .actions = 2 + rng.below(2), .gamma = 0.3 + 0.6 * rng.uniform()});
        const Policy p0 = random_policy(rng, m, PolicyKind::state);
        Policy p1 = p0;
        p1.matrix.row(static_cast<Eigen::Index>(rng.below(m.num_states()))) = rng.simplex(m.num_actions()).transpose();
        const Frequency f0 = solve(m, p0), f1 = solve(m, p1);
        double prev = -1.0;
        for (int j = 0; j <= 10; ++j) {
            const double l = j / 10.0;
            const Policy pl = Policy::state_policy((1 - l) * p0.matrix + l * p1.matrix);
            const double c = interpolation_speed(m, p0, p1, l);
            worst = std::max(worst, max_abs(f0.eta + c * (f1.eta - f0.eta) - solve(m, pl).eta));
            if (c < prev) ++non_monotone;
            prev = c;
        }
    }
    return {worst <= 1e-9 && non_monotone == 0,
            fmt("max identity error %.3g", worst) + ", " + std::to_string(non_monotone) + " monotonicity breaks"};
}

Policy sparse_policy(Rng& rng, std::size_t rows, std::size_t actions) {
    MatrixXd p = rng.stochastic(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(actions));
    for (Eigen::Index o = 0; o < p.rows(); ++o) {
        for (Eigen::Index a = 0; a < p.cols(); ++a) {
            if (rng.uniform() < 0.3) p(o, a) = 0.0;
        }
        if (p.row(o).sum() == 0.0) p(o, static_cast<Eigen::Index>(rng.below(actions))) = 1.0;
        p.row(o) /= p.row(o).sum();
    }
    return Policy::observation_policy(p);
}

Outcome ac06() {
    Rng rng(106);
    std::vector<PomdpModel> models{load_model(fixture("fig1.json")), load_model(fixture("appendixG3.json"))};
    for (int i = 0; i < 8; ++i) {
        models.push_back(random_model(rng, {.states = 2 + rng.below(3), .actions = 2 + rng.below(2),
                                            .gamma = 0.3 + 0.6 * rng.uniform(), .square_beta = true}));
    }
    double min_p = 1e300;
    long mismatches = 0;
    for (const PomdpModel& m : models) {
        const ConstraintSystem sys = constraint_polynomials(m.beta(), m.num_actions());
        for (int k = 0; k < 1000; ++k) {
            const Policy pi = k % 2 == 0 ? random_policy(rng, m) : sparse_policy(rng, m.num_observations(), m.num_actions());
            const Frequency f = solve(m, pi);
            for (const PolynomialConstraint& p : sys.constraints) {
                const double v = p.evaluate(f.eta);
                min_p = std::min(min_p, v);
                const bool active = std::abs(v) <= 1e-8;
                const bool zero = pi.matrix(static_cast<Eigen::Index>(p.observation), static_cast<Eigen::Index>(p.action)) == 0.0;
                if (active != zero) ++mismatches;
            }
        }
    }
    return {min_p >= -1e-10 && mismatches == 0,
            fmt("min p %.3g", min_p) + ", " + std::to_string(mismatches) + " active-set mismatches over " +
                std::to_string(models.size()) + " models"};
}

Outcome ac07() {
    Rng rng(107);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const PomdpModel m = random_model(rng, {.states = dim(rng, 4), .observations = 1, .actions = dim(rng, 4),
                                                .gamma = 0.3 + 0.6 * rng.uniform()});
        const MatrixXd eta = solve(m, random_policy(rng, m)).eta;
        for (Eigen::Index s = 0; s < eta.rows(); ++s) {
            for (Eigen::Index t = s + 1; t < eta.rows(); ++t) {
                for (Eigen::Index a = 0; a < eta.cols(); ++a) {
                    for (Eigen::Index b = a + 1; b < eta.cols(); ++b) {
                        worst = std::max(worst, std::abs(eta(s, a) * eta(t, b) - eta(s, b) * eta(t, a)));
                    }
                }
            }
        }
    }
    return {worst <= 1e-12, fmt("max 2x2 minor %.3g", worst)};
}

std::string fvec(const std::vector<int>& v) {
    std::string s = "(";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s + ")";
}

Outcome ac08() {
    const FaceLattice fig = face_lattice(load_model(fixture("fig1.json")));
    const FaceLattice g3 = face_lattice(load_model(fixture("appendixG3.json")));
    const bool ok = fig.f_vector == std::vector<int>{4, 4, 1} && g3.f_vector == std::vector<int>{8, 12, 6, 1} &&
                    fig.certified && g3.certified;
    return {ok, "figure-1 " + fvec(fig.f_vector) + ", 3-state " + fvec(g3.f_vector) +
                    (fig.certified && g3.certified ? ", certified" : ", not certified")};
}

Outcome ac09() {
    const auto t0 = std::chrono::steady_clock::now();
    const PomdpModel base = load_model(fixture("appendixE.json"));
    bool found = false, agree = true;
    std::string counts;
    for (double g : {0.5, 0.7, 0.9, 0.95, 0.99}) {
        std::vector<std::size_t> n;
        bool ends_max = false;
        for (Eigen::Index s = 0; s < 3; ++s) {
            const CriticalSet c = blind_critical_points(base.with_gamma(g).with_mu(VectorXd::Unit(3, s)));
            agree = agree && c.grid_agrees;
            n.push_back(c.interior_roots.size());
            if (s == 1) ends_max = c.p0 == BoundaryClass::strict_max && c.p1 == BoundaryClass::strict_max;
        }
        counts += fmt(" g=%.2f:", g) + "(" + std::to_string(n[0]) + "," + std::to_string(n[1]) + "," +
                  std::to_string(n[2]) + ")";
        if (n == std::vector<std::size_t>{2, 0, 2} && ends_max) found = true;
    }
    const double t = seconds_since(t0);
    return {found && agree && t < 10.0,
            "counts" + counts + (agree ? ", grid agrees" : ", grid disagrees") + fmt(", %.2f s", t)};
}

Outcome ac10() {
    Rng rng(110);
    int violations = 0;
    std::size_t most = 0;
    for (int i = 0; i < 200; ++i) {
        const std::size_t nS = dim(rng, 4);
        const PomdpModel m = random_model(rng, {.states = nS, .observations = 1, .actions = 2,
                                                .gamma = 0.3 + 0.6 * rng.uniform()});
        try {
            const std::size_t n = blind_critical_points(m, 2000).interior_roots.size();
            most = std::max(most, n);
            if (n > nS) ++violations;
        } catch (const Error&) {
            ++violations;
        }
    }
    return {violations == 0, std::to_string(violations) + " violations, max count " + std::to_string(most)};
}

std::uint64_t brute_force_bound(const BoundInput& in) {
    std::uint64_t prefix = 1;
    for (std::size_t o = 0; o < in.d.size(); ++o) {
        for (std::uint64_t e = 0; e < in.k[o]; ++e) prefix *= in.d[o];
    }
    std::uint64_t sum = 0;
    std::vector<std::int64_t> parts(in.d.size(), 0);
    std::function<void(std::size_t, std::int64_t)> rec = [&](std::size_t o, std::int64_t left) {
        if (o == in.d.size()) {
            if (left != 0) return;
            std::uint64_t term = 1;
            for (std::size_t i = 0; i < parts.size(); ++i) {
                for (std::int64_t e = 0; e < parts[i]; ++e) term *= in.d[i] - 1;
            }
            sum += term;
            return;
        }
        for (std::int64_t i = 0; i <= left; ++i) {
            parts[o] = i;
            rec(o + 1, left - i);
        }
    };
    rec(0, in.m);
    return prefix * sum;
}

Outcome ac11() {
    Rng rng(111);
    bool empty_ok = true;
    for (int i = 0; i < 20; ++i) {
        const PomdpModel m = random_model(rng, {.states = 2 + rng.below(3), .square_beta = true});
        for (std::int64_t mm = 1; mm <= 4; ++mm) {
            BoundInput in = make_bound_input(m.beta(), m.num_actions(), {});
            in.m = mm;
            empty_ok = empty_ok && critical_point_bound(in) == 0;
        }
    }
    const std::uint64_t fig = critical_point_bound(make_bound_input(load_model(fixture("fig1.json")).beta(), 2, {{0, 1}}));
    long cases = 0, mismatches = 0;
    std::function<void(BoundInput&, std::size_t)> rec = [&](BoundInput& in, std::size_t n) {
        if (in.d.size() == n) {
            for (std::int64_t m = 0; m <= 6; ++m) {
                in.m = m;
                ++cases;
                if (critical_point_bound(in) != brute_force_bound(in)) ++mismatches;
            }
            return;
        }
        for (std::uint64_t d = 1; d <= 4; ++d) {
            for (std::uint64_t k = 0; k <= 2; ++k) {
                in.d.push_back(d);
                in.k.push_back(k);
                rec(in, n);
                in.d.pop_back();
                in.k.pop_back();
            }
        }
    };
    for (std::size_t n = 0; n <= 3; ++n) {
        BoundInput in;
        rec(in, n);
    }
    return {empty_ok && fig == 2 && mismatches == 0,
            std::string(empty_ok ? "empty active set gives 0" : "empty active set nonzero") + ", figure-1 case " +
                std::to_string(fig) + ", " + std::to_string(mismatches) + "/" + std::to_string(cases) +
                " brute-force mismatches"};
}

Outcome ac12() {
    int bad = 0;
    for (int k = 1; k <= 12; ++k) bad += polar_degree_rank_one(k) != k;
    return {bad == 0, std::to_string(bad) + " mismatches for k = 1..12"};
}

Outcome ac13() {
    Rng rng(113);
    double worst = 0.0;
    const double h = 1e-6;
    for (int i = 0; i < 20; ++i) {
        const PomdpModel m = random_model(rng, {.states = dim(rng, 4), .observations = dim(rng, 3),
                                                .actions = 2 + rng.below(2), .gamma = 0.3 + 0.6 * rng.uniform()});
        for (int j = 0; j < 20; ++j) {
            const Policy pi = random_policy(rng, m);
            const MatrixXd g = policy_gradient(m, pi).grad;
            MatrixXd fd(g.rows(), g.cols());
            for (Eigen::Index o = 0; o < g.rows(); ++o) {
                for (Eigen::Index a = 0; a < g.cols(); ++a) {
                    Policy up = pi, dn = pi;
                    up.matrix(o, a) += h;
                    dn.matrix(o, a) -= h;
                    fd(o, a) = (expected_reward_effective(m, effective_policy(m, up).matrix) -
                                expected_reward_effective(m, effective_policy(m, dn).matrix)) /
                               (2 * h);
                }
            }
            const double scale = max_abs(g);
            if (scale > 0) worst = std::max(worst, max_abs(fd - g) / scale);
        }
    }
    return {worst <= 1e-5, fmt("max relative error %.3g", worst)};
}

Outcome ac14() {
    Rng rng(114);
    double worst = -1e300;
    for (int i = 0; i < 20; ++i) {
        const PomdpModel m = random_model(rng, {.states = dim(rng, 3), .actions = dim(rng, 3),
                                                .gamma = 0.3 + 0.6 * rng.uniform(), .identity_beta = true});
        const double best_det = deterministic_optimum(m, PolicyKind::state).reward;
        double best = -1e300;
        for (int k = 0; k < 10000; ++k) {
            const Policy pi = random_policy(rng, m, PolicyKind::state);
            const Frequency f = solve(m, pi);
            best = std::max(best, (m.reward().array() * f.eta.array()).sum());
        }
        worst = std::max(worst, best - best_det);
    }
    return {worst <= 1e-9, fmt("max (stochastic - deterministic) %.3g", worst)};
}

Outcome ac15() {
    Rng rng(115);
    double worst_drop = 0.0, worst_end = 0.0;
    int failures = 0;
    for (int i = 0; i < 50; ++i) {
        const PomdpModel m = random_model(rng, {.states = dim(rng, 3), .actions = 2 + rng.below(2),
                                                .gamma = 0.3 + 0.6 * rng.uniform(), .identity_beta = true});
        try {
            const auto path = improvement_path(m, random_policy(rng, m, PolicyKind::state), 200);
            for (std::size_t j = 1; j < path.size(); ++j) {
                worst_drop = std::max(worst_drop, path[j - 1].reward - path[j].reward);
            }
            worst_end = std::max(worst_end, std::abs(path.back().reward - deterministic_optimum(m, PolicyKind::state).reward));
        } catch (const Error&) {
            ++failures;
        }
    }
    return {failures == 0 && worst_drop <= 1e-10 && worst_end <= 1e-10,
            fmt("max decrease %.3g", worst_drop) + fmt(", endpoint gap %.3g", worst_end) +
                (failures ? ", " + std::to_string(failures) + " errors" : "")};
}

} // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"oracle equivalence", ac01},   {"stationarity", nullptr},      {"conditioning round trip", ac03},
        {"degree bounds", ac04},        {"line interpolation", ac05},   {"constraint soundness", ac06},
        {"blind minors", ac07},         {"face lattices", ac08},        {"blind three-state fixture", ac09},
        {"critical count bound", ac10}, {"bound evaluator", ac11},      {"polar degree", ac12},
        {"gradient check", ac13},       {"deterministic optima", ac14}, {"improvement paths", ac15},
    };
    std::vector<Outcome> results(criteria.size());
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        if (!criteria[i].second) continue;
        try {
            results[i] = criteria[i].second();
        } catch (const std::exception& e) {
            results[i] = {false, std::string("exception: ") + e.what()};
        }
    }
    results[1] = {g_max_stationarity <= 1e-10,
                  fmt("max residual %.3g", g_max_stationarity) + " over " + std::to_string(g_solves) + " solves"};
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        std::printf("[%s] AC%02zu %s: %s\n", results[i].pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                    results[i].detail.c_str());
        failed += !results[i].pass;
    }
    std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
