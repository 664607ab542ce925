#include "pomdpgeo/critical.hpp"

#include "pomdpgeo/errors.hpp"
#include "pomdpgeo/freq.hpp"
#include "pomdpgeo/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace pomdpgeo {

using Eigen::Index;

namespace {

constexpr double kDerivativeStep = 1e-7;
constexpr double kSecondDiffStep = 1e-5;
constexpr double kFlatCurvature = 1e-9;
constexpr double kDuplicateTol = 1e-8;
constexpr double kPolishWidth = 1e-12;
constexpr double kBracket = 1e-4;

VectorXd poly_mul(const VectorXd& a, const VectorXd& b) {
    VectorXd c = VectorXd::Zero(a.size() + b.size() - 1);
    for (Index i = 0; i < a.size(); ++i) {
        for (Index j = 0; j < b.size(); ++j) c(i + j) += a(i) * b(j);
    }
    return c;
}

VectorXd poly_derivative(const VectorXd& a) {
    if (a.size() <= 1) return VectorXd::Zero(1);
    VectorXd d(a.size() - 1);
    for (Index i = 1; i < a.size(); ++i) d(i - 1) = static_cast<double>(i) * a(i);
    return d;
}

VectorXd pad(const VectorXd& a, Index n) {
    VectorXd out = VectorXd::Zero(std::max(n, a.size()));
    out.head(a.size()) = a;
    return out;
}

// Real roots of sum c_i t^i via the companion matrix.
std::vector<double> real_roots(VectorXd c) {
    const double scale = c.cwiseAbs().maxCoeff();
    if (scale == 0.0) return {};
    Index n = c.size() - 1;
    while (n > 0 && std::abs(c(n)) <= 1e-12 * scale) --n;
    if (n == 0) return {};
    MatrixXd companion = MatrixXd::Zero(n, n);
    for (Index i = 1; i < n; ++i) companion(i, i - 1) = 1.0;
    for (Index i = 0; i < n; ++i) companion(i, n - 1) = -c(i) / c(n);
    Eigen::EigenSolver<MatrixXd> es(companion, false);
    std::vector<double> out;
    for (Index i = 0; i < n; ++i) {
        const auto z = es.eigenvalues()(i);
        if (std::abs(z.imag()) <= 1e-6 * (1.0 + std::abs(z.real()))) out.push_back(z.real());
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
    std::uint64_t r = 0;
    if (__builtin_mul_overflow(a, b, &r)) throw SizeCapError("critical point bound overflows 64 bits", "bound");
    return r;
}

std::uint64_t checked_add(std::uint64_t a, std::uint64_t b) {
    std::uint64_t r = 0;
    if (__builtin_add_overflow(a, b, &r)) throw SizeCapError("critical point bound overflows 64 bits", "bound");
    return r;
}

std::int64_t binom(std::int64_t n, std::int64_t r) {
    if (r < 0 || n < 0 || r > n) return 0;
    std::int64_t out = 1;
    for (std::int64_t i = 1; i <= r; ++i) out = out * (n - r + i) / i;
    return out;
}

void fill_row(MatrixXd& pi, Index row, const std::vector<std::pair<Index, double>>& fixed, const MatrixXd& base) {
    double rest = 1.0;
    for (const auto& [a, v] : fixed) rest -= v;
    double others = 0.0;
    Index n_others = 0;
    for (Index a = 0; a < pi.cols(); ++a) {
        const bool is_fixed = std::any_of(fixed.begin(), fixed.end(), [&](const auto& f) { return f.first == a; });
        if (!is_fixed) {
            others += base(row, a);
            ++n_others;
        }
    }
    for (Index a = 0; a < pi.cols(); ++a) {
        auto it = std::find_if(fixed.begin(), fixed.end(), [&](const auto& f) { return f.first == a; });
        if (it != fixed.end()) {
            pi(row, a) = it->second;
        } else if (others > 0.0) {
            pi(row, a) = rest * base(row, a) / others;
        } else {
            pi(row, a) = rest / static_cast<double>(n_others);
        }
    }
}

} // namespace

std::string to_string(RootClass c) {
    switch (c) {
    case RootClass::max: return "max";
    case RootClass::min: return "min";
    case RootClass::saddle_flat: return "saddle/flat";
    }
    return "saddle/flat";
}

std::string to_string(BoundaryClass c) {
    switch (c) {
    case BoundaryClass::strict_max: return "strict local max";
    case BoundaryClass::strict_min: return "strict local min";
    case BoundaryClass::neither: return "neither";
    }
    return "neither";
}

CriticalSet blind_critical_points(const PomdpModel& model, int grid) {
    if (model.num_observations() != 1 || model.num_actions() != 2) {
        throw PreconditionError("critical point enumeration needs a blind controller with two actions",
                                "observations");
    }
    if (!(model.gamma() < 1.0)) throw UnsupportedError("critical point enumeration requires gamma < 1", "gamma");
    if (grid < 3) throw PreconditionError("grid needs at least 3 points", "grid");

    const auto R = [&](double p) {
        MatrixXd pi(1, 2);
        pi << p, 1.0 - p;
        return expected_reward(model, Policy::observation_policy(pi));
    };
    const auto dR = [&](double p) {
        const double h = std::min({kDerivativeStep, p, 1.0 - p});
        return (R(p + h) - R(p - h)) / (2.0 * h);
    };

    CriticalSet out;

    // Dense scan first: it also detects a constant reward.
    const int n = grid;
    std::vector<double> values(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) values[static_cast<std::size_t>(j)] = R(static_cast<double>(j) / (n - 1));
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    const double scale = std::max(1.0, std::max(std::abs(*lo), std::abs(*hi)));
    if (*hi - *lo <= 1e-12 * scale) {
        out.degenerate = true;
        return out;
    }
    {
        int last = 0;
        for (int j = 1; j < n; ++j) {
            const double d = values[static_cast<std::size_t>(j)] - values[static_cast<std::size_t>(j - 1)];
            const int sg = std::abs(d) <= 1e-14 * scale ? 0 : (d > 0 ? 1 : -1);
            if (sg == 0) continue;
            if (last != 0 && sg != last) out.grid_sign_changes.push_back(static_cast<double>(j - 1) / (n - 1));
            last = sg;
        }
    }

    const RationalCurve curve = fit_rational_curve(R, static_cast<int>(model.num_states()));
    out.fitted_degree = curve.fitted_degree;
    out.fit_residual = curve.fit_residual;

    // Critical points are the zeros of f'g - fg' (in the centred variable).
    const VectorXd& f = curve.num_centered;
    const VectorXd& g = curve.den_centered;
    const VectorXd a = poly_mul(poly_derivative(f), g);
    const VectorXd b = poly_mul(f, poly_derivative(g));
    const Index len = std::max(a.size(), b.size());
    const VectorXd numer = pad(a, len) - pad(b, len);

    double slope_scale = 0.0;
    for (int j = 1; j < n; ++j) {
        slope_scale = std::max(slope_scale, std::abs(values[static_cast<std::size_t>(j)] -
                                                     values[static_cast<std::size_t>(j - 1)]) * (n - 1));
    }

    std::vector<CriticalRoot> roots;
    for (double t : real_roots(numer)) {
        double x = 0.5 * (t + 1.0);
        if (!(x > 1e-9 && x < 1.0 - 1e-9)) continue;
        CriticalRoot root;
        double l = std::max(x - kBracket, 0.5 * x);
        double r = std::min(x + kBracket, 0.5 * (1.0 + x));
        double dl = dR(l);
        double dr = dR(r);
        if ((dl > 0) != (dr > 0) && dl != 0.0 && dr != 0.0) {
            while (r - l > kPolishWidth) {
                const double m = 0.5 * (l + r);
                const double dm = dR(m);
                if ((dm > 0) == (dl > 0)) {
                    l = m;
                    dl = dm;
                } else {
                    r = m;
                }
            }
            x = 0.5 * (l + r);
            root.sign_change = true;
        } else if (std::abs(dR(x)) > 1e-6 * std::max(1.0, slope_scale)) {
            continue;  // artifact of the fit, not a zero of the exact derivative
        }
        root.p = x;
        const double h = std::min({kSecondDiffStep, x, 1.0 - x});
        root.second_difference = (R(x + h) - 2.0 * R(x) + R(x - h)) / (h * h);
        if (root.second_difference < -kFlatCurvature) {
            root.classification = RootClass::max;
        } else if (root.second_difference > kFlatCurvature) {
            root.classification = RootClass::min;
        } else {
            root.classification = RootClass::saddle_flat;
        }
        roots.push_back(root);
    }
    std::sort(roots.begin(), roots.end(), [](const auto& u, const auto& v) { return u.p < v.p; });
    for (const auto& root : roots) {
        if (!out.interior_roots.empty() && root.p - out.interior_roots.back().p <= kDuplicateTol) {
            out.merged_duplicates = true;
            continue;
        }
        out.interior_roots.push_back(root);
    }

    // One-sided derivatives at the endpoints.
    const double h = 1e-6;
    const double d0 = (R(h) - R(0.0)) / h;
    const double d1 = (R(1.0) - R(1.0 - h)) / h;
    const double flat = 1e-9 * std::max(1.0, slope_scale);
    out.p0 = d0 < -flat ? BoundaryClass::strict_max : d0 > flat ? BoundaryClass::strict_min : BoundaryClass::neither;
    out.p1 = d1 > flat ? BoundaryClass::strict_max : d1 < -flat ? BoundaryClass::strict_min : BoundaryClass::neither;

    const double cell = 2.0 / (n - 1);
    for (double s : out.grid_sign_changes) {
        const bool near = std::any_of(out.interior_roots.begin(), out.interior_roots.end(),
                                      [&](const auto& r) { return std::abs(r.p - s) <= cell + 1e-15; });
        if (!near) out.grid_agrees = false;
    }
    for (const auto& r : out.interior_roots) {
        if (!r.sign_change) continue;
        const bool near = std::any_of(out.grid_sign_changes.begin(), out.grid_sign_changes.end(),
                                      [&](double s) { return std::abs(r.p - s) <= cell + 1e-15; });
        if (!near) out.grid_agrees = false;
    }
    return out;
}

std::uint64_t critical_point_bound(const BoundInput& in) {
    if (in.d.size() != in.k.size()) throw PreconditionError("d and k must have equal length", "d");
    if (in.m < 0) throw PreconditionError("m must be non-negative", "m");
    for (std::uint64_t d : in.d) {
        if (d < 1) throw PreconditionError("every d_o must be at least 1", "d");
    }
    std::uint64_t prefix = 1;
    for (std::size_t o = 0; o < in.d.size(); ++o) {
        for (std::uint64_t e = 0; e < in.k[o]; ++e) prefix = checked_mul(prefix, in.d[o]);
    }
    // h[j]: sum over compositions of j into the observations seen so far.
    const std::size_t m = static_cast<std::size_t>(in.m);
    std::vector<std::uint64_t> h(m + 1, 0);
    h[0] = 1;
    for (std::uint64_t d : in.d) {
        const std::uint64_t x = d - 1;
        for (std::size_t j = 1; j <= m; ++j) h[j] = checked_add(h[j], checked_mul(x, h[j - 1]));
    }
    if (in.d.empty()) return m == 0 ? prefix : 0;
    return checked_mul(prefix, h[m]);
}

BoundInput make_bound_input(const MatrixXd& beta, std::size_t num_actions,
                            const std::vector<std::pair<std::size_t, std::size_t>>& active_set) {
    if (beta.rows() != beta.cols() || beta.fullPivLu().rank() < beta.rows()) {
        throw RankError("the critical point bound is only defined for an invertible observation matrix", "beta");
    }
    const MatrixXd bp = pseudoinverse(beta);
    const std::size_t nO = static_cast<std::size_t>(beta.cols());
    std::vector<std::uint64_t> k(nO, 0);
    std::vector<std::vector<bool>> seen(nO, std::vector<bool>(num_actions, false));
    for (const auto& [a, o] : active_set) {
        if (a >= num_actions || o >= nO) throw DimensionError("active set entry out of range", "active_set");
        if (seen[o][a]) continue;
        seen[o][a] = true;
        ++k[o];
    }
    BoundInput in;
    std::int64_t active = 0;
    for (std::size_t o = 0; o < nO; ++o) {
        if (k[o] == 0) continue;
        if (k[o] >= num_actions) {
            throw PreconditionError("every observation must keep a free action", "active_set");
        }
        std::uint64_t d = 0;
        for (Index s = 0; s < bp.cols(); ++s) {
            if (std::abs(bp(static_cast<Index>(o), s)) > kSupportTol) ++d;
        }
        in.d.push_back(d);
        in.k.push_back(k[o]);
        active += static_cast<std::int64_t>(k[o]);
    }
    in.m = static_cast<std::int64_t>(beta.rows()) * (static_cast<std::int64_t>(num_actions) - 1) - active;
    return in;
}

std::int64_t polar_degree_rank_one(int k) {
    if (k < 1) throw PreconditionError("polar degree needs k >= 1", "k");
    const std::int64_t K = k;
    std::int64_t total = 0;
    for (std::int64_t s = 0; s <= 2; ++s) {
        std::int64_t inner = 0;
        for (std::int64_t i = 0; i <= s; ++i) {
            const std::int64_t j = s - i;
            // (k-s)! / ((k-1-i)! (1-j)!) with 1/(-1)! = 0.
            std::int64_t ratio = 0;
            if (j == 1) ratio = 1;
            else if (j == 0) ratio = K - i;
            inner += binom(K, i) * binom(2, j) * ratio;
        }
        const std::int64_t sign = s % 2 == 0 ? 1 : -1;
        total += sign * binom(K - s + 1, K - 1) * inner;
    }
    if (total != K) throw std::logic_error("polar degree sum disagrees with its closed form");
    return total;
}

ScanResult landscape_scan(const PomdpModel& model, const std::vector<ScanAxis>& axes, int resolution,
                          const Policy& base) {
    if (axes.empty()) throw PreconditionError("at least one scan axis is required", "axes");
    if (axes.size() > 2) throw SizeCapError("at most two scan axes are supported", "axes");
    if (resolution < 2) throw PreconditionError("resolution must be at least 2", "grid");
    if (base.kind != PolicyKind::observation ||
        base.matrix.rows() != static_cast<Index>(model.num_observations()) ||
        base.matrix.cols() != static_cast<Index>(model.num_actions())) {
        throw DimensionError("base policy has wrong shape", "policy");
    }
    for (const auto& ax : axes) {
        if (ax.action >= model.num_actions() || ax.observation >= model.num_observations()) {
            throw DimensionError("scan axis out of range", "axes");
        }
    }
    const bool same_row = axes.size() == 2 && axes[0].observation == axes[1].observation;
    if (same_row && axes[0].action == axes[1].action) {
        throw PreconditionError("scan axes must be distinct", "axes");
    }

    ScanResult out;
    out.axes = axes;
    const auto eval = [&](const std::vector<double>& x) {
        MatrixXd pi = base.matrix;
        if (same_row) {
            const Index o = static_cast<Index>(axes[0].observation);
            fill_row(pi, o,
                     {{static_cast<Index>(axes[0].action), x[0]}, {static_cast<Index>(axes[1].action), x[1]}},
                     base.matrix);
        } else {
            for (std::size_t i = 0; i < axes.size(); ++i) {
                fill_row(pi, static_cast<Index>(axes[i].observation), {{static_cast<Index>(axes[i].action), x[i]}},
                         base.matrix);
            }
        }
        out.points.push_back({x, expected_reward(model, Policy::observation_policy(pi))});
    };

    const double step = 1.0 / (resolution - 1);
    if (axes.size() == 1) {
        for (int i = 0; i < resolution; ++i) eval({i * step});
        return out;
    }
    const bool row_full = same_row && model.num_actions() == 2;
    for (int i = 0; i < resolution; ++i) {
        for (int j = 0; j < resolution; ++j) {
            const double x = i * step;
            const double y = j * step;
            if (same_row) {
                if (x + y > 1.0 + 1e-12) continue;
                if (row_full && std::abs(x + y - 1.0) > 1e-12) continue;
            }
            eval({x, y});
        }
    }
    return out;
}

KktReport kkt_report(const PomdpModel& model, const Policy& pi) {
    const MatrixXd grad = policy_gradient(model, pi).grad;
    KktReport rep;
    rep.max_inward = -std::numeric_limits<double>::infinity();
    double sq = 0.0;
    for (Index o = 0; o < pi.matrix.rows(); ++o) {
        double mean = 0.0;
        double weighted = 0.0;
        double mass = 0.0;
        int free = 0;
        for (Index a = 0; a < pi.matrix.cols(); ++a) {
            if (pi.matrix(o, a) > 1e-12) {
                mean += grad(o, a);
                weighted += pi.matrix(o, a) * grad(o, a);
                mass += pi.matrix(o, a);
                ++free;
            }
        }
        if (free == 0) continue;
        mean /= free;
        weighted /= mass;
        for (Index a = 0; a < pi.matrix.cols(); ++a) {
            if (pi.matrix(o, a) > 1e-12) {
                sq += (grad(o, a) - mean) * (grad(o, a) - mean);
            } else {
                rep.max_inward = std::max(rep.max_inward, grad(o, a) - weighted);
            }
        }
    }
    rep.residual = std::sqrt(sq);
    if (!std::isfinite(rep.max_inward)) rep.max_inward = 0.0;
    return rep;
}

double kkt_residual(const PomdpModel& model, const Policy& pi) { return kkt_report(model, pi).residual; }

} // namespace pomdpgeo
