#include "pomdpgeo/freq.hpp"

#include "pomdpgeo/errors.hpp"

#include <cmath>

namespace pomdpgeo {

using Eigen::Index;

namespace {

// Rank tolerance for the stationary eigenspace when gamma = 1.
constexpr double kStationaryRankTol = 1e-8;
constexpr long kCesaroMaxHorizon = 1L << 22;

MatrixXd pairs_from_marginal(const VectorXd& rho, const MatrixXd& tau) {
    return rho.asDiagonal() * tau;
}

VectorXd stationary_marginal(const MatrixXd& p) {
    const Index n = p.rows();
    const MatrixXd A = p.transpose() - MatrixXd::Identity(n, n);
    Eigen::JacobiSVD<MatrixXd> svd(A);
    const VectorXd sv = svd.singularValues();
    Index rank = 0;
    for (Index i = 0; i < sv.size(); ++i) {
        if (sv(i) > kStationaryRankTol) ++rank;
    }
    if (rank < n - 1) {
        throw ErgodicityError("stationary distribution is not unique (stationary space has dimension " +
                              std::to_string(n - rank) + ")");
    }
    MatrixXd bordered(n + 1, n);
    bordered.topRows(n) = A;
    bordered.row(n).setOnes();
    VectorXd rhs = VectorXd::Zero(n + 1);
    rhs(n) = 1.0;
    return bordered.colPivHouseholderQr().solve(rhs);
}

void require_discounted(const PomdpModel& model, const char* what) {
    if (!(model.gamma() < 1.0)) {
        throw UnsupportedError(std::string(what) + " requires gamma < 1", "gamma");
    }
}

} // namespace

Frequency frequency_from_effective(const PomdpModel& model, const MatrixXd& tau) {
    const double gamma = model.gamma();
    if (static_cast<std::size_t>(tau.rows()) != model.num_states() ||
        static_cast<std::size_t>(tau.cols()) != model.num_actions()) {
        throw DimensionError("effective policy has wrong shape", "policy");
    }
    const MatrixXd p = state_kernel(model, tau);
    VectorXd rho;
    if (gamma < 1.0) {
        const Index n = p.rows();
        const MatrixXd A = MatrixXd::Identity(n, n) - gamma * p.transpose();
        rho = A.partialPivLu().solve((1.0 - gamma) * model.mu());
        if (!rho.allFinite()) throw RankError("singular discounted system", "gamma");
    } else {
        rho = stationary_marginal(p);
    }
    return Frequency::from_eta(pairs_from_marginal(rho, tau));
}

Frequency state_action_frequency(const PomdpModel& model, const Policy& pi) {
    return frequency_from_effective(model, effective_policy(model, pi).matrix);
}

long series_terms(double gamma, double tol) {
    if (!(tol > 0.0)) throw PreconditionError("tolerance must be positive", "tol");
    if (!(gamma > 0.0 && gamma < 1.0)) throw PreconditionError("series_terms requires 0 < gamma < 1", "gamma");
    const double t = std::ceil(std::log(tol * (1.0 - gamma)) / std::log(gamma));
    return t > 0.0 ? static_cast<long>(t) : 0L;
}

SeriesResult truncated_series_oracle(const PomdpModel& model, const Policy& pi, double tol) {
    if (!(tol > 0.0)) throw PreconditionError("tolerance must be positive", "tol");
    const MatrixXd tau = effective_policy(model, pi).matrix;
    const MatrixXd PT = pair_kernel(model, tau).transpose();
    const VectorXd x0 = initial_pair_distribution(model, tau);
    const double gamma = model.gamma();
    const Index nA = static_cast<Index>(model.num_actions());

    auto to_frequency = [&](const VectorXd& flat) {
        MatrixXd eta(static_cast<Index>(model.num_states()), nA);
        for (Index i = 0; i < flat.size(); ++i) eta(i / nA, i % nA) = flat(i);
        return Frequency::from_eta(std::move(eta));
    };

    SeriesResult result;
    if (gamma < 1.0) {
        const long T = series_terms(gamma, tol);
        VectorXd x = x0;
        VectorXd acc = VectorXd::Zero(x0.size());
        double weight = 1.0 - gamma;
        for (long t = 0; t <= T; ++t) {
            acc += weight * x;
            x = PT * x;
            weight *= gamma;
        }
        result.frequency = to_frequency(acc);
        result.terms = T;
        result.tail_bound = std::pow(gamma, static_cast<double>(T + 1));
        return result;
    }

    // Cesaro mean: residual of the running average is ||x_T - x_0||_1 / T.
    VectorXd x = x0;
    VectorXd acc = VectorXd::Zero(x0.size());
    long T = 0;
    long checkpoint = 1024;
    while (true) {
        for (; T < checkpoint; ++T) {
            acc += x;
            x = PT * x;
        }
        const double residual = (x - x0).lpNorm<1>() / static_cast<double>(T);
        if (residual <= tol) {
            result.frequency = to_frequency(acc / static_cast<double>(T));
            result.terms = T;
            result.tail_bound = residual;
            return result;
        }
        if (checkpoint >= kCesaroMaxHorizon) {
            throw PreconditionError("Cesaro average did not reach tolerance within " +
                                        std::to_string(kCesaroMaxHorizon) + " steps",
                                    "tol");
        }
        checkpoint *= 2;
    }
}

double fixed_point_residual(const PomdpModel& model, const Policy& pi, const Frequency& freq) {
    const MatrixXd tau = effective_policy(model, pi).matrix;
    const VectorXd eta = freq.flat();
    const double gamma = model.gamma();
    const VectorXd r = eta - gamma * (pair_kernel(model, tau).transpose() * eta) -
                       (1.0 - gamma) * initial_pair_distribution(model, tau);
    return r.cwiseAbs().maxCoeff();
}

double expected_reward_effective(const PomdpModel& model, const MatrixXd& tau) {
    const Frequency f = frequency_from_effective(model, tau);
    return (model.reward().array() * f.eta.array()).sum();
}

double expected_reward(const PomdpModel& model, const Policy& pi) {
    return expected_reward_effective(model, effective_policy(model, pi).matrix);
}

ValueBundle value_bundle(const PomdpModel& model, const Policy& pi, RewardConvention convention) {
    const MatrixXd tau = effective_policy(model, pi).matrix;
    ValueBundle out;
    out.convention = convention;
    const double gamma = model.gamma();
    if (!(gamma < 1.0)) {
        const Frequency f = frequency_from_effective(model, tau);
        out.R = (model.reward().array() * f.eta.array()).sum();
        out.values_available = false;
        return out;
    }
    const Index nS = static_cast<Index>(model.num_states());
    const Index nA = static_cast<Index>(model.num_actions());
    const MatrixXd p = state_kernel(model, tau);
    const VectorXd r_tau = (tau.array() * model.reward().array()).rowwise().sum();
    auto lu = (MatrixXd::Identity(nS, nS) - gamma * p).partialPivLu();
    const VectorXd v_raw = lu.solve(r_tau);
    if (!v_raw.allFinite()) throw RankError("singular value system", "gamma");

    out.Q.resize(nS, nA);
    const VectorXd next = model.alpha() * v_raw;  // indexed by flattened (s, a)
    for (Index s = 0; s < nS; ++s) {
        for (Index a = 0; a < nA; ++a) out.Q(s, a) = model.reward()(s, a) + gamma * next(s * nA + a);
    }
    out.V = convention == RewardConvention::normalized ? VectorXd((1.0 - gamma) * v_raw) : v_raw;
    out.R = model.mu().dot(out.V);
    return out;
}

GradientBundle policy_gradient(const PomdpModel& model, const Policy& pi) {
    require_discounted(model, "policy_gradient");
    const MatrixXd tau = effective_policy(model, pi).matrix;
    const double gamma = model.gamma();
    const Index nS = static_cast<Index>(model.num_states());
    const Index nA = static_cast<Index>(model.num_actions());

    // Marginal of the ambient fixed point; equals the state marginal of eta
    // whenever tau is row-stochastic.
    const MatrixXd p = state_kernel(model, tau);
    const VectorXd rho = (MatrixXd::Identity(nS, nS) - gamma * p.transpose())
                             .partialPivLu()
                             .solve((1.0 - gamma) * model.mu());

    const VectorXd r_tau = (tau.array() * model.reward().array()).rowwise().sum();
    const VectorXd v_raw = (MatrixXd::Identity(nS, nS) - gamma * p).partialPivLu().solve(r_tau);
    const VectorXd next = model.alpha() * v_raw;
    MatrixXd weighted_q(nS, nA);
    for (Index s = 0; s < nS; ++s) {
        for (Index a = 0; a < nA; ++a) {
            weighted_q(s, a) = rho(s) * (model.reward()(s, a) + gamma * next(s * nA + a));
        }
    }

    GradientBundle out;
    out.grad = pi.kind == PolicyKind::observation ? MatrixXd(model.beta().transpose() * weighted_q)
                                                  : weighted_q;

    const Index n = nS * nA;
    const MatrixXd A = MatrixXd::Identity(n, n) - gamma * pair_kernel(model, tau).transpose();
    MatrixXd scale = MatrixXd::Zero(n, n);
    for (Index s = 0; s < nS; ++s) {
        for (Index a = 0; a < nA; ++a) scale(s * nA + a, s * nA + a) = rho(s);
    }
    out.jacobian = A.partialPivLu().solve(scale);
    return out;
}

ConditioningResult conditioning_inverse(const PomdpModel& model, const Frequency& freq,
                                        double threshold) {
    const Index nS = static_cast<Index>(model.num_states());
    const Index nA = static_cast<Index>(model.num_actions());
    if (freq.eta.rows() != nS || freq.eta.cols() != nA) {
        throw DimensionError("frequency has wrong shape", "eta");
    }
    ConditioningResult out{Policy::state_policy(MatrixXd(nS, nA)), std::vector<bool>(nS, false)};
    for (Index s = 0; s < nS; ++s) {
        const double rho = freq.eta.row(s).sum();
        if (rho > threshold) {
            out.policy.matrix.row(s) = freq.eta.row(s) / rho;
        } else {
            out.policy.matrix.row(s).setConstant(1.0 / static_cast<double>(nA));
            out.flagged[static_cast<std::size_t>(s)] = true;
        }
    }
    return out;
}

} // namespace pomdpgeo
