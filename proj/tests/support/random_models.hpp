#pragma once

#include "pomdpgeo/model.hpp"
#include "pomdpgeo/random.hpp"

#include <string>
#include <vector>

namespace pomdpgeo::testing {

inline std::vector<std::string> labels(const char* prefix, std::size_t n) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i + 1));
    return out;
}

struct RandomModelOptions {
    std::size_t states = 3;
    std::size_t observations = 2;
    std::size_t actions = 2;
    double gamma = 0.9;
    bool positive_mu = true;
    bool identity_beta = false;
    bool square_beta = false;  // observations = states, generic (invertible) beta
    double reward_lo = -1.0;
    double reward_hi = 1.0;
};

inline PomdpModel random_model(Rng& rng, const RandomModelOptions& opt) {
    const auto nS = static_cast<Eigen::Index>(opt.states);
    const auto nA = static_cast<Eigen::Index>(opt.actions);
    std::size_t nO = opt.observations;
    MatrixXd beta;
    if (opt.identity_beta) {
        nO = opt.states;
        beta = MatrixXd::Identity(nS, nS);
    } else {
        if (opt.square_beta) nO = opt.states;
        beta = rng.stochastic(nS, static_cast<Eigen::Index>(nO));
    }
    MatrixXd reward(nS, nA);
    for (Eigen::Index s = 0; s < nS; ++s) {
        for (Eigen::Index a = 0; a < nA; ++a) reward(s, a) = rng.uniform(opt.reward_lo, opt.reward_hi);
    }
    VectorXd mu = opt.positive_mu ? VectorXd(rng.simplex(nS)) : VectorXd(VectorXd::Unit(nS, 0));
    return PomdpModel(labels("s", opt.states), labels("o", nO), labels("a", opt.actions),
                      rng.stochastic(nS * nA, nS), beta, reward, opt.gamma, mu);
}

inline Policy random_policy(Rng& rng, const PomdpModel& model, PolicyKind kind = PolicyKind::observation) {
    const std::size_t rows = kind == PolicyKind::observation ? model.num_observations() : model.num_states();
    return {kind, rng.stochastic(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(model.num_actions()))};
}

/// Oracle: solve the |S||A| fixed point directly.
inline Frequency pair_space_frequency(const PomdpModel& model, const Policy& pi) {
    const MatrixXd tau = effective_policy(model, pi).matrix;
    const MatrixXd P = pair_kernel(model, tau);
    const auto n = P.rows();
    const VectorXd x = (MatrixXd::Identity(n, n) - model.gamma() * P.transpose())
                           .fullPivLu()
                           .solve((1.0 - model.gamma()) * initial_pair_distribution(model, tau));
    MatrixXd eta(static_cast<Eigen::Index>(model.num_states()), static_cast<Eigen::Index>(model.num_actions()));
    for (Eigen::Index i = 0; i < n; ++i) eta(i / eta.cols(), i % eta.cols()) = x(i);
    return Frequency::from_eta(eta);
}

inline std::string fixture(const std::string& name) { return std::string(POMDPGEO_FIXTURES) + "/" + name; }

} // namespace pomdpgeo::testing
