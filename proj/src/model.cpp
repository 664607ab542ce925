#include "pomdpgeo/model.hpp"

#include "pomdpgeo/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace pomdpgeo {

using json = nlohmann::json;
using Eigen::Index;

namespace {

Index idx(std::size_t i) { return static_cast<Index>(i); }

std::string join_path(const std::string& base, std::size_t i) {
    return base + "[" + std::to_string(i) + "]";
}

std::size_t find_label(const std::vector<std::string>& labels, std::string_view label,
                       const char* what) {
    auto it = std::find(labels.begin(), labels.end(), label);
    if (it == labels.end()) {
        throw PreconditionError(std::string("unknown ") + what + " label '" + std::string(label) + "'",
                                what);
    }
    return static_cast<std::size_t>(it - labels.begin());
}

const json& require(const json& doc, const char* key) {
    if (!doc.is_object()) throw ParseError("document must be an object", "$");
    auto it = doc.find(key);
    if (it == doc.end()) throw ParseError(std::string("missing field '") + key + "'", key);
    return *it;
}

std::vector<std::string> parse_labels(const json& doc, const char* key) {
    const json& arr = require(doc, key);
    if (!arr.is_array()) throw ParseError("expected an array of strings", key);
    std::vector<std::string> out;
    for (std::size_t i = 0; i < arr.size(); ++i) {
        if (!arr[i].is_string()) throw ParseError("expected a string", join_path(key, i));
        out.push_back(arr[i].get<std::string>());
    }
    if (out.empty()) throw ParseError("label list must be non-empty", key);
    return out;
}

double parse_number(const json& v, const std::string& path) {
    if (!v.is_number()) throw ParseError("expected a number", path);
    return v.get<double>();
}

const json& expect_array(const json& v, std::size_t n, const std::string& path) {
    if (!v.is_array()) throw ParseError("expected an array", path);
    if (v.size() != n) {
        throw ParseError("expected " + std::to_string(n) + " entries, found " +
                             std::to_string(v.size()),
                         path);
    }
    return v;
}

VectorXd parse_vector(const json& v, std::size_t n, const std::string& path) {
    expect_array(v, n, path);
    VectorXd out(idx(n));
    for (std::size_t i = 0; i < n; ++i) out(idx(i)) = parse_number(v[i], join_path(path, i));
    return out;
}

MatrixXd parse_matrix(const json& v, std::size_t rows, std::size_t cols, const std::string& path) {
    expect_array(v, rows, path);
    MatrixXd out(idx(rows), idx(cols));
    for (std::size_t i = 0; i < rows; ++i) {
        out.row(idx(i)) = parse_vector(v[i], cols, join_path(path, i)).transpose();
    }
    return out;
}

void check_unique(const std::vector<std::string>& labels, const char* key) {
    for (std::size_t i = 0; i < labels.size(); ++i) {
        for (std::size_t j = i + 1; j < labels.size(); ++j) {
            if (labels[i] == labels[j]) {
                throw ParseError("duplicate label '" + labels[i] + "'", join_path(key, j));
            }
        }
    }
}

json parse_json(std::string_view text) {
    try {
        return json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("malformed document: ") + e.what(), "$");
    }
}

void check_row_stochastic(const MatrixXd& m, const std::string& name,
                          std::vector<Violation>& out) {
    for (Index i = 0; i < m.rows(); ++i) {
        for (Index j = 0; j < m.cols(); ++j) {
            const double v = m(i, j);
            if (!std::isfinite(v)) {
                out.push_back({name + "[" + std::to_string(i) + "][" + std::to_string(j) + "]",
                               "entry is not finite", std::numeric_limits<double>::infinity()});
            } else if (v < 0.0) {
                out.push_back({name + "[" + std::to_string(i) + "][" + std::to_string(j) + "]",
                               "negative probability", -v});
            }
        }
        const double dev = std::abs(m.row(i).sum() - 1.0);
        if (dev > kStochasticTol) {
            out.push_back({name + "[" + std::to_string(i) + "]", "row does not sum to one", dev});
        }
    }
}

} // namespace

PomdpModel::PomdpModel(std::vector<std::string> states, std::vector<std::string> observations,
                       std::vector<std::string> actions, MatrixXd alpha, MatrixXd beta,
                       MatrixXd reward, double gamma, VectorXd mu)
    : states_(std::move(states)),
      observations_(std::move(observations)),
      actions_(std::move(actions)),
      alpha_(std::move(alpha)),
      beta_(std::move(beta)),
      reward_(std::move(reward)),
      gamma_(gamma),
      mu_(std::move(mu)) {
    const auto nS = idx(states_.size());
    const auto nO = idx(observations_.size());
    const auto nA = idx(actions_.size());
    if (nS == 0 || nO == 0 || nA == 0) throw DimensionError("state, observation and action spaces must be non-empty");
    if (alpha_.rows() != nS * nA || alpha_.cols() != nS) throw DimensionError("alpha has wrong shape", "alpha");
    if (beta_.rows() != nS || beta_.cols() != nO) throw DimensionError("beta has wrong shape", "beta");
    if (reward_.rows() != nS || reward_.cols() != nA) throw DimensionError("reward has wrong shape", "reward");
    if (mu_.size() != nS) throw DimensionError("mu has wrong length", "mu");
}

PomdpModel PomdpModel::with_gamma(double gamma) const {
    PomdpModel copy = *this;
    copy.gamma_ = gamma;
    return copy;
}

PomdpModel PomdpModel::with_mu(VectorXd mu) const {
    return PomdpModel(states_, observations_, actions_, alpha_, beta_, reward_, gamma_, std::move(mu));
}

PomdpModel PomdpModel::with_reward(MatrixXd reward) const {
    return PomdpModel(states_, observations_, actions_, alpha_, beta_, std::move(reward), gamma_, mu_);
}

PomdpModel PomdpModel::with_beta(MatrixXd beta, std::vector<std::string> observations) const {
    return PomdpModel(states_, std::move(observations), actions_, alpha_, std::move(beta), reward_,
                      gamma_, mu_);
}

std::size_t PomdpModel::state_index(std::string_view label) const {
    return find_label(states_, label, "state");
}
std::size_t PomdpModel::observation_index(std::string_view label) const {
    return find_label(observations_, label, "observation");
}
std::size_t PomdpModel::action_index(std::string_view label) const {
    return find_label(actions_, label, "action");
}

Policy Policy::uniform(PolicyKind kind, std::size_t rows, std::size_t actions) {
    return {kind, MatrixXd::Constant(idx(rows), idx(actions), 1.0 / static_cast<double>(actions))};
}

Policy Policy::deterministic(PolicyKind kind, const std::vector<std::size_t>& choice,
                             std::size_t actions) {
    MatrixXd m = MatrixXd::Zero(idx(choice.size()), idx(actions));
    for (std::size_t i = 0; i < choice.size(); ++i) {
        if (choice[i] >= actions) throw DimensionError("action index out of range", "policy");
        m(idx(i), idx(choice[i])) = 1.0;
    }
    return {kind, std::move(m)};
}

Frequency Frequency::from_eta(MatrixXd eta) {
    VectorXd rho = eta.rowwise().sum();
    return {std::move(eta), std::move(rho)};
}

VectorXd Frequency::flat() const {
    VectorXd out(eta.size());
    for (Index s = 0; s < eta.rows(); ++s) {
        for (Index a = 0; a < eta.cols(); ++a) out(s * eta.cols() + a) = eta(s, a);
    }
    return out;
}

PomdpModel parse_canonical_model(std::string_view text) {
    const json doc = parse_json(text);
    auto states = parse_labels(doc, "states");
    auto observations = parse_labels(doc, "observations");
    auto actions = parse_labels(doc, "actions");
    check_unique(states, "states");
    check_unique(observations, "observations");
    check_unique(actions, "actions");
    const std::size_t nS = states.size(), nO = observations.size(), nA = actions.size();

    const json& jalpha = expect_array(require(doc, "alpha"), nS, "alpha");
    MatrixXd alpha(idx(nS * nA), idx(nS));
    for (std::size_t s = 0; s < nS; ++s) {
        const std::string ps = join_path("alpha", s);
        expect_array(jalpha[s], nA, ps);
        for (std::size_t a = 0; a < nA; ++a) {
            alpha.row(idx(s * nA + a)) = parse_vector(jalpha[s][a], nS, join_path(ps, a)).transpose();
        }
    }
    MatrixXd beta = parse_matrix(require(doc, "beta"), nS, nO, "beta");
    MatrixXd reward = parse_matrix(require(doc, "reward"), nS, nA, "reward");
    const double gamma = parse_number(require(doc, "gamma"), "gamma");
    VectorXd mu = parse_vector(require(doc, "mu"), nS, "mu");
    return PomdpModel(std::move(states), std::move(observations), std::move(actions),
                      std::move(alpha), std::move(beta), std::move(reward), gamma, std::move(mu));
}

PomdpModel parse_graph_model(std::string_view text) {
    const json doc = parse_json(text);
    auto states = parse_labels(doc, "states");
    auto actions = parse_labels(doc, "actions");
    check_unique(states, "states");
    check_unique(actions, "actions");
    const std::size_t nS = states.size(), nA = actions.size();

    std::vector<std::string> observations;
    MatrixXd beta;
    const json& jbeta = require(doc, "beta");
    if (jbeta.is_string() && jbeta.get<std::string>() == "blind") {
        observations = {"o"};
        beta = MatrixXd::Ones(idx(nS), 1);
    } else if (jbeta.is_string() && jbeta.get<std::string>() == "identity") {
        for (const auto& s : states) observations.push_back("o_" + s);
        beta = MatrixXd::Identity(idx(nS), idx(nS));
    } else {
        observations = parse_labels(doc, "observations");
        check_unique(observations, "observations");
        beta = parse_matrix(jbeta, nS, observations.size(), "beta");
    }

    VectorXd mu;
    const json& jmu = require(doc, "mu");
    if (jmu.is_string() && jmu.get<std::string>() == "uniform") {
        mu = VectorXd::Constant(idx(nS), 1.0 / static_cast<double>(nS));
    } else if (jmu.is_string()) {
        mu = VectorXd::Zero(idx(nS));
        auto it = std::find(states.begin(), states.end(), jmu.get<std::string>());
        if (it == states.end()) throw ParseError("unknown state label", "mu");
        mu(it - states.begin()) = 1.0;
    } else {
        mu = parse_vector(jmu, nS, "mu");
    }
    const double gamma = parse_number(require(doc, "gamma"), "gamma");

    const json& edges = require(doc, "edges");
    if (!edges.is_array()) throw ParseError("expected an array", "edges");
    MatrixXd alpha = MatrixXd::Zero(idx(nS * nA), idx(nS));
    MatrixXd reward = MatrixXd::Zero(idx(nS), idx(nA));
    std::vector<bool> seen(nS * nA, false);
    auto label_of = [](const json& e, const char* key, const std::vector<std::string>& labels,
                       const std::string& path) {
        auto it = e.find(key);
        if (it == e.end() || !it->is_string()) throw ParseError(std::string("missing string field '") + key + "'", path);
        auto pos = std::find(labels.begin(), labels.end(), it->get<std::string>());
        if (pos == labels.end()) throw ParseError("unknown label '" + it->get<std::string>() + "'", path + "." + key);
        return static_cast<std::size_t>(pos - labels.begin());
    };
    for (std::size_t i = 0; i < edges.size(); ++i) {
        const std::string path = join_path("edges", i);
        const json& e = edges[i];
        if (!e.is_object()) throw ParseError("edge must be an object", path);
        const std::size_t from = label_of(e, "from", states, path);
        const std::size_t act = label_of(e, "action", actions, path);
        const std::size_t to = label_of(e, "to", states, path);
        const double prob = e.contains("prob") ? parse_number(e["prob"], path + ".prob") : 1.0;
        const double r = e.contains("reward") ? parse_number(e["reward"], path + ".reward") : 0.0;
        alpha(idx(from * nA + act), idx(to)) += prob;
        reward(idx(from), idx(act)) += prob * r;
        seen[from * nA + act] = true;
    }
    for (std::size_t s = 0; s < nS; ++s) {
        for (std::size_t a = 0; a < nA; ++a) {
            if (!seen[s * nA + a]) {
                throw ParseError("no edge for state '" + states[s] + "' and action '" + actions[a] + "'",
                                 "edges");
            }
        }
    }
    return PomdpModel(std::move(states), std::move(observations), std::move(actions),
                      std::move(alpha), std::move(beta), std::move(reward), gamma, std::move(mu));
}

PomdpModel parse_model(std::string_view text) {
    const json doc = parse_json(text);
    if (doc.is_object() && doc.contains("edges")) return parse_graph_model(text);
    return parse_canonical_model(text);
}

PomdpModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open model file '" + path + "'", path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_model(buf.str());
}

std::string serialize_model(const PomdpModel& model) {
    nlohmann::ordered_json doc;
    const std::size_t nS = model.num_states(), nA = model.num_actions();
    doc["states"] = model.states();
    doc["observations"] = model.observations();
    doc["actions"] = model.actions();
    auto alpha = nlohmann::ordered_json::array();
    for (std::size_t s = 0; s < nS; ++s) {
        auto per_state = nlohmann::ordered_json::array();
        for (std::size_t a = 0; a < nA; ++a) {
            auto row = nlohmann::ordered_json::array();
            for (std::size_t t = 0; t < nS; ++t) row.push_back(model.alpha(s, a, t));
            per_state.push_back(row);
        }
        alpha.push_back(per_state);
    }
    doc["alpha"] = alpha;
    auto matrix = [](const MatrixXd& m) {
        auto out = nlohmann::ordered_json::array();
        for (Index i = 0; i < m.rows(); ++i) {
            auto row = nlohmann::ordered_json::array();
            for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
            out.push_back(row);
        }
        return out;
    };
    doc["beta"] = matrix(model.beta());
    doc["reward"] = matrix(model.reward());
    doc["gamma"] = model.gamma();
    auto mu = nlohmann::ordered_json::array();
    for (Index s = 0; s < model.mu().size(); ++s) mu.push_back(model.mu()(s));
    doc["mu"] = mu;
    return doc.dump(2);
}

ValidationReport validate(const PomdpModel& model) {
    ValidationReport report;
    auto& out = report.violations;
    const std::size_t nA = model.num_actions();
    for (std::size_t s = 0; s < model.num_states(); ++s) {
        for (std::size_t a = 0; a < nA; ++a) {
            const auto row = model.alpha().row(idx(s * nA + a));
            const std::string path = "alpha[" + std::to_string(s) + "][" + std::to_string(a) + "]";
            for (Index t = 0; t < row.size(); ++t) {
                if (!std::isfinite(row(t))) {
                    out.push_back({path + "[" + std::to_string(t) + "]", "entry is not finite",
                                   std::numeric_limits<double>::infinity()});
                } else if (row(t) < 0.0) {
                    out.push_back({path + "[" + std::to_string(t) + "]", "negative probability", -row(t)});
                }
            }
            const double dev = std::abs(row.sum() - 1.0);
            if (dev > kStochasticTol) out.push_back({path, "row does not sum to one", dev});
        }
    }
    check_row_stochastic(model.beta(), "beta", out);
    for (Index s = 0; s < model.reward().rows(); ++s) {
        for (Index a = 0; a < model.reward().cols(); ++a) {
            if (!std::isfinite(model.reward()(s, a))) {
                out.push_back({"reward[" + std::to_string(s) + "][" + std::to_string(a) + "]",
                               "entry is not finite", std::numeric_limits<double>::infinity()});
            }
        }
    }
    const double gamma = model.gamma();
    if (!(gamma > 0.0 && gamma <= 1.0)) {
        const double mag = std::isfinite(gamma) ? (gamma <= 0.0 ? -gamma : gamma - 1.0)
                                                : std::numeric_limits<double>::infinity();
        out.push_back({"gamma", "discount must lie in (0, 1]", mag});
    }
    for (Index s = 0; s < model.mu().size(); ++s) {
        const double v = model.mu()(s);
        if (!std::isfinite(v)) {
            out.push_back({"mu[" + std::to_string(s) + "]", "entry is not finite",
                           std::numeric_limits<double>::infinity()});
        } else if (v < 0.0) {
            out.push_back({"mu[" + std::to_string(s) + "]", "negative probability", -v});
        }
    }
    const double mu_dev = std::abs(model.mu().sum() - 1.0);
    if (mu_dev > kStochasticTol) out.push_back({"mu", "distribution does not sum to one", mu_dev});
    report.ok = out.empty();
    return report;
}

ValidationReport validate_policy(const PomdpModel& model, const Policy& pi) {
    ValidationReport report;
    const std::size_t rows =
        pi.kind == PolicyKind::observation ? model.num_observations() : model.num_states();
    if (static_cast<std::size_t>(pi.matrix.rows()) != rows ||
        static_cast<std::size_t>(pi.matrix.cols()) != model.num_actions()) {
        report.violations.push_back({"policy", "policy has wrong shape", 0.0});
    } else {
        check_row_stochastic(pi.matrix, "policy", report.violations);
    }
    report.ok = report.violations.empty();
    return report;
}

Policy effective_policy(const Policy& pi, const MatrixXd& beta) {
    if (pi.kind != PolicyKind::observation) {
        throw PreconditionError("effective_policy expects an observation policy", "policy");
    }
    if (beta.cols() != pi.matrix.rows()) {
        throw DimensionError("policy rows do not match the number of observations", "policy");
    }
    return Policy::state_policy(beta * pi.matrix);
}

Policy effective_policy(const PomdpModel& model, const Policy& pi) {
    if (pi.kind == PolicyKind::state) {
        if (static_cast<std::size_t>(pi.matrix.rows()) != model.num_states() ||
            static_cast<std::size_t>(pi.matrix.cols()) != model.num_actions()) {
            throw DimensionError("state policy has wrong shape", "policy");
        }
        return pi;
    }
    if (static_cast<std::size_t>(pi.matrix.cols()) != model.num_actions()) {
        throw DimensionError("policy columns do not match the number of actions", "policy");
    }
    return effective_policy(pi, model.beta());
}

MatrixXd state_kernel(const PomdpModel& model, const MatrixXd& tau) {
    const std::size_t nS = model.num_states(), nA = model.num_actions();
    MatrixXd p = MatrixXd::Zero(idx(nS), idx(nS));
    for (std::size_t s = 0; s < nS; ++s) {
        for (std::size_t a = 0; a < nA; ++a) {
            p.row(idx(s)) += tau(idx(s), idx(a)) * model.alpha().row(idx(s * nA + a));
        }
    }
    return p;
}

MatrixXd pair_kernel(const PomdpModel& model, const MatrixXd& tau) {
    const std::size_t nS = model.num_states(), nA = model.num_actions();
    MatrixXd P(idx(nS * nA), idx(nS * nA));
    for (std::size_t row = 0; row < nS * nA; ++row) {
        for (std::size_t t = 0; t < nS; ++t) {
            for (std::size_t b = 0; b < nA; ++b) {
                P(idx(row), idx(t * nA + b)) = model.alpha()(idx(row), idx(t)) * tau(idx(t), idx(b));
            }
        }
    }
    return P;
}

VectorXd initial_pair_distribution(const PomdpModel& model, const MatrixXd& tau) {
    const std::size_t nS = model.num_states(), nA = model.num_actions();
    VectorXd out(idx(nS * nA));
    for (std::size_t s = 0; s < nS; ++s) {
        for (std::size_t a = 0; a < nA; ++a) out(idx(s * nA + a)) = model.mu()(idx(s)) * tau(idx(s), idx(a));
    }
    return out;
}

TransitionKernels transition_kernels(const PomdpModel& model, const Policy& pi) {
    const MatrixXd tau = effective_policy(model, pi).matrix;
    return {pair_kernel(model, tau), state_kernel(model, tau)};
}

bool is_fully_observable(const PomdpModel& model, double tol) {
    if (model.num_observations() != model.num_states()) return false;
    return (model.beta() - MatrixXd::Identity(model.beta().rows(), model.beta().cols()))
               .cwiseAbs()
               .maxCoeff() <= tol;
}

} // namespace pomdpgeo
