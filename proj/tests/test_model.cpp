#include "pomdpgeo/errors.hpp"
#include "pomdpgeo/model.hpp"
#include "support/random_models.hpp"

#include <doctest.h>
#include <json.hpp>

#include <string>

using namespace pomdpgeo;
using pomdpgeo::testing::fixture;

namespace {

const char* kTrivial = R"({
  "states": ["s"], "observations": ["o"], "actions": ["a"],
  "alpha": [[[1.0]]], "beta": [[1.0]], "reward": [[2.0]], "gamma": 0.5, "mu": [1.0]
})";

std::string fig1_alpha_entry(double v) {
    nlohmann::json doc = nlohmann::json::parse(serialize_model(load_model(fixture("fig1.json"))));
    doc["alpha"][0][0][0] = v;
    return doc.dump();
}

} // namespace

TEST_SUITE("model") {

TEST_CASE("figure-1 document parses to the stated entries") {
    const PomdpModel m = load_model(fixture("fig1.json"));
    CHECK(m.num_states() == 2);
    CHECK(m.num_observations() == 2);
    CHECK(m.num_actions() == 2);
    CHECK(m.beta()(1, 0) == 0.5);
    CHECK(m.beta()(1, 1) == 0.5);
    CHECK(m.beta()(0, 0) == 1.0);
    CHECK(m.gamma() == 0.5);
    // action a_k moves to s_k from everywhere
    CHECK(m.alpha(0, 1, 1) == 1.0);
    CHECK(m.alpha(1, 0, 0) == 1.0);
    CHECK(validate(m).ok);
}

TEST_CASE("trivial model is valid") {
    const PomdpModel m = parse_model(kTrivial);
    CHECK(validate(m).ok);
    CHECK(m.num_pairs() == 1);
}

TEST_CASE("serialization round-trips bit-exactly") {
    Rng rng(7);
    for (int i = 0; i < 20; ++i) {
        const PomdpModel m = pomdpgeo::testing::random_model(rng, {});
        const PomdpModel back = parse_model(serialize_model(m));
        CHECK(back.alpha() == m.alpha());
        CHECK(back.beta() == m.beta());
        CHECK(back.reward() == m.reward());
        CHECK(back.mu() == m.mu());
        CHECK(back.gamma() == m.gamma());
        CHECK(serialize_model(back) == serialize_model(m));
    }
}

TEST_CASE("alpha row summing to 0.9 parses but fails validation") {
    const PomdpModel m = parse_model(fig1_alpha_entry(0.9));
    const ValidationReport r = validate(m);
    REQUIRE_FALSE(r.ok);
    CHECK(r.violations.front().path == "alpha[0][0]");
    CHECK(r.violations.front().magnitude == doctest::Approx(0.1).epsilon(1e-9));
}

TEST_CASE("negative mu entry is reported with its magnitude") {
    const PomdpModel base = load_model(fixture("fig1.json"));
    VectorXd mu(2);
    mu << -0.1, 1.1;
    const ValidationReport r = validate(base.with_mu(mu));
    REQUIRE_FALSE(r.ok);
    bool found = false;
    for (const auto& v : r.violations) {
        if (v.path == "mu[0]") {
            found = true;
            CHECK(v.magnitude == doctest::Approx(0.1));
        }
    }
    CHECK(found);
}

TEST_CASE("beta row sum off by 1e-6 is reported") {
    const PomdpModel base = load_model(fixture("fig1.json"));
    MatrixXd beta = base.beta();
    beta(0, 0) += 1e-6;
    const ValidationReport r = validate(base.with_beta(beta, base.observations()));
    REQUIRE_FALSE(r.ok);
    CHECK(r.violations.front().path.rfind("beta[0]", 0) == 0);
    CHECK(r.violations.front().magnitude == doctest::Approx(1e-6).epsilon(1e-6));
}

TEST_CASE("parse errors name the offending path") {
    SUBCASE("wrong row length") {
        try {
            parse_model(R"({"states":["s"],"observations":["o"],"actions":["a"],"alpha":[[[1.0, 0.0]]],
                            "beta":[[1.0]],"reward":[[0.0]],"gamma":0.5,"mu":[1.0]})");
            FAIL("expected a parse error");
        } catch (const ParseError& e) {
            CHECK(e.path() == "alpha[0][0]");
        }
    }
    SUBCASE("missing field") {
        try {
            parse_model(R"({"states":["s"],"observations":["o"],"actions":["a"],"alpha":[[[1.0]]],
                            "beta":[[1.0]],"reward":[[0.0]],"mu":[1.0]})");
            FAIL("expected a parse error");
        } catch (const ParseError& e) {
            CHECK(e.path() == "gamma");
        }
    }
    SUBCASE("not json") { CHECK_THROWS_AS(parse_model("{"), ParseError); }
    SUBCASE("duplicate labels") {
        CHECK_THROWS_AS(parse_model(R"({"states":["s","s"],"observations":["o"],"actions":["a"],
                            "alpha":[[[1.0,0.0]],[[0.0,1.0]]],"beta":[[1.0],[1.0]],"reward":[[0.0],[0.0]],
                            "gamma":0.5,"mu":[0.5,0.5]})"),
                        ParseError);
    }
}

TEST_CASE("graph form compiles to the canonical form") {
    const PomdpModel m = load_model(fixture("appendixE.json"));
    CHECK(m.num_states() == 3);
    CHECK(m.num_observations() == 1);
    CHECK(m.alpha(0, 1, 2) == 1.0);
    CHECK(m.alpha(2, 1, 1) == 1.0);
    CHECK(m.reward()(1, 0) == -30.0);
    CHECK(m.reward()(1, 1) == 30.0);
    CHECK(m.mu()(0) == 1.0);
    CHECK(validate(m).ok);
    CHECK_THROWS_AS(parse_model(R"({"states":["s"],"actions":["a","b"],"beta":"blind","mu":"s","gamma":0.5,
                                   "edges":[{"from":"s","action":"a","to":"s"}]})"),
                    ParseError);
}

TEST_CASE("effective policy") {
    const PomdpModel fig = load_model(fixture("fig1.json"));
    SUBCASE("figure-1 hand product") {
        const Policy pi = Policy::deterministic(PolicyKind::observation, {0, 1}, 2);
        const Policy tau = effective_policy(fig, pi);
        CHECK(tau.kind == PolicyKind::state);
        CHECK(tau.matrix(0, 0) == doctest::Approx(1.0));
        CHECK(tau.matrix(1, 0) == doctest::Approx(0.5));
    }
    SUBCASE("identity beta returns pi") {
        Rng rng(3);
        const PomdpModel m = pomdpgeo::testing::random_model(rng, {.identity_beta = true});
        const Policy pi = pomdpgeo::testing::random_policy(rng, m);
        CHECK((effective_policy(m, pi).matrix - pi.matrix).norm() == doctest::Approx(0.0));
    }
    SUBCASE("blind controller has equal rows") {
        const PomdpModel m = load_model(fixture("appendixE.json"));
        MatrixXd p(1, 2);
        p << 0.3, 0.7;
        const MatrixXd tau = effective_policy(m, Policy::observation_policy(p)).matrix;
        for (Eigen::Index s = 0; s < 3; ++s) CHECK((tau.row(s) - p).norm() == doctest::Approx(0.0));
    }
    SUBCASE("dimension mismatch") {
        CHECK_THROWS_AS(effective_policy(fig, Policy::uniform(PolicyKind::observation, 3, 2)), DimensionError);
    }
}

TEST_CASE("transition kernels") {
    const PomdpModel fig = load_model(fixture("fig1.json"));
    SUBCASE("always a1 sends every state to s1") {
        const TransitionKernels k = transition_kernels(fig, Policy::deterministic(PolicyKind::observation, {0, 0}, 2));
        CHECK(k.p(0, 0) == 1.0);
        CHECK(k.p(1, 0) == 1.0);
    }
    SUBCASE("rows are stochastic on random models") {
        Rng rng(11);
        for (int i = 0; i < 10; ++i) {
            const PomdpModel m = pomdpgeo::testing::random_model(rng, {.states = 3, .actions = 2});
            const TransitionKernels k = transition_kernels(m, pomdpgeo::testing::random_policy(rng, m));
            CHECK((k.P.rowwise().sum().array() - 1.0).abs().maxCoeff() <= 1e-12);
            CHECK((k.p.rowwise().sum().array() - 1.0).abs().maxCoeff() <= 1e-12);
        }
    }
    SUBCASE("action-independent alpha gives its marginal") {
        Rng rng(5);
        const MatrixXd row = rng.stochastic(2, 2);
        MatrixXd alpha(4, 2);
        alpha << row.row(0), row.row(0), row.row(1), row.row(1);
        const PomdpModel m(pomdpgeo::testing::labels("s", 2), {"o1", "o2"}, {"a1", "a2"}, alpha,
                           MatrixXd::Identity(2, 2), MatrixXd::Zero(2, 2), 0.5, VectorXd::Constant(2, 0.5));
        const TransitionKernels k = transition_kernels(m, Policy::uniform(PolicyKind::observation, 2, 2));
        CHECK((k.p - row).norm() == doctest::Approx(0.0).epsilon(1e-14));
    }
}

} // TEST_SUITE
