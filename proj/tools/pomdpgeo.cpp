#include "pomdpgeo/pomdpgeo.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

using namespace pomdpgeo;
using nlohmann::json;

namespace {

struct Options {
    std::string model_path;
    std::optional<double> gamma;
    std::string mu;
    std::string policy = "uniform";
    bool csv = false;
    std::uint64_t seed = 0;
    int samples = 0;
    int grid = 0;
    double tol = 1e-12;
    bool unnormalized = false;
    std::string axes = "a1@o1";
    std::string eta_path;
    int max_dim = -1;
    std::string d, k;
    std::int64_t m = 0;
};

constexpr int kExitComputation = 1;
constexpr int kExitValidation = 2;

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

json read_json_file(const std::string& path, const std::string& what) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + what + " file '" + path + "'", what);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed ") + what + " file: " + e.what(), what);
    }
}

double parse_number(const std::string& s, const std::string& path) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParseError("expected a number, found '" + s + "'", path);
    }
}

VectorXd parse_mu(const PomdpModel& model, const std::string& spec) {
    const auto n = static_cast<Eigen::Index>(model.num_states());
    if (spec == "uniform") return VectorXd::Constant(n, 1.0 / static_cast<double>(n));
    if (spec.find_first_of(",[") == std::string::npos && !spec.empty() && !std::isdigit(static_cast<unsigned char>(spec[0]))) {
        return VectorXd::Unit(n, static_cast<Eigen::Index>(model.state_index(spec)));
    }
    std::string body = spec;
    if (!body.empty() && body.front() == '[') body = body.substr(1, body.size() - (body.back() == ']' ? 2 : 1));
    const auto parts = split(body, ',');
    if (static_cast<Eigen::Index>(parts.size()) != n) {
        throw DimensionError("--mu needs " + std::to_string(n) + " entries", "--mu");
    }
    VectorXd mu(n);
    for (Eigen::Index i = 0; i < n; ++i) mu(i) = parse_number(parts[static_cast<std::size_t>(i)], "--mu");
    return mu;
}

PomdpModel load(const Options& o) {
    PomdpModel model = load_model(o.model_path);
    if (o.gamma) model = model.with_gamma(*o.gamma);
    if (!o.mu.empty()) model = model.with_mu(parse_mu(model, o.mu));
    return model;
}

Policy policy_from(const PomdpModel& model, const std::string& spec) {
    if (spec == "uniform") return Policy::uniform(PolicyKind::observation, model.num_observations(), model.num_actions());
    if (spec.rfind("det:", 0) == 0) {
        const auto labels = split(spec.substr(4), ',');
        if (labels.size() != model.num_observations()) {
            throw DimensionError("det: needs one action per observation", "--policy");
        }
        std::vector<std::size_t> choice;
        for (const auto& l : labels) choice.push_back(model.action_index(l));
        return Policy::deterministic(PolicyKind::observation, choice, model.num_actions());
    }
    return parse_policy(read_json_file(spec, "--policy"));
}

void print(const json& j) { std::cout << dump_json(j); }

int report_invalid(const ValidationReport& r) {
    print(to_json(r));
    return kExitValidation;
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string frequency_csv(const PomdpModel& model, const Frequency& f) {
    std::string out = "state,action,eta\n";
    for (std::size_t s = 0; s < model.num_states(); ++s) {
        for (std::size_t a = 0; a < model.num_actions(); ++a) {
            out += model.states()[s] + "," + model.actions()[a] + "," +
                   fmt17(f.eta(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(a))) + "\n";
        }
    }
    return out;
}

std::vector<ScanAxis> parse_axes(const PomdpModel& model, const std::string& spec) {
    std::vector<ScanAxis> axes;
    for (const auto& item : split(spec, ',')) {
        const auto at = item.find('@');
        if (at == std::string::npos) throw ParseError("axis must look like action@observation", "--axes");
        axes.push_back({model.action_index(item.substr(0, at)), model.observation_index(item.substr(at + 1))});
    }
    if (axes.empty()) throw ParseError("no axes given", "--axes");
    return axes;
}

json scan_json(const PomdpModel& model, const ScanResult& scan) {
    json axes = json::array();
    for (const auto& a : scan.axes) axes.push_back(model.actions()[a.action] + "@" + model.observations()[a.observation]);
    json points = json::array();
    for (const auto& p : scan.points) points.push_back({{"coords", p.coords}, {"reward", p.reward}});
    return {{"axes", axes}, {"points", points}};
}

json projection_json(const Projection& p) {
    json points = json::array();
    for (const auto& q : p.points) {
        points.push_back({{"x", q.x}, {"y", q.y}, {"z", q.z}, {"tag", q.tag}, {"edge_id", q.edge_id}});
    }
    return {{"basis", matrix_json(p.basis)}, {"pomdp_edges", p.pomdp_edges}, {"mdp_edges", p.mdp_edges},
            {"points", points}};
}

std::vector<std::uint64_t> parse_uints(const std::string& s, const std::string& path) {
    std::vector<std::uint64_t> out;
    for (const auto& item : split(s, ',')) {
        const double v = parse_number(item, path);
        if (v < 0 || v != std::floor(v)) throw ParseError("expected a nonnegative integer, found '" + item + "'", path);
        out.push_back(static_cast<std::uint64_t>(v));
    }
    return out;
}

int run(const std::string& cmd, const Options& o) {
    if (cmd == "bounds") {
        BoundInput in{parse_uints(o.d, "--d"), parse_uints(o.k, "--k"), o.m};
        if (in.d.size() != in.k.size()) throw DimensionError("--d and --k must have the same length", "--k");
        print({{"bound", critical_point_bound(in)}, {"d", in.d}, {"k", in.k}, {"m", in.m}});
        return 0;
    }

    const PomdpModel model = load(o);
    const ValidationReport report = validate(model);
    if (cmd == "validate") {
        print(to_json(report));
        return report.ok ? 0 : kExitValidation;
    }
    if (!report.ok) return report_invalid(report);

    if (cmd == "freq" || cmd == "reward" || cmd == "oracle") {
        const Policy pi = policy_from(model, o.policy);
        const ValidationReport pr = validate_policy(model, pi);
        if (!pr.ok) return report_invalid(pr);
        if (cmd == "freq") {
            const Frequency f = state_action_frequency(model, pi);
            if (o.csv) {
                std::cout << frequency_csv(model, f);
            } else {
                json out = frequency_json(model, f);
                out["stationarity_residual"] = fixed_point_residual(model, pi, f);
                print(out);
            }
        } else if (cmd == "reward") {
            print(value_json(model, value_bundle(model, pi, o.unnormalized ? RewardConvention::unnormalized
                                                                           : RewardConvention::normalized)));
        } else {
            const SeriesResult s = truncated_series_oracle(model, pi, o.tol);
            json out = frequency_json(model, s.frequency);
            out["terms"] = s.terms;
            out["tail_bound"] = s.tail_bound;
            out["closed_form_gap"] = (s.frequency.eta - state_action_frequency(model, pi).eta).cwiseAbs().maxCoeff();
            print(out);
        }
        return 0;
    }
    if (cmd == "scan") {
        const ScanResult s = landscape_scan(model, parse_axes(model, o.axes), o.grid > 0 ? o.grid : 101,
                                            policy_from(model, o.policy));
        if (o.csv) {
            std::cout << scan_csv(model, s);
        } else {
            print(scan_json(model, s));
        }
        return 0;
    }
    if (cmd == "constraints") {
        if (!o.eta_path.empty()) {
            const Frequency f = parse_frequency(read_json_file(o.eta_path, "--eta"), model);
            print(feasibility_json(model, feasibility_report(model, f)));
        } else {
            print(constraints_json(model, constraint_polynomials(model.beta(), model.num_actions())));
        }
        return 0;
    }
    if (cmd == "faces") {
        print(face_lattice_json(model, face_lattice(model, o.max_dim, o.samples > 0 ? o.samples : 3, o.seed + 1)));
        return 0;
    }
    if (cmd == "critical") {
        print(critical_json(blind_critical_points(model, o.grid > 0 ? o.grid : 10000)));
        return 0;
    }
    if (cmd == "project") {
        const Projection p = export_projection(model, o.samples > 0 ? o.samples : 1000, o.seed);
        if (o.csv) {
            std::cout << projection_csv(p);
        } else {
            print(projection_json(p));
        }
        return 0;
    }
    throw std::logic_error("unhandled subcommand " + cmd);
}

int exit_code_for(const std::string& kind) {
    return kind == "parse" || kind == "dimension" || kind == "precondition" ? kExitValidation : kExitComputation;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exact frequencies, constraint polynomials and critical points of memoryless POMDP policies"};
    app.require_subcommand(1, 1);
    Options o;

    const auto add_model = [&](CLI::App* sub) {
        sub->add_option("model", o.model_path, "Model JSON file")->required();
        sub->add_option("--gamma", o.gamma, "Override the discount factor");
        sub->add_option("--mu", o.mu, "Initial distribution: state label, 'uniform' or a comma-separated vector");
    };
    const auto add_policy = [&](CLI::App* sub) {
        sub->add_option("--policy", o.policy, "Policy file, 'uniform' or det:a1,a2,... (one action per observation)");
    };

    add_model(app.add_subcommand("validate", "Check a model file"));

    auto* freq = app.add_subcommand("freq", "State-action frequencies of a policy");
    add_model(freq);
    add_policy(freq);
    freq->add_flag("--csv", o.csv, "Emit CSV");

    auto* reward = app.add_subcommand("reward", "Expected reward and value functions");
    add_model(reward);
    add_policy(reward);
    reward->add_flag("--unnormalized", o.unnormalized, "Drop the (1 - gamma) factor");

    auto* scan = app.add_subcommand("scan", "Reward over a grid of one or two policy coordinates");
    add_model(scan);
    add_policy(scan);
    scan->add_option("--axes", o.axes, "Coordinates as action@observation, comma separated");
    scan->add_option("--grid", o.grid, "Points per axis (default 101)");
    scan->add_flag("--csv", o.csv, "Emit CSV");

    auto* constraints = app.add_subcommand("constraints", "Polynomial constraints of the feasible set");
    add_model(constraints);
    constraints->add_option("--eta", o.eta_path, "Frequency file to check for feasibility");

    auto* faces = app.add_subcommand("faces", "Certified face lattice of the feasible set");
    add_model(faces);
    faces->add_option("--max-dim", o.max_dim, "Largest face dimension (default all)");
    faces->add_option("--samples", o.samples, "Random policies per face for certification (default 3)");
    faces->add_option("--seed", o.seed, "Random seed");

    auto* critical = app.add_subcommand("critical", "Critical points of a two-action blind controller");
    add_model(critical);
    critical->add_option("--grid", o.grid, "Grid size for the cross-check scan (default 10000)");

    auto* bounds = app.add_subcommand("bounds", "Critical point bound from inline parameters");
    bounds->add_option("--d", o.d, "Comma-separated d_o")->required();
    bounds->add_option("--k", o.k, "Comma-separated k_o")->required();
    bounds->add_option("--m", o.m, "Total degree m")->required();

    auto* project = app.add_subcommand("project", "Random 3-D projection of the feasible set");
    add_model(project);
    project->add_option("--samples", o.samples, "Number of random policies (default 1000)");
    project->add_option("--seed", o.seed, "Random seed");
    project->add_flag("--csv", o.csv, "Emit CSV");

    auto* oracle = app.add_subcommand("oracle", "Frequencies from the truncated series");
    add_model(oracle);
    add_policy(oracle);
    oracle->add_option("--tol", o.tol, "Truncation tolerance (default 1e-12)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        print(error_json("usage", e.what(), ""));
        return kExitValidation;
    }

    const std::string cmd = app.get_subcommands().front()->get_name();
    try {
        return run(cmd, o);
    } catch (const Error& e) {
        print(error_json(e.kind(), e.what(), e.path()));
        return exit_code_for(e.kind());
    } catch (const std::exception& e) {
        print(error_json("internal", e.what(), ""));
        return kExitComputation;
    }
}
