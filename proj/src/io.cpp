#include "pomdpgeo/io.hpp"

#include "pomdpgeo/errors.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace pomdpgeo {

using json = nlohmann::json;
using Eigen::Index;

namespace {

void dump(const json& j, int indent, int depth, std::string& out) {
    const auto newline = [&](int d) {
        if (indent < 0) return;
        out += '\n';
        out.append(static_cast<std::size_t>(indent * d), ' ');
    };
    switch (j.type()) {
    case json::value_t::object: {
        if (j.empty()) {
            out += "{}";
            return;
        }
        out += '{';
        bool first = true;
        for (const auto& [k, v] : j.items()) {
            if (!first) out += ',';
            first = false;
            newline(depth + 1);
            out += json(k).dump();
            out += indent < 0 ? ":" : ": ";
            dump(v, indent, depth + 1, out);
        }
        newline(depth);
        out += '}';
        return;
    }
    case json::value_t::array: {
        if (j.empty()) {
            out += "[]";
            return;
        }
        // Arrays of scalars stay on one line.
        const bool flat = std::none_of(j.begin(), j.end(), [](const json& e) { return e.is_structured(); });
        out += '[';
        bool first = true;
        for (const auto& v : j) {
            if (!first) out += flat ? ", " : ",";
            first = false;
            if (!flat) newline(depth + 1);
            dump(v, indent, depth + 1, out);
        }
        if (!flat) newline(depth);
        out += ']';
        return;
    }
    case json::value_t::number_float: {
        const double v = j.get<double>();
        if (!std::isfinite(v)) {
            out += "null";
            return;
        }
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out += buf;
        return;
    }
    default:
        out += j.dump();
    }
}

std::string fmt17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

MatrixXd parse_matrix_doc(const json& m, const std::string& path) {
    if (!m.is_array() || m.empty() || !m[0].is_array()) throw ParseError("expected a matrix", path);
    const std::size_t rows = m.size();
    const std::size_t cols = m[0].size();
    MatrixXd out(static_cast<Index>(rows), static_cast<Index>(cols));
    for (std::size_t i = 0; i < rows; ++i) {
        const std::string rp = path + "[" + std::to_string(i) + "]";
        if (!m[i].is_array() || m[i].size() != cols) throw ParseError("ragged matrix row", rp);
        for (std::size_t j = 0; j < cols; ++j) {
            if (!m[i][j].is_number()) throw ParseError("expected a number", rp + "[" + std::to_string(j) + "]");
            out(static_cast<Index>(i), static_cast<Index>(j)) = m[i][j].get<double>();
        }
    }
    return out;
}

} // namespace

std::string dump_json(const json& j, int indent) {
    std::string out;
    dump(j, indent, 0, out);
    out += '\n';
    return out;
}

json matrix_json(const MatrixXd& m) {
    json out = json::array();
    for (Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        out.push_back(row);
    }
    return out;
}

json vector_json(const VectorXd& v) {
    json out = json::array();
    for (Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

json to_json(const ValidationReport& r) {
    json out;
    out["ok"] = r.ok;
    out["violations"] = json::array();
    for (const auto& v : r.violations) {
        out["violations"].push_back({{"path", v.path}, {"message", v.message}, {"magnitude", v.magnitude}});
    }
    return out;
}

json frequency_json(const PomdpModel& model, const Frequency& f) {
    json out;
    out["states"] = model.states();
    out["actions"] = model.actions();
    out["eta"] = matrix_json(f.eta);
    out["rho"] = vector_json(f.rho);
    out["total"] = f.eta.sum();
    return out;
}

json value_json(const PomdpModel& model, const ValueBundle& v) {
    json out;
    out["R"] = v.R;
    out["convention"] = v.convention == RewardConvention::normalized ? "normalized" : "unnormalized";
    out["values_available"] = v.values_available;
    if (v.values_available) {
        out["V"] = vector_json(v.V);
        out["Q"] = matrix_json(v.Q);
    }
    out["states"] = model.states();
    out["actions"] = model.actions();
    return out;
}

json constraints_json(const PomdpModel& model, const ConstraintSystem& sys) {
    json out;
    out["beta_plus"] = matrix_json(sys.beta_plus);
    out["warnings"] = sys.warnings;
    json list = json::array();
    for (const auto& p : sys.constraints) {
        json item;
        item["action"] = model.actions()[p.action];
        item["observation"] = model.observations()[p.observation];
        item["degree"] = p.degree();
        json support = json::array();
        for (std::size_t s : p.support_states) support.push_back(model.states()[s]);
        item["support_states"] = support;
        json monomials = json::array();
        for (const auto& [e, c] : p.terms) monomials.push_back({{"exponents", e}, {"coefficient", c}});
        item["monomials"] = monomials;
        item["polynomial"] = format_polynomial(p, model.states(), model.actions());
        list.push_back(item);
    }
    out["constraints"] = list;
    return out;
}

json feasibility_json(const PomdpModel& model, const FeasibilityReport& r) {
    json out;
    out["mdp_residuals"] = vector_json(r.mdp_residuals);
    out["min_eta"] = r.min_eta;
    out["verdict"] = r.feasible ? "feasible" : "infeasible";
    out["reasons"] = r.reasons;
    json values = json::array();
    for (const auto& v : r.poly_values) {
        values.push_back({{"action", model.actions()[v.action]},
                          {"observation", model.observations()[v.observation]},
                          {"value", v.value}});
    }
    out["poly_values"] = values;
    return out;
}

json face_lattice_json(const PomdpModel& model, const FaceLattice& lat) {
    json out;
    out["f_vector"] = lat.f_vector;
    out["certified"] = lat.certified;
    json faces = json::array();
    for (const auto& f : lat.faces) {
        json zeros = json::array();
        for (const auto& [a, o] : f.active_zeros) {
            zeros.push_back({model.actions()[a], model.observations()[o]});
        }
        faces.push_back({{"dimension", f.dimension}, {"active_zeros", zeros}, {"certified", f.certified}});
    }
    out["faces"] = faces;
    json covers = json::array();
    for (const auto& [lo, hi] : lat.covers) covers.push_back({lo, hi});
    out["covers"] = covers;
    return out;
}

json critical_json(const CriticalSet& c) {
    json out;
    json roots = json::array();
    for (const auto& r : c.interior_roots) roots.push_back({{"p", r.p}, {"class", to_string(r.classification)}});
    out["roots"] = roots;
    out["boundary"] = {{"p0", to_string(c.p0)}, {"p1", to_string(c.p1)}};
    out["degenerate"] = c.degenerate;
    out["merged_duplicates"] = c.merged_duplicates;
    out["fitted_degree"] = c.fitted_degree;
    out["fit_residual"] = c.fit_residual;
    out["grid_sign_changes"] = c.grid_sign_changes;
    out["grid_agrees"] = c.grid_agrees;
    return out;
}

json error_json(const std::string& kind, const std::string& message, const std::string& path) {
    return {{"error", {{"kind", kind}, {"message", message}, {"path", path}}}};
}

std::string scan_csv(const PomdpModel& model, const ScanResult& scan) {
    std::ostringstream os;
    for (std::size_t i = 0; i < scan.axes.size(); ++i) {
        os << "pi(" << model.actions()[scan.axes[i].action] << "|" << model.observations()[scan.axes[i].observation]
           << "),";
    }
    os << "reward\n";
    for (const auto& p : scan.points) {
        for (double x : p.coords) os << fmt17(x) << ',';
        os << fmt17(p.reward) << '\n';
    }
    return os.str();
}

Policy parse_policy(const json& doc) {
    if (doc.is_object()) {
        if (!doc.contains("matrix")) throw ParseError("policy document needs a 'matrix' field", "matrix");
        PolicyKind kind = PolicyKind::observation;
        if (doc.contains("kind")) {
            const std::string k = doc["kind"].is_string() ? doc["kind"].get<std::string>() : "";
            if (k == "state") kind = PolicyKind::state;
            else if (k != "observation") throw ParseError("kind must be 'observation' or 'state'", "kind");
        }
        return {kind, parse_matrix_doc(doc["matrix"], "matrix")};
    }
    return Policy::observation_policy(parse_matrix_doc(doc, "policy"));
}

Frequency parse_frequency(const json& doc, const PomdpModel& model) {
    const json& m = doc.is_object() ? (doc.contains("eta") ? doc["eta"] : throw ParseError("missing 'eta'", "eta")) : doc;
    MatrixXd eta = parse_matrix_doc(m, "eta");
    if (eta.rows() != static_cast<Index>(model.num_states()) || eta.cols() != static_cast<Index>(model.num_actions())) {
        throw DimensionError("frequency must be |S| x |A|", "eta");
    }
    return Frequency::from_eta(std::move(eta));
}

} // namespace pomdpgeo
