#include "pomdpgeo/pomdpgeo.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace pomdpgeo;

namespace {

PolicyKind kind_from(const std::string& s) {
    if (s == "observation") return PolicyKind::observation;
    if (s == "state") return PolicyKind::state;
    throw PreconditionError("policy kind must be 'observation' or 'state'", "kind");
}

Policy make_policy(const MatrixXd& m, const std::string& kind) { return {kind_from(kind), m}; }

py::dict critical_dict(const CriticalSet& c) {
    py::list roots;
    for (const auto& r : c.interior_roots) {
        py::dict d;
        d["p"] = r.p;
        d["class"] = to_string(r.classification);
        roots.append(d);
    }
    py::dict out;
    out["roots"] = roots;
    out["p0"] = to_string(c.p0);
    out["p1"] = to_string(c.p1);
    out["degenerate"] = c.degenerate;
    out["fitted_degree"] = c.fitted_degree;
    out["grid_agrees"] = c.grid_agrees;
    return out;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "State-action frequencies, constraint polynomials and critical points for memoryless POMDP policies";

    static py::exception<Error> base(m, "Error", PyExc_RuntimeError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::object err = py::reinterpret_borrow<py::object>(base.ptr())(e.what());
            err.attr("kind") = e.kind();
            err.attr("path") = e.path();
            PyErr_SetObject(base.ptr(), err.ptr());
        }
    });

    py::class_<PomdpModel>(m, "PomdpModel")
        .def(py::init<std::vector<std::string>, std::vector<std::string>, std::vector<std::string>, MatrixXd, MatrixXd,
                      MatrixXd, double, VectorXd>(),
             py::arg("states"), py::arg("observations"), py::arg("actions"), py::arg("alpha"), py::arg("beta"),
             py::arg("reward"), py::arg("gamma"), py::arg("mu"))
        .def_property_readonly("states", &PomdpModel::states)
        .def_property_readonly("observations", &PomdpModel::observations)
        .def_property_readonly("actions", &PomdpModel::actions)
        .def_property_readonly("alpha", py::overload_cast<>(&PomdpModel::alpha, py::const_))
        .def_property_readonly("beta", &PomdpModel::beta)
        .def_property_readonly("reward", &PomdpModel::reward)
        .def_property_readonly("gamma", &PomdpModel::gamma)
        .def_property_readonly("mu", &PomdpModel::mu)
        .def("with_gamma", &PomdpModel::with_gamma)
        .def("with_mu", &PomdpModel::with_mu)
        .def("to_json", &serialize_model);

    m.def("load_model", &load_model, py::arg("path"));
    m.def("parse_model", [](const std::string& text) { return parse_model(text); }, py::arg("text"));
    m.def("validate", [](const PomdpModel& model) {
        const ValidationReport r = validate(model);
        py::list v;
        for (const auto& x : r.violations) v.append(py::make_tuple(x.path, x.message, x.magnitude));
        return py::make_tuple(r.ok, v);
    });

    m.def("state_action_frequency",
          [](const PomdpModel& model, const MatrixXd& policy, const std::string& kind) {
              return state_action_frequency(model, make_policy(policy, kind)).eta;
          },
          py::arg("model"), py::arg("policy"), py::arg("kind") = "observation");
    m.def("series_frequency",
          [](const PomdpModel& model, const MatrixXd& policy, double tol, const std::string& kind) {
              return truncated_series_oracle(model, make_policy(policy, kind), tol).frequency.eta;
          },
          py::arg("model"), py::arg("policy"), py::arg("tol") = 1e-12, py::arg("kind") = "observation");
    m.def("expected_reward",
          [](const PomdpModel& model, const MatrixXd& policy, const std::string& kind) {
              return expected_reward(model, make_policy(policy, kind));
          },
          py::arg("model"), py::arg("policy"), py::arg("kind") = "observation");
    m.def("policy_gradient",
          [](const PomdpModel& model, const MatrixXd& policy, const std::string& kind) {
              return policy_gradient(model, make_policy(policy, kind)).grad;
          },
          py::arg("model"), py::arg("policy"), py::arg("kind") = "observation");
    m.def("conditioning_inverse",
          [](const PomdpModel& model, const MatrixXd& eta) {
              return conditioning_inverse(model, Frequency::from_eta(eta)).policy.matrix;
          },
          py::arg("model"), py::arg("eta"));

    m.def("degree_bound", &degree_bound, py::arg("model"), py::arg("varying_observations"));
    m.def("deterministic_optimum",
          [](const PomdpModel& model, const std::string& kind) {
              const DeterministicOptimum d = deterministic_optimum(model, kind_from(kind));
              return py::make_tuple(d.policy.matrix, d.reward);
          },
          py::arg("model"), py::arg("kind") = "observation");

    m.def("constraint_polynomials",
          [](const PomdpModel& model) {
              const ConstraintSystem sys = constraint_polynomials(model.beta(), model.num_actions());
              py::list out;
              for (const auto& p : sys.constraints) {
                  py::dict d;
                  d["action"] = model.actions()[p.action];
                  d["observation"] = model.observations()[p.observation];
                  d["degree"] = p.degree();
                  d["polynomial"] = format_polynomial(p, model.states(), model.actions());
                  d["terms"] = p.terms.size();
                  out.append(d);
              }
              return out;
          },
          py::arg("model"));
    m.def("constraint_values",
          [](const PomdpModel& model, const MatrixXd& eta) {
              std::vector<double> v;
              for (const auto& p : constraint_polynomials(model.beta(), model.num_actions()).constraints) {
                  v.push_back(p.evaluate(eta));
              }
              return v;
          },
          py::arg("model"), py::arg("eta"));
    m.def("is_feasible",
          [](const PomdpModel& model, const MatrixXd& eta) {
              return feasibility_report(model, Frequency::from_eta(eta)).feasible;
          },
          py::arg("model"), py::arg("eta"));
    m.def("face_f_vector", [](const PomdpModel& model) { return face_lattice(model).f_vector; }, py::arg("model"));

    m.def("blind_critical_points",
          [](const PomdpModel& model, int grid) { return critical_dict(blind_critical_points(model, grid)); },
          py::arg("model"), py::arg("grid") = 10000);
    m.def("critical_point_bound",
          [](std::vector<std::uint64_t> d, std::vector<std::uint64_t> k, std::int64_t mm) {
              return critical_point_bound({std::move(d), std::move(k), mm});
          },
          py::arg("d"), py::arg("k"), py::arg("m"));
    m.def("polar_degree_rank_one", &polar_degree_rank_one, py::arg("k"));

    m.def("projection_csv",
          [](const PomdpModel& model, int samples, std::uint64_t seed) {
              return projection_csv(export_projection(model, samples, seed));
          },
          py::arg("model"), py::arg("samples"), py::arg("seed") = 0);
}
