#pragma once

#include "pomdpgeo/critical.hpp"
#include "pomdpgeo/freq.hpp"
#include "pomdpgeo/geometry.hpp"
#include "pomdpgeo/model.hpp"

#include <json.hpp>

#include <string>

namespace pomdpgeo {

/// Serializes with sorted keys and every floating-point value printed with
/// 17 significant digits. Non-finite numbers become null.
std::string dump_json(const nlohmann::json& j, int indent = 2);

nlohmann::json matrix_json(const MatrixXd& m);
nlohmann::json vector_json(const VectorXd& v);

nlohmann::json to_json(const ValidationReport& r);
nlohmann::json frequency_json(const PomdpModel& model, const Frequency& f);
nlohmann::json value_json(const PomdpModel& model, const ValueBundle& v);
nlohmann::json constraints_json(const PomdpModel& model, const ConstraintSystem& sys);
nlohmann::json feasibility_json(const PomdpModel& model, const FeasibilityReport& r);
nlohmann::json face_lattice_json(const PomdpModel& model, const FaceLattice& lat);
nlohmann::json critical_json(const CriticalSet& c);
nlohmann::json error_json(const std::string& kind, const std::string& message, const std::string& path);

std::string scan_csv(const PomdpModel& model, const ScanResult& scan);

/// Policy document: {"kind": "observation"|"state", "matrix": [[...]]} or a
/// bare matrix (observation policy).
Policy parse_policy(const nlohmann::json& doc);
/// Frequency document: {"eta": [[...]]} or a bare |S|x|A| matrix.
Frequency parse_frequency(const nlohmann::json& doc, const PomdpModel& model);

} // namespace pomdpgeo
