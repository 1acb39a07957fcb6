#pragma once

#include <json.hpp>
#include <ostream>
#include <string>
#include <vector>

#include "maslov/verifier.hpp"

namespace maslov {

inline constexpr const char* kSchemaVersion = "1.0";

/// Crossings table, one row per kernel direction:
/// t_star,dim_C,dim_R,signature,form_volume,form_boundary,slope
/// Floats carry 17 significant digits; form_boundary is empty when the cell
/// has no boundary expression.
void write_crossings_csv(std::ostream& os, const CrossingReport& r);

/// t,lambda for curve j of the flow.
void write_curve_csv(std::ostream& os, const EigenFlow& flow, Eigen::Index j);

/// Writes <dir>/<prefix>_curve_<j>.csv for every tracked curve; returns the paths.
std::vector<std::string> write_curves(const std::string& dir, const std::string& prefix, const EigenFlow& flow);

nlohmann::ordered_json to_json(const CrossingReport& r);
nlohmann::ordered_json to_json(const VerificationReport& r);

/// Decimal with 17 significant digits.
std::string format_double(double x);

}  // namespace maslov
