#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "cuspdet/errors.hpp"
#include "cuspdet/operator.hpp"

/// JSON serialization of operator specs.
///
///   {"a": 1, "mu": 1, "nu": 1,
///    "bc": {"kind": "dirichlet"} | {"kind": "neumann", "alpha": 0.5} | {"kind": "neumann", "theta": 1.1},
///    "potential": {"form": "zero"}
///               | {"form": "analytic", "preset": "sqrt_exp", "params": {"c": 0.3, "rate": 1}, "gamma": 0.5}
///               | {"form": "tabulated", "grid": {"x": [...], "v": [...]}, "order": 3, "gamma": 1}
///               | {"form": "tabulated", "csv": "v.csv", ...}}
///
/// "gamma" is optional; "csv" paths are relative to the spec file. Unknown keys are rejected.
namespace cuspdet::io {

/// A document does not follow the spec schema.
class SchemaError : public SpecError {
 public:
  using SpecError::SpecError;
};

OperatorSpec spec_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
/// Tabulated potentials are written inline; sum potentials are not serializable.
nlohmann::json spec_to_json(const OperatorSpec& spec);

/// Reads, parses, schema-checks and validates. File errors throw std::runtime_error.
OperatorSpec load_spec(const std::filesystem::path& path);

/// Two-column CSV (x, V); an optional header line is skipped.
void read_xy_csv(std::istream& in, std::vector<double>& x, std::vector<double>& y, const std::string& what);

}  // namespace cuspdet::io
