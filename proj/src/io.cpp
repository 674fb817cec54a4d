#include "cuspdet/io.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace cuspdet::io {

using nlohmann::json;

namespace {

void only_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw SchemaError(where + " must be an object");
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) throw SchemaError(where + ": unknown key '" + k + "'");
}

double number(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) throw SchemaError(where + ": missing '" + key + "'");
  const json& v = j.at(key);
  if (!v.is_number()) throw SchemaError(where + ": '" + key + "' must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw SchemaError(where + ": '" + key + "' must be finite");
  return d;
}

std::vector<double> numbers(const json& j, const std::string& where) {
  if (!j.is_array()) throw SchemaError(where + " must be an array of numbers");
  std::vector<double> out;
  for (const json& v : j) {
    if (!v.is_number()) throw SchemaError(where + " must be an array of numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

BoundaryCondition bc_from_json(const json& j) {
  only_keys(j, {"kind", "alpha", "theta"}, "bc");
  if (!j.contains("kind") || !j.at("kind").is_string()) throw SchemaError("bc: 'kind' must be a string");
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "dirichlet") {
    if (j.contains("alpha") || j.contains("theta")) throw SchemaError("bc: dirichlet takes no alpha/theta");
    return BoundaryCondition::dirichlet();
  }
  if (kind != "neumann") throw SchemaError("bc: 'kind' must be \"dirichlet\" or \"neumann\"");
  if (j.contains("alpha") && j.contains("theta")) throw SchemaError("bc: give alpha or theta, not both");
  if (j.contains("theta")) return BoundaryCondition::from_theta(number(j, "theta", "bc"));
  return BoundaryCondition::neumann(j.contains("alpha") ? number(j, "alpha", "bc") : 0.0);
}

Potential potential_from_json(const json& j, const std::filesystem::path& base) {
  if (!j.is_object() || !j.contains("form") || !j.at("form").is_string())
    throw SchemaError("potential: 'form' must be a string");
  const std::string form = j.at("form").get<std::string>();
  std::optional<double> gamma;
  if (j.contains("gamma")) gamma = number(j, "gamma", "potential");
  if (form == "zero") {
    only_keys(j, {"form"}, "potential");
    return Potential::zero();
  }
  if (form == "analytic") {
    only_keys(j, {"form", "preset", "params", "gamma"}, "potential");
    if (!j.contains("preset") || !j.at("preset").is_string())
      throw SchemaError("potential: analytic needs a string 'preset'");
    std::map<std::string, double> params;
    if (j.contains("params")) {
      if (!j.at("params").is_object()) throw SchemaError("potential: 'params' must be an object");
      for (const auto& [k, v] : j.at("params").items()) params[k] = number(j.at("params"), k, "potential.params");
    }
    return Potential::analytic(j.at("preset").get<std::string>(), params, gamma);
  }
  if (form == "tabulated") {
    only_keys(j, {"form", "grid", "csv", "order", "gamma"}, "potential");
    int order = 3;
    if (j.contains("order")) {
      if (!j.at("order").is_number_integer()) throw SchemaError("potential: 'order' must be an integer");
      order = j.at("order").get<int>();
    }
    std::vector<double> x, v;
    if (j.contains("grid") == j.contains("csv")) throw SchemaError("potential: tabulated needs exactly one of grid, csv");
    if (j.contains("grid")) {
      only_keys(j.at("grid"), {"x", "v"}, "potential.grid");
      if (!j.at("grid").contains("x") || !j.at("grid").contains("v"))
        throw SchemaError("potential.grid: needs 'x' and 'v'");
      x = numbers(j.at("grid").at("x"), "potential.grid.x");
      v = numbers(j.at("grid").at("v"), "potential.grid.v");
    } else {
      if (!j.at("csv").is_string()) throw SchemaError("potential: 'csv' must be a path");
      const auto path = base / j.at("csv").get<std::string>();
      std::ifstream in(path);
      if (!in) throw std::runtime_error("cannot read potential grid '" + path.string() + "'");
      read_xy_csv(in, x, v, path.string());
    }
    return Potential::tabulated(std::move(x), std::move(v), order, gamma);
  }
  throw SchemaError("potential: 'form' must be \"zero\", \"analytic\" or \"tabulated\"");
}

}  // namespace

void read_xy_csv(std::istream& in, std::vector<double>& x, std::vector<double>& y, const std::string& what) {
  std::string line;
  int row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line[0] == '#') continue;
    for (char& c : line)
      if (c == ',' || c == ';' || c == '\t') c = ' ';
    std::istringstream ls(line);
    double a, b;
    if (!(ls >> a >> b)) {
      if (x.empty() && row == 1) continue;  // header
      throw SchemaError(what + ": row " + std::to_string(row) + " is not two numbers");
    }
    x.push_back(a);
    y.push_back(b);
  }
  if (x.empty()) throw SchemaError(what + ": no data rows");
}

OperatorSpec spec_from_json(const json& j, const std::filesystem::path& base_dir) {
  only_keys(j, {"a", "mu", "nu", "bc", "potential"}, "spec");
  OperatorSpec s;
  s.a = number(j, "a", "spec");
  s.mu = number(j, "mu", "spec");
  s.nu = j.contains("nu") ? number(j, "nu", "spec") : 0.0;
  s.bc = j.contains("bc") ? bc_from_json(j.at("bc")) : BoundaryCondition::dirichlet();
  s.potential = j.contains("potential") ? potential_from_json(j.at("potential"), base_dir) : Potential::zero();
  return s;
}

json spec_to_json(const OperatorSpec& spec) {
  json j;
  j["a"] = spec.a;
  j["mu"] = spec.mu;
  j["nu"] = spec.nu;
  j["bc"] = spec.bc.is_dirichlet() ? json{{"kind", "dirichlet"}} : json{{"kind", "neumann"}, {"alpha", spec.bc.alpha}};
  const Potential& p = spec.potential;
  json pj;
  switch (p.form()) {
    case Potential::Form::zero:
      pj = {{"form", "zero"}};
      break;
    case Potential::Form::analytic:
      pj = {{"form", "analytic"}, {"preset", p.preset()}, {"params", p.params()}, {"gamma", p.gamma()}};
      break;
    case Potential::Form::tabulated:
      pj = {{"form", "tabulated"},
            {"grid", {{"x", p.grid_x()}, {"v", p.grid_v()}}},
            {"order", p.interpolation_order()},
            {"gamma", p.gamma()}};
      break;
    default:
      throw SpecError("spec_to_json: sum potentials have no serialized form");
  }
  j["potential"] = pj;
  return j;
}

OperatorSpec load_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read spec file '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaError("spec file '" + path.string() + "' is not valid JSON: " + e.what());
  }
  OperatorSpec s = spec_from_json(j, path.parent_path());
  s.validate();
  return s;
}

}  // namespace cuspdet::io
