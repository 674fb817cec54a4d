#include "cuspdet/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>

#include <spdlog/spdlog.h>

#include "cuspdet/bessel.hpp"
#include "cuspdet/detz.hpp"
#include "cuspdet/errors.hpp"
#include "cuspdet/io.hpp"
#include "cuspdet/log.hpp"
#include "cuspdet/regfit.hpp"
#include "cuspdet/settings.hpp"
#include "cuspdet/spectral.hpp"
#include "cuspdet/trace.hpp"

namespace cuspdet::cli {

using nlohmann::json;

namespace {

struct Args {
  std::vector<std::string> tol;
  std::uint64_t seed = 0;
  std::string log_level;
  std::string out;
  std::string format;  // empty: per-command default
  std::string spec;

  // bessel
  double order = 0.0, x = 1.0;
  std::string kind = "k", regime = "auto";
  bool scaled = false;
  // fit
  std::string input = "-";
  std::vector<std::string> terms;
  std::optional<double> x_star;
  // trace
  std::string z_grid;
  bool fit = false;
  std::string fit_out;
  // detz
  std::string method = "wronskian";
  std::optional<double> nu;
  // eigs / weyl
  int count = 10;
  std::optional<double> R;
  std::optional<int> n;
  double lambda_max = 1e4;
  int points = 60;
  // compare
  std::string matrix = "full";
};

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

json scaled_json(const Scaled& s) { return {{"mantissa", s.mantissa}, {"exponent", s.exponent}}; }

std::vector<double> parse_grid(const std::string& g) {
  std::vector<double> p;
  std::stringstream ss(g);
  std::string tok;
  while (std::getline(ss, tok, ':')) {
    try {
      std::size_t used = 0;
      p.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw DomainError("--z-grid: expected lo:hi:n, got '" + g + "'");
    }
  }
  if (p.size() != 3 || p[2] != std::floor(p[2])) throw DomainError("--z-grid: expected lo:hi:n, got '" + g + "'");
  return regfit::geometric_grid(p[0], p[1], static_cast<int>(p[2]));
}

regfit::Term parse_term(const std::string& t) {
  const auto colon = t.find(':');
  if (colon == std::string::npos) throw DomainError("--term: expected alpha:k, got '" + t + "'");
  try {
    return {std::stod(t.substr(0, colon)), std::stoi(t.substr(colon + 1))};
  } catch (const std::exception&) {
    throw DomainError("--term: expected alpha:k, got '" + t + "'");
  }
}

json model_json(const regfit::ExpansionModel& m) {
  json terms = json::array();
  for (std::size_t i = 0; i < m.coeffs.size(); ++i)
    terms.push_back({{"alpha", m.basis.terms()[i].alpha},
                     {"k", m.basis.terms()[i].k},
                     {"coeff", m.coeffs[i]},
                     {"std_error", m.std_errors[i]}});
  return {{"terms", terms},
          {"condition_number", m.condition_number},
          {"relative_residual", m.relative_residual},
          {"residual_rms", m.residual_rms},
          {"fit_window", {m.fit_window.first, m.fit_window.second}}};
}

json det_json(const detz::DetResult& r) {
  const auto& d = r.diagnostics;
  json diag = {{"zero", d.zero}};
  if (r.method == detz::Method::wronskian) {
    diag["relative_wronskian"] = d.relative_wronskian;
  } else {
    diag["lim_constant"] = d.lim_constant;
    diag["fit_condition"] = d.fit_condition;
    diag["fit_residual"] = d.fit_residual;
    diag["tail_bounds"] = d.tail_bound;
    diag["quad_part"] = d.quad_part;
    diag["tail_part"] = d.tail_part;
    diag["split"] = d.split;
  }
  json j = {{"method", detz::to_string(r.method)},
            {"value", r.value},
            {"log_value", r.log_value},
            {"diagnostics", diag}};
  if (r.method == detz::Method::wronskian) j["wronskian_at_a"] = scaled_json(r.wronskian_at_a);
  return j;
}

std::string bc_name(const BoundaryCondition& bc) {
  return bc.is_dirichlet() ? "dirichlet" : "neumann(" + fmt(bc.alpha) + ")";
}

// ---------------------------------------------------------------------------- commands

void cmd_bessel(const Args& a, std::ostream& out) {
  bessel::Options opt;
  if (a.regime != "auto") {
    opt.regime = bessel::regime_from_string(a.regime);
    if (!opt.regime) throw DomainError("--regime: unknown regime '" + a.regime + "'");
  }
  const double nu = a.order, x = a.x;
  Scaled v;
  std::string regime;
  double err = 0.0;
  // I' = I_{nu+1} + (nu/x) I_nu and K' = -K_{nu+1} + (nu/x) K_nu, combined at the exponent of the order-nu value.
  auto combine = [&](const bessel::Value& lo, const bessel::Value& hi, double sign_hi) {
    return Scaled{sign_hi * hi.value.mantissa * std::exp(hi.value.exponent - lo.value.exponent) +
                      nu / x * lo.value.mantissa,
                  lo.value.exponent};
  };
  if (a.kind == "i" || a.kind == "iprime") {
    const auto lo = bessel::modified_i(nu, x, opt);
    v = lo.value;
    regime = std::string(bessel::to_string(lo.regime));
    err = lo.est_rel_err;
    if (a.kind == "iprime") {
      const auto hi = bessel::modified_i(nu + 1.0, x, opt);
      v = combine(lo, hi, 1.0);
      err = std::max(err, hi.est_rel_err);
    }
    if (a.scaled) v.exponent -= x;
  } else if (a.kind == "k" || a.kind == "kprime") {
    const auto lo = bessel::modified_k(nu, x, opt);
    v = lo.value;
    regime = std::string(bessel::to_string(lo.regime));
    err = lo.est_rel_err;
    if (a.kind == "kprime") {
      const auto hi = bessel::modified_k(nu + 1.0, x, opt);
      v = combine(lo, hi, -1.0);
      err = std::max(err, hi.est_rel_err);
    }
    if (a.scaled) v.exponent += x;
  } else if (a.kind == "product") {
    const auto e = bessel::evaluate(nu, x, opt);
    v = e.value_i * e.value_k;
    regime = std::string(bessel::to_string(e.regime_i)) + "/" + std::string(bessel::to_string(e.regime_k));
    err = e.est_rel_err;
  } else {
    throw DomainError("--kind: expected i, k, iprime, kprime or product");
  }
  const json j = {{"kind", a.kind},       {"order", nu},
                  {"x", x},               {"scaled", a.scaled},
                  {"value", v.value()},   {"mantissa", v.mantissa},
                  {"exponent", v.exponent}, {"log_abs", v.log_abs()},
                  {"regime", regime},     {"est_rel_err", err}};
  out << j.dump(2) << "\n";
}

void cmd_fit(const Args& a, std::istream& in, std::ostream& out) {
  if (a.terms.empty()) throw DomainError("fit: at least one --term alpha:k is required");
  std::vector<regfit::Term> terms;
  for (const auto& t : a.terms) terms.push_back(parse_term(t));
  std::vector<double> x, f;
  if (a.input == "-") {
    io::read_xy_csv(in, x, f, "stdin");
  } else {
    std::ifstream file(a.input);
    if (!file) throw std::runtime_error("cannot read '" + a.input + "'");
    io::read_xy_csv(file, x, f, a.input);
  }
  std::vector<regfit::Sample> samples;
  for (std::size_t i = 0; i < x.size(); ++i) samples.push_back({x[i], f[i]});
  const regfit::ExpansionBasis basis(terms);
  const auto m = regfit::fit_expansion(samples, basis);
  json j = model_json(m);
  j["reg_lim"] = regfit::reg_lim(m);
  if (a.x_star) j["regularized_tail"] = regfit::regularized_tail(m, *a.x_star);
  out << j.dump(2) << "\n";
}

void cmd_trace(const Args& a, const Settings& s, const OperatorSpec& spec, std::ostream& out) {
  const std::vector<double> zs =
      a.z_grid.empty() ? regfit::geometric_grid(20.0 * std::max(1.0, spec.mu * spec.a),
                                                400.0 * std::max(1.0, spec.mu * spec.a), s.z_grid_points)
                       : parse_grid(a.z_grid);
  const bool want_json = a.format == "json" || (a.format.empty() && a.fit);
  if (a.fit && !want_json && a.fit_out.empty())
    throw DomainError("trace: --fit with --format csv needs --fit-out for the coefficients");
  std::vector<trace::TraceValue> vals;
  for (double z : zs) vals.push_back(trace::resolvent_trace_detail(spec, z, s.det.trace));
  json fit;
  if (a.fit) {
    std::vector<regfit::Sample> samples;
    for (std::size_t i = 0; i < zs.size(); ++i) samples.push_back({zs[i], vals[i].value});
    const auto m = regfit::fit_expansion(samples, trace::default_trace_basis());
    fit = model_json(m);
    fit["b0"] = m.coeff(-1, 1);
    fit["a0"] = m.coeff(-1, 0);
    fit["a1"] = m.coeff(-2, 0);
    if (*std::min_element(zs.begin(), zs.end()) < 10.0 * std::max(spec.mu, 1.0))
      logger()->warn("trace --fit: grid starts below 10 max(mu, 1); coefficients are unreliable");
  }
  if (want_json) {
    json samples = json::array();
    for (std::size_t i = 0; i < zs.size(); ++i)
      samples.push_back({{"z", zs[i]}, {"trace", vals[i].value}, {"tail_bound", vals[i].tail_bound}});
    json j = {{"spec", io::spec_to_json(spec)}, {"samples", samples}};
    if (a.fit) j["fit"] = fit;
    out << j.dump(2) << "\n";
    return;
  }
  out << "z,trace,quad_part,tail_part,tail_bound\n";
  for (std::size_t i = 0; i < zs.size(); ++i)
    out << fmt(zs[i]) << "," << fmt(vals[i].value) << "," << fmt(vals[i].quad_part) << ","
        << fmt(vals[i].tail_part) << "," << fmt(vals[i].tail_bound) << "\n";
  if (a.fit) {
    std::ofstream f(a.fit_out);
    if (!f) throw std::runtime_error("cannot write '" + a.fit_out + "'");
    f << fit.dump(2) << "\n";
  }
}

void cmd_detz(const Args& a, const Settings& s, OperatorSpec spec, std::ostream& out) {
  if (a.nu) spec.nu = *a.nu;
  spec.validate();
  json j = {{"spec", io::spec_to_json(spec)}};
  if (a.method == "wronskian") {
    j.update(det_json(detz::detz_wronskian(spec, s.det)));
  } else if (a.method == "trace") {
    j.update(det_json(detz::detz_trace_integral(spec, s.det)));
  } else if (a.method == "both") {
    const auto w = detz::detz_wronskian(spec, s.det), t = detz::detz_trace_integral(spec, s.det);
    const double rel = std::abs(std::expm1(t.log_value - w.log_value));
    j["results"] = {det_json(w), det_json(t)};
    j["relative_difference"] = rel;
    j["tolerance"] = s.compare_tol;
    j["agree"] = rel <= s.compare_tol;
  } else {
    throw DomainError("--method: expected wronskian, trace or both");
  }
  out << j.dump(2) << "\n";
}

void cmd_eigs(const Args& a, const Settings& s, const OperatorSpec& spec, std::ostream& out) {
  const double R = a.R.value_or(s.fd_r_mu / spec.mu);
  const auto d = spectral::fd_eigenvalues(spec, R, a.n.value_or(s.fd_n), a.count, s.fd);
  out << "index,lambda,tolerance\n";
  for (std::size_t k = 0; k < d.eigs.size(); ++k)
    out << k + 1 << "," << fmt(d.eigs[k]) << "," << fmt(d.tolerance[k]) << "\n";
}

void cmd_weyl(const Args& a, const OperatorSpec& spec, std::ostream& out) {
  const auto w = spectral::weyl_check(spec, a.lambda_max, a.points);
  out << "lambda,count,model,refined\n";
  for (const auto& p : w.samples)
    out << fmt(p.lambda) << "," << p.count << "," << fmt(p.model) << "," << fmt(p.refined) << "\n";
}

struct Row {
  std::string check, bc, potential;
  double mu, a, nu, value, reference, tol;
  bool pass;
};

bool cmd_compare(const Args& args, const Settings& s, std::ostream& out, std::ostream& err) {
  std::vector<double> mus = {0.5, 1.0, 2.0}, as = {0.5, 1.0}, nus = {1.0, 2.0};
  std::vector<int> pots = {0, 1};
  if (args.matrix == "model") {
    pots = {0};
  } else if (args.matrix == "small") {
    mus = {1.0};
    as = {1.0};
    nus = {1.0};
    pots = {0};
  } else if (args.matrix != "full") {
    throw DomainError("--matrix: expected full, model or small");
  }
  const std::vector<BoundaryCondition> bcs = {BoundaryCondition::dirichlet(), BoundaryCondition::neumann(0.0),
                                              BoundaryCondition::neumann(1.0)};
  const double lim_target = 0.5 * std::log(std::numbers::pi / 2.0), c_target = std::sqrt(2.0 / std::numbers::pi);
  std::mt19937_64 rng(args.seed);
  std::vector<Row> rows;
  for (double mu : mus)
    for (double a : as)
      for (int pv : pots) {
        const std::string pname = pv ? "sqrt_exp(0.3)" : "zero";
        for (double nu : nus) {
          double log_dir_w = 0.0, log_dir_t = 0.0;
          for (const auto& bc : bcs) {
            OperatorSpec spec;
            spec.a = a;
            spec.mu = mu;
            spec.nu = nu;
            spec.bc = bc;
            spec.potential = pv ? Potential::sqrt_exp(0.3) : Potential::zero();
            const auto w = detz::detz_wronskian(spec, s.det);
            const auto t = detz::detz_trace_integral(spec, s.det);
            auto push = [&](const std::string& check, double v, double ref, double tol, bool relative) {
              const double d = relative ? std::abs(v / ref - 1.0) : std::abs(v - ref);
              rows.push_back({check, bc_name(bc), pname, mu, a, nu, v, ref, tol, d <= tol});
            };
            push("cross_method", t.value, w.value, s.compare_tol, true);
            push("constant", std::exp(t.log_value - w.wronskian_at_a.log_abs()) * w.wronskian_at_a.sign(), c_target,
                 s.compare_tol, true);
            if (bc.is_dirichlet()) {
              log_dir_w = w.log_value;
              log_dir_t = t.log_value;
            } else {
              const double lam = detz::dirichlet_neumann_ratio(spec, bc.alpha, nu, s.det);
              push("dn_ratio_wronskian", std::exp(w.log_value - log_dir_w), lam, 1e-8, true);
              push("dn_ratio_trace", std::exp(t.log_value - log_dir_t), lam, s.compare_tol, true);
            }
            if (nu == nus.front()) {
              push("lim_constant", detz::lim_log_wronskian(spec, {}, s.det).value, lim_target, s.compare_tol, false);
              // x^2 W at random points against its value at a
              const Solution psi = solve_psi(spec, nu, s.det.trace.solver), phi = solve_phi(spec, nu, s.det.trace.solver);
              const double hi = std::min({phi.valid_interval().second, psi.valid_interval().second, 10.0 * a});
              std::uniform_real_distribution<double> u(a, hi);
              const Scaled w0 = wronskian_scaled(psi, phi, a);
              double worst = 0.0;
              for (int k = 0; k < 10; ++k) {
                const Scaled wk = wronskian_scaled(psi, phi, u(rng));
                worst = std::max(worst, std::abs(wk.mantissa / w0.mantissa * std::exp(wk.exponent - w0.exponent) - 1.0));
              }
              rows.push_back({"wronskian_constancy", bc_name(bc), pname, mu, a, nu, worst, 0.0, 1e-8, worst <= 1e-8});
            }
          }
        }
      }
  out << "check,mu,a,bc,potential,nu,value,reference,tol,pass\n";
  int failed = 0;
  for (const Row& r : rows) {
    out << r.check << "," << fmt(r.mu) << "," << fmt(r.a) << "," << r.bc << "," << r.potential << "," << fmt(r.nu)
        << "," << fmt(r.value) << "," << fmt(r.reference) << "," << fmt(r.tol) << "," << (r.pass ? "PASS" : "FAIL")
        << "\n";
    failed += !r.pass;
  }
  err << "compare: " << rows.size() - failed << "/" << rows.size() << " checks passed\n";
  return failed == 0;
}

json defaults_json(const Settings& s) {
  json rows = json::array();
  for (const auto& e : settings_table(s))
    rows.push_back({{"name", e.name}, {"value", e.value}, {"description", e.description}});
  return {{"version", Settings::version}, {"settings", rows}};
}

}  // namespace

int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  Args a;
  bool show_defaults = false;
  CLI::App app{"Zeta-regularized determinants of -(x^2 f')' + x^2 mu^2 - 1/4 + V on [a, inf)", "cuspdet"};
  app.set_help_all_flag("--help-all");
  app.add_flag("--show-defaults", show_defaults, "print the defaults table (JSON) and exit");
  app.add_option("--tol", a.tol, "override a default: name=value (repeatable; see --show-defaults)");
  app.add_option("--seed", a.seed, "seed for randomized checks");
  app.add_option("--log-level", a.log_level, "trace, debug, info, warn, error, off (overrides CUSPDET_LOG)");
  app.add_option("--out", a.out, "write results to this file instead of stdout");
  app.add_option("--format", a.format, "json or csv, where a command offers both")->check(CLI::IsMember({"json", "csv"}));

  auto* bes = app.add_subcommand("bessel", "modified Bessel functions I, K and derivatives");
  bes->add_option("--order", a.order, "order nu >= 0")->required();
  bes->add_option("--x", a.x, "argument x > 0")->required();
  bes->add_option("--kind", a.kind, "i, k, iprime, kprime, product");
  bes->add_option("--regime", a.regime, "auto, series, large-arg, uniform, continued-fraction");
  bes->add_flag("--scaled", a.scaled, "e^{-x} I, e^{x} K");

  auto* fit = app.add_subcommand("fit", "least-squares fit of sampled (x, f) to x^alpha log^k x terms");
  fit->add_option("--input", a.input, "CSV file of x,f rows, or - for stdin");
  fit->add_option("--term", a.terms, "basis term alpha:k (repeatable)")->required();
  fit->add_option("--x-star", a.x_star, "also report the partie-finie tail from x_star");

  auto* tr = app.add_subcommand("trace", "resolvent trace Tr(H + z^2)^{-1} on a z grid");
  tr->add_option("--spec", a.spec, "operator spec (JSON)")->required();
  tr->add_option("--z-grid", a.z_grid, "lo:hi:n geometric grid (default 20:400:25 times max(1, mu a))");
  tr->add_flag("--fit", a.fit, "fit b0 z^-1 log z + a0 z^-1 + a1 z^-2 + ...");
  tr->add_option("--fit-out", a.fit_out, "coefficients file when the table is CSV");

  auto* dz = app.add_subcommand("detz", "zeta-regularized determinant det(H + nu^2)");
  dz->add_option("--spec", a.spec, "operator spec (JSON)")->required();
  dz->add_option("--method", a.method, "wronskian, trace or both");
  dz->add_option("--nu", a.nu, "shift nu (overrides the spec)");

  auto* eg = app.add_subcommand("eigs", "finite-difference eigenvalues (Richardson over n, 2n)");
  eg->add_option("--spec", a.spec, "operator spec (JSON)")->required();
  eg->add_option("--count", a.count, "number of eigenvalues");
  eg->add_option("--R", a.R, "truncation radius (default fd_r_mu / mu)");
  eg->add_option("--n", a.n, "coarse grid intervals (default fd_n)");

  auto* wy = app.add_subcommand("weyl", "counting function against the Weyl curve");
  wy->add_option("--spec", a.spec, "operator spec (JSON)")->required();
  wy->add_option("--lambda-max", a.lambda_max, "largest lambda");
  wy->add_option("--points", a.points, "samples");

  auto* cmp = app.add_subcommand("compare", "consistency matrix; nonzero exit if any row fails");
  cmp->add_option("--matrix", a.matrix, "full (72 cells), model (V = 0) or small (mu = a = nu = 1)");

  app.require_subcommand(0, 1);
  for (auto* sc : app.get_subcommands({})) sc->fallthrough();

  try {
    std::vector<std::string> rev(argv.rbegin(), argv.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return ok;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return ok;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return usage;
  }

  try {
    if (!a.log_level.empty()) set_log_level(a.log_level);
    Settings s;
    for (const auto& t : a.tol) {
      const auto eq = t.find('=');
      if (eq == std::string::npos) throw DomainError("--tol: expected name=value, got '" + t + "'");
      double v;
      try {
        v = std::stod(t.substr(eq + 1));
      } catch (const std::exception&) {
        throw DomainError("--tol: '" + t.substr(eq + 1) + "' is not a number");
      }
      apply_setting(s, t.substr(0, eq), v);
    }
    if (show_defaults) {
      out << defaults_json(s).dump(2) << "\n";
      return ok;
    }
    if (app.get_subcommands().empty()) {
      err << app.help();
      return usage;
    }

    std::ofstream file;
    if (!a.out.empty()) {
      file.open(a.out);
      if (!file) throw std::runtime_error("cannot write '" + a.out + "'");
    }
    std::ostream& o = a.out.empty() ? out : file;
    const std::string cmd = app.get_subcommands().front()->get_name();
    if (cmd == "bessel") {
      cmd_bessel(a, o);
    } else if (cmd == "fit") {
      cmd_fit(a, std::cin, o);
    } else if (cmd == "compare") {
      return cmd_compare(a, s, o, err) ? ok : checks_failed;
    } else {
      const OperatorSpec spec = io::load_spec(a.spec);
      if (cmd == "trace") cmd_trace(a, s, spec, o);
      if (cmd == "detz") cmd_detz(a, s, spec, o);
      if (cmd == "eigs") cmd_eigs(a, s, spec, o);
      if (cmd == "weyl") cmd_weyl(a, spec, o);
    }
    return ok;
  } catch (const SpecError& e) {
    err << "schema error: " << e.what() << "\n";
    return schema;
  } catch (const DomainError& e) {
    err << "usage error: " << e.what() << "\n";
    return usage;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << "\n";
    return numerical;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return numerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return usage;
  }
}

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace cuspdet::cli
