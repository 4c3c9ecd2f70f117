#include <CLI11.hpp>
#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>

#include "monokit/errors.hpp"
#include "monokit/json_io.hpp"
#include "monokit/optim.hpp"

// Command-line front end.  Every command assembles its full RunReport before
// printing anything, so a failure never leaves partial output behind.
// Exit codes: 0 success, 2 contract or input violation, 3 solver failure.

namespace {

using monokit::ContractError;
using monokit::SolverError;
using monokit::io::json;

json load_json_arg(const std::string& arg, const std::string& what) {
  std::string text;
  size_t first = arg.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && (arg[first] == '{' || arg[first] == '[')) {
    text = arg;
  } else {
    std::ifstream in(arg);
    if (!in) throw ContractError(what + ": cannot open file '" + arg + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ContractError(what + ": malformed JSON (" + e.what() + ")");
  }
}

struct Args {
  std::string op, point, dual_point, subspace, out, which, f_form, g_form, method, oracle;
  std::string x, xstar;
  int samples = 100;
  uint64_t seed = 1;
  int grid = 9;
  double eta = 0.25;
  double tol = -1.0;  // per-command default when negative
  int n = 3;
};

monokit::FormName form_of(const std::string& name) {
  if (name == "P") return monokit::FormName::P;
  if (name == "F") return monokit::FormName::F;
  if (name == "G") return monokit::FormName::G;
  if (name == "q") return monokit::FormName::q;
  if (name == "qt") return monokit::FormName::qt;
  if (name == "r") return monokit::FormName::r;
  if (name == "rt") return monokit::FormName::rt;
  throw ContractError("unknown form name '" + name + "'");
}

void push_warning(std::vector<std::string>& warnings, const std::optional<std::string>& w) {
  if (w && std::find(warnings.begin(), warnings.end(), *w) == warnings.end())
    warnings.push_back(*w);
}

json run_command(const std::string& name, const Args& a) {
  namespace io = monokit::io;
  using namespace monokit;

  std::vector<std::string> warnings;

  if (name == "check-monotone") {
    auto loaded = io::operator_from_json(load_json_arg(a.op, "--op"));
    auto rep = is_monotone(loaded.space, loaded.op);
    return io::run_report(name, json{{"op", io::operator_to_json(loaded.space, loaded.op)}},
                          io::monotonicity_to_json(rep), {});
  }

  if (name == "maximal") {
    auto loaded = io::operator_from_json(load_json_arg(a.op, "--op"));
    bool mx = is_maximal_minty(loaded.space, loaded.op);
    return io::run_report(name, json{{"op", io::operator_to_json(loaded.space, loaded.op)}},
                          json{{"maximal", mx}}, {});
  }

  if (name == "transform") {
    auto loaded = io::operator_from_json(load_json_arg(a.op, "--op"));
    const Space& s = loaded.space;
    json inputs{{"op", io::operator_to_json(s, loaded.op)}, {"which", a.which}};
    TransformValue tv;
    json point_echo;
    if (a.which == "P" || a.which == "Phi") {
      if (a.point.empty()) throw ContractError("transform: " + a.which + " needs --point");
      PdPoint b = io::point_from_json(load_json_arg(a.point, "--point"), "point");
      tv = (a.which == "P") ? p_transform(s, loaded.op, b) : fitzpatrick(s, loaded.op, b);
      point_echo = io::point_to_json(b);
    } else if (a.which == "F" || a.which == "G" || a.which == "PhiStar") {
      if (a.dual_point.empty())
        throw ContractError("transform: " + a.which + " needs --dual-point");
      DualPoint d = io::dual_point_from_json(load_json_arg(a.dual_point, "--dual-point"), "dual_point");
      tv = (a.which == "F")   ? f_transform(s, loaded.op, d)
           : (a.which == "G") ? g_transform(s, loaded.op, d)
                              : phi_star(s, loaded.op, d);
      point_echo = io::dual_point_to_json(d);
    } else {
      throw ContractError("transform: --which must be one of P, F, G, Phi, PhiStar");
    }
    inputs["point"] = point_echo;
    push_warning(warnings, tv.warning);
    json results = io::transform_value_to_json(tv);
    results["transform"] = a.which;
    results["point"] = point_echo;
    return io::run_report(name, inputs, results, warnings);
  }

  if (name == "gap") {
    auto loaded = io::operator_from_json(load_json_arg(a.op, "--op"));
    PdPoint b = io::point_from_json(load_json_arg(a.point, "--point"), "point");
    double g = quasidensity_gap(loaded.space, loaded.op, b);
    return io::run_report(name,
                          json{{"op", io::operator_to_json(loaded.space, loaded.op)},
                               {"point", io::point_to_json(b)}},
                          json{{"value", g}}, {});
  }

  if (name == "gossez") {
    auto loaded = io::operator_from_json(load_json_arg(a.op, "--op"));
    DualPoint d = io::dual_point_from_json(load_json_arg(a.dual_point, "--dual-point"), "dual_point");
    double tol = a.tol > 0 ? a.tol : 1e-9;
    auto g = gossez_membership(loaded.space, loaded.op, d, tol);
    return io::run_report(name,
                          json{{"op", io::operator_to_json(loaded.space, loaded.op)},
                               {"dual_point", io::dual_point_to_json(d)}},
                          io::gossez_to_json(g), {});
  }

  if (name == "infconv") {
    auto loaded = io::operator_from_json(load_json_arg(a.op, "--op"));
    const Space& s = loaded.space;
    InfConvSpec spec;
    spec.f = form_of(a.f_form);
    spec.g = form_of(a.g_form);
    if (a.method == "exact_finite")
      spec.method = InfConvMethod::exact_finite;
    else if (a.method == "convex_qp")
      spec.method = InfConvMethod::convex_qp;
    else if (a.method == "grid_refine")
      spec.method = InfConvMethod::grid_refine;
    else
      throw ContractError("infconv: --method must be exact_finite, convex_qp or grid_refine");

    GridOpts opts;
    opts.pts = a.grid;
    json inputs{{"op", io::operator_to_json(s, loaded.op)},
                {"f", a.f_form},
                {"g", a.g_form},
                {"method", a.method}};
    BPoint at;
    if (spec.f == FormName::P) {
      if (a.point.empty()) throw ContractError("infconv: the P pair needs --point");
      PdPoint b = io::point_from_json(load_json_arg(a.point, "--point"), "point");
      inputs["point"] = io::point_to_json(b);
      at = b;
    } else {
      if (a.dual_point.empty()) throw ContractError("infconv: this pair needs --dual-point");
      DualPoint d = io::dual_point_from_json(load_json_arg(a.dual_point, "--dual-point"), "dual_point");
      inputs["point"] = io::dual_point_to_json(d);
      at = d;
    }
    TransformValue tv = inf_convolution(s, loaded.op, spec, at, opts);
    push_warning(warnings, tv.warning);
    json results = io::transform_value_to_json(tv);
    results["f"] = a.f_form;
    results["g"] = a.g_form;
    results["method"] = a.method;
    return io::run_report(name, inputs, results, warnings);
  }

  if (name == "equiv-report") {
    auto loaded = io::operator_from_json(load_json_arg(a.op, "--op"));
    double tol = a.tol > 0 ? a.tol : 1e-5;
    auto cert = equivalence_certificate(loaded.space, loaded.op, a.samples, a.seed, 2.0, tol);
    push_warning(warnings, cert.warning);
    return io::run_report(name,
                          json{{"op", io::operator_to_json(loaded.space, loaded.op)},
                               {"samples", a.samples},
                               {"seed", a.seed}},
                          io::certificate_to_json(cert), warnings);
  }

  if (name == "eqthm") {
    auto loaded = io::operator_from_json(load_json_arg(a.op, "--op"));
    std::string src = !a.dual_point.empty() ? a.dual_point : a.point;
    if (src.empty()) throw ContractError("eqthm: needs --dual-point (or --point) with a dual point");
    DualPoint d = io::dual_point_from_json(load_json_arg(src, "--dual-point"), "dual_point");
    GridOpts opts;
    opts.pts = a.grid;
    auto rep = eqthm_report(loaded.space, loaded.op, d, opts);
    push_warning(warnings, rep.warning);
    return io::run_report(name,
                          json{{"op", io::operator_to_json(loaded.space, loaded.op)},
                               {"dual_point", io::dual_point_to_json(d)},
                               {"grid", a.grid}},
                          io::eqthm_to_json(rep), warnings);
  }

  if (name == "solve") {
    auto loaded = io::operator_from_json(load_json_arg(a.op, "--op"));
    Vec x = io::vec_from_json(load_json_arg(a.x, "--x"), "x");
    Vec xstar = io::vec_from_json(load_json_arg(a.xstar, "--xstar"), "xstar");
    auto res = solve_surjectivity(loaded.space, loaded.op, x, xstar);
    return io::run_report(name,
                          json{{"op", io::operator_to_json(loaded.space, loaded.op)},
                               {"x", io::vec_to_json(x)},
                               {"xstar", io::vec_to_json(xstar)}},
                          io::surjectivity_to_json(res), {});
  }

  if (name == "iterate-suffthm") {
    auto loaded = io::operator_from_json(load_json_arg(a.op, "--op"));
    PdPoint c1 = io::point_from_json(load_json_arg(a.point, "--point"), "point");
    IterOracle oracle = IterOracle::candidate_set;
    if (a.oracle == "exact_convex")
      oracle = IterOracle::exact_convex;
    else if (!a.oracle.empty() && a.oracle != "candidate_set")
      throw ContractError("iterate-suffthm: --oracle must be candidate_set or exact_convex");
    auto tr = suffthm_iterate(loaded.space, loaded.op, c1, a.eta, oracle);
    push_warning(warnings, tr.warning);
    return io::run_report(name,
                          json{{"op", io::operator_to_json(loaded.space, loaded.op)},
                               {"point", io::point_to_json(c1)},
                               {"eta", a.eta}},
                          io::iteration_to_json(tr), warnings);
  }

  if (name == "adjoint") {
    auto loaded = io::subspace_from_json(load_json_arg(a.subspace, "--subspace"));
    auto rep = brezis_browder_check(loaded.space, loaded.v);
    json basis = json::array();
    for (const auto& b : loaded.v.basis) basis.push_back(io::point_to_json(b));
    return io::run_report(name,
                          json{{"subspace", json{{"space", io::space_to_json(loaded.space)},
                                                 {"basis", basis}}}},
                          io::adjoint_report_to_json(rep), {});
  }

  throw ContractError("unknown command '" + name + "'");
}

json run_gallery_tail(const Args& a) {
  namespace io = monokit::io;
  using namespace monokit;
  if (a.n < 1) throw ContractError("gallery tail: --n must be >= 1");

  std::vector<std::string> warnings;
  warnings.push_back(
      "finite truncation: these are the algebraic inequalities of the construction; the "
      "non-reflexive behavior itself has no finite-dimensional counterpart");

  Rng rng(a.seed);
  int checks = a.samples > 0 ? a.samples : 10;
  bool all_equal = true, all_bound = true;
  double max_residual = 0.0, min_value = std::numeric_limits<double>::infinity();
  for (int i = 0; i < checks; ++i) {
    Vec x = rng.uniform_vec(a.n, -3.0, 3.0);
    auto id = tail_identity_check(x);
    all_equal = all_equal && id.equal;
    max_residual = std::max(max_residual, std::abs(id.lhs - id.rhs));
    auto wt = tail_ni_witness_check(x);
    all_bound = all_bound && wt.bound_ok;
    min_value = std::min(min_value, wt.value);
  }

  json results{{"n", a.n},
               {"identity", json{{"all_equal", all_equal}, {"max_residual", max_residual}}},
               {"ni_witness", json{{"all_bound_ok", all_bound}, {"min_value", min_value}}}};

  if (a.n <= 12) {
    auto st = tailgex_structure_check(a.n);
    results["structure"] = io::tail_structure_to_json(st);
    TailInstance inst = make_tail(a.n);
    FiniteGraph m;
    Rng grng(a.seed + 1);
    for (int i = 0; i < 40; ++i) {
      Vec x = grng.uniform_vec(a.n, -1.0, 1.0);
      m.points.push_back(PdPoint{inst.U_matrix * x, x});
    }
    Space s{a.n, 2.0};
    results["m_monotone"] = is_monotone(s, OperatorRep{m}).monotone;
  }

  return io::run_report("gallery tail",
                        json{{"n", a.n}, {"samples", checks}, {"seed", a.seed}}, results,
                        warnings);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"transform calculus for monotone operators on finite-dimensional spaces"};
  app.require_subcommand(1);
  Args a;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--out", a.out, "write the report to this file instead of stdout");
  };

  auto* c_mono = app.add_subcommand("check-monotone", "monotonicity of an operator");
  c_mono->add_option("--op", a.op, "operator JSON (inline or file)")->required();
  add_common(c_mono);

  auto* c_max = app.add_subcommand("maximal", "Minty maximality check at p = 2");
  c_max->add_option("--op", a.op)->required();
  add_common(c_max);

  auto* c_tr = app.add_subcommand("transform", "evaluate P, F, G, Phi or PhiStar");
  c_tr->add_option("--op", a.op)->required();
  c_tr->add_option("--which", a.which, "P | F | G | Phi | PhiStar")->required();
  c_tr->add_option("--point", a.point, "primal point (for P, Phi)");
  c_tr->add_option("--dual-point", a.dual_point, "dual point (for F, G, PhiStar)");
  add_common(c_tr);

  auto* c_gap = app.add_subcommand("gap", "quasidensity gap at a point");
  c_gap->add_option("--op", a.op)->required();
  c_gap->add_option("--point", a.point)->required();
  add_common(c_gap);

  auto* c_gz = app.add_subcommand("gossez", "membership of a dual point in the G <= 0 set");
  c_gz->add_option("--op", a.op)->required();
  c_gz->add_option("--dual-point", a.dual_point)->required();
  c_gz->add_option("--tol", a.tol);
  add_common(c_gz);

  auto* c_ic = app.add_subcommand("infconv", "inf-convolution of a transform with q, r, qt or rt");
  c_ic->add_option("--op", a.op)->required();
  c_ic->add_option("--f", a.f_form, "P | F | G")->required();
  c_ic->add_option("--g", a.g_form, "q | r | qt | rt")->required();
  c_ic->add_option("--method", a.method, "exact_finite | convex_qp | grid_refine")->required();
  c_ic->add_option("--point", a.point);
  c_ic->add_option("--dual-point", a.dual_point);
  c_ic->add_option("--grid", a.grid, "grid points per axis");
  add_common(c_ic);

  auto* c_eq = app.add_subcommand("equiv-report", "sampled five-way quasidensity certificate");
  c_eq->add_option("--op", a.op)->required();
  c_eq->add_option("--samples", a.samples);
  c_eq->add_option("--seed", a.seed);
  c_eq->add_option("--tol", a.tol);
  add_common(c_eq);

  auto* c_et = app.add_subcommand("eqthm", "eight-way membership report at a dual point");
  c_et->add_option("--op", a.op)->required();
  c_et->add_option("--point,--dual-point", a.dual_point, "dual point JSON");
  c_et->add_option("--grid", a.grid);
  add_common(c_et);

  auto* c_sv = app.add_subcommand("solve", "solve x* in S y + J y through the resolvent");
  c_sv->add_option("--op", a.op)->required();
  c_sv->add_option("--x", a.x)->required();
  c_sv->add_option("--xstar", a.xstar)->required();
  add_common(c_sv);

  auto* c_it = app.add_subcommand("iterate-suffthm", "budgeted descent toward the graph");
  c_it->add_option("--op", a.op)->required();
  c_it->add_option("--point", a.point)->required();
  c_it->add_option("--eta", a.eta, "budget base in (0,1)");
  c_it->add_option("--oracle", a.oracle, "candidate_set | exact_convex");
  add_common(c_it);

  auto* c_adj = app.add_subcommand("adjoint", "adjoint subspace and the two-way maximality check");
  c_adj->add_option("--subspace", a.subspace)->required();
  add_common(c_adj);

  auto* c_gal = app.add_subcommand("gallery", "operator gallery");
  auto* c_tail = c_gal->add_subcommand("tail", "truncated tail operator checks");
  c_tail->add_option("--n", a.n, "truncation level")->required();
  c_tail->add_option("--samples", a.samples);
  c_tail->add_option("--seed", a.seed);
  add_common(c_tail);
  c_gal->require_subcommand(1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << "error: " << e.what() << std::endl;
    return 2;
  }

  try {
    json report;
    if (app.got_subcommand(c_gal)) {
      a.samples = c_tail->count("--samples") ? a.samples : 10;
      report = run_gallery_tail(a);
    } else {
      for (auto* cmd : {c_mono, c_max, c_tr, c_gap, c_gz, c_ic, c_eq, c_et, c_sv, c_it, c_adj}) {
        if (app.got_subcommand(cmd)) {
          report = run_command(cmd->get_name(), a);
          break;
        }
      }
    }
    std::string text = report.dump(2);
    text.push_back('\n');
    if (!a.out.empty()) {
      std::ofstream f(a.out);
      if (!f) throw ContractError("--out: cannot open '" + a.out + "' for writing");
      f << text;
    } else {
      std::cout << text;
    }
    return 0;
  } catch (const ContractError& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 2;
  } catch (const SolverError& e) {
    std::cerr << "solver error: " << e.what() << std::endl;
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 2;
  }
}
