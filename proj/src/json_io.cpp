#include "monokit/json_io.hpp"

#include <cmath>

#include "monokit/errors.hpp"

namespace monokit::io {

namespace {

const json& need(const json& j, const char* key, const std::string& where) {
  if (!j.is_object()) throw ContractError(where + ": expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw ContractError(where + "." + key + ": missing field");
  return *it;
}

double need_number(const json& j, const std::string& where) {
  if (!j.is_number()) throw ContractError(where + ": expected a number");
  return j.get<double>();
}

json finite_or_string(double v, bool finite) {
  if (!finite) return "infinity";
  return v;
}

}  // namespace

json vec_to_json(const Vec& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Vec vec_from_json(const json& j, const std::string& where) {
  if (!j.is_array()) throw ContractError(where + ": expected an array of numbers");
  Vec v(static_cast<int>(j.size()));
  for (size_t i = 0; i < j.size(); ++i)
    v[static_cast<int>(i)] = need_number(j[i], where + "[" + std::to_string(i) + "]");
  return v;
}

json space_to_json(const Space& s) { return json{{"dim", s.dim}, {"p", s.p}}; }

Space space_from_json(const json& j, const std::string& where) {
  const json& d = need(j, "dim", where);
  if (!d.is_number_integer()) throw ContractError(where + ".dim: expected an integer");
  double p = need_number(need(j, "p", where), where + ".p");
  return Space{d.get<int>(), p};
}

json point_to_json(const PdPoint& b) {
  return json{{"x", vec_to_json(b.x)}, {"xstar", vec_to_json(b.xstar)}};
}

PdPoint point_from_json(const json& j, const std::string& where) {
  return PdPoint{vec_from_json(need(j, "x", where), where + ".x"),
                 vec_from_json(need(j, "xstar", where), where + ".xstar")};
}

json dual_point_to_json(const DualPoint& d) {
  return json{{"ystar", vec_to_json(d.ystar)}, {"ystarstar", vec_to_json(d.ystarstar)}};
}

DualPoint dual_point_from_json(const json& j, const std::string& where) {
  return DualPoint{vec_from_json(need(j, "ystar", where), where + ".ystar"),
                   vec_from_json(need(j, "ystarstar", where), where + ".ystarstar")};
}

json operator_to_json(const Space& s, const OperatorRep& op) {
  json j{{"space", space_to_json(s)}};
  if (const auto* g = std::get_if<FiniteGraph>(&op)) {
    j["kind"] = "finite_graph";
    json pts = json::array();
    for (const auto& m : g->points) pts.push_back(point_to_json(m));
    j["points"] = pts;
  } else if (const auto* l = std::get_if<LinearOp>(&op)) {
    j["kind"] = "linear";
    json rows = json::array();
    for (int i = 0; i < l->matrix.rows(); ++i) rows.push_back(vec_to_json(l->matrix.row(i)));
    j["matrix"] = rows;
  } else {
    const auto& f = std::get<PwaSubdiff>(op);
    j["kind"] = "pwa_subdiff";
    json pieces = json::array();
    for (const auto& p : f.pieces)
      pieces.push_back(json{{"a", vec_to_json(p.a)}, {"beta", p.beta}});
    j["pieces"] = pieces;
  }
  return j;
}

LoadedOperator operator_from_json(const json& j) {
  const std::string where = "operator";
  const json& kind = need(j, "kind", where);
  if (!kind.is_string()) throw ContractError("operator.kind: expected a string");
  std::string k = kind.get<std::string>();

  OperatorRep op;
  int inferred = 0;
  if (k == "finite_graph") {
    const json& pts = need(j, "points", where);
    if (!pts.is_array() || pts.empty())
      throw ContractError("operator.points: expected a nonempty array");
    FiniteGraph g;
    for (size_t i = 0; i < pts.size(); ++i)
      g.points.push_back(point_from_json(pts[i], "operator.points[" + std::to_string(i) + "]"));
    inferred = static_cast<int>(g.points.front().x.size());
    op = std::move(g);
  } else if (k == "linear") {
    const json& rows = need(j, "matrix", where);
    if (!rows.is_array() || rows.empty())
      throw ContractError("operator.matrix: expected a nonempty array of rows");
    int n = static_cast<int>(rows.size());
    Mat a(n, n);
    for (int i = 0; i < n; ++i) {
      Vec row = vec_from_json(rows[i], "operator.matrix[" + std::to_string(i) + "]");
      if (row.size() != n) throw ContractError("operator.matrix: must be square");
      a.row(i) = row;
    }
    inferred = n;
    op = LinearOp{a};
  } else if (k == "pwa_subdiff") {
    const json& pieces = need(j, "pieces", where);
    if (!pieces.is_array() || pieces.empty())
      throw ContractError("operator.pieces: expected a nonempty array");
    PwaSubdiff f;
    for (size_t i = 0; i < pieces.size(); ++i) {
      std::string pw = "operator.pieces[" + std::to_string(i) + "]";
      const json& pj = pieces[i];
      f.pieces.push_back(PwaPiece{vec_from_json(need(pj, "a", pw), pw + ".a"),
                                  need_number(need(pj, "beta", pw), pw + ".beta")});
    }
    inferred = static_cast<int>(f.pieces.front().a.size());
    op = std::move(f);
  } else {
    throw ContractError("operator.kind: unknown kind '" + k + "'");
  }

  LoadedOperator out;
  out.op = std::move(op);
  if (j.contains("space")) {
    out.space = space_from_json(j["space"], "operator.space");
  } else {
    out.space = Space{inferred, 2.0};
  }
  check_operator(out.space, out.op);
  return out;
}

LoadedSubspace subspace_from_json(const json& j) {
  const json& basis = need(j, "basis", "subspace");
  if (!basis.is_array()) throw ContractError("subspace.basis: expected an array");
  std::vector<PdPoint> pts;
  for (size_t i = 0; i < basis.size(); ++i)
    pts.push_back(point_from_json(basis[i], "subspace.basis[" + std::to_string(i) + "]"));

  LoadedSubspace out;
  if (j.contains("space")) {
    out.space = space_from_json(j["space"], "subspace.space");
  } else {
    if (pts.empty())
      throw ContractError("subspace: an empty basis needs an explicit space object");
    out.space = Space{static_cast<int>(pts.front().x.size()), 2.0};
  }
  out.v = make_subspace(out.space, std::move(pts));
  return out;
}

json transform_value_to_json(const TransformValue& tv) {
  json j{{"value", finite_or_string(tv.value, tv.finite)},
         {"finite", tv.finite},
         {"exact", tv.exact}};
  if (tv.witness_b) j["witness"] = point_to_json(*tv.witness_b);
  if (tv.witness_bstar) j["witness"] = dual_point_to_json(*tv.witness_bstar);
  if (tv.witness_weights) j["witness_weights"] = vec_to_json(*tv.witness_weights);
  if (tv.warning) j["warning"] = *tv.warning;
  return j;
}

json monotonicity_to_json(const MonotonicityReport& r) {
  json j{{"monotone", r.monotone}, {"method", r.method}};
  if (r.violating_pair) {
    j["violating_pair"] = json::array(
        {point_to_json(r.violating_pair->first), point_to_json(r.violating_pair->second)});
  }
  if (r.maximal.has_value()) j["maximal"] = *r.maximal;
  return j;
}

json gossez_to_json(const GossezMembership& g) {
  return json{{"member", g.member}, {"g_value", transform_value_to_json(g.g_value)}, {"tol", g.tol}};
}

json certificate_to_json(const EquivCertificate& c) {
  const char* names[5] = {"a_quasidense_gap", "b_min_g", "c_min_f", "d_max_p_box_r",
                          "e_min_f_box_rt"};
  double vals[5] = {c.cond_a_gap_max, c.cond_b_min_g, c.cond_c_min_f, c.cond_d_max_pboxr,
                    c.cond_e_min_fboxrt};
  json conds = json::object();
  for (int i = 0; i < 5; ++i) {
    conds[names[i]] = json{{"value", std::isfinite(vals[i]) ? json(vals[i]) : json("infinity")},
                           {"holds", c.holds[static_cast<size_t>(i)]},
                           {"method", c.methods[static_cast<size_t>(i)]}};
  }
  json j{{"conditions", conds},
         {"consistent", c.consistent},
         {"tol", c.tol},
         {"n_samples", c.samples_primal.size()}};
  if (c.warning) j["warning"] = *c.warning;
  return j;
}

json iteration_to_json(const IterationTrace& t) {
  json seq = json::array();
  for (const auto& c : t.c_sequence) seq.push_back(point_to_json(c));
  json j{{"c_sequence", seq},
         {"eta", t.eta},
         {"p_values", t.p_values},
         {"step_norms", t.step_norms},
         {"budgets", t.budgets},
         {"bound_ok", t.bound_ok},
         {"limit", point_to_json(t.limit_m)},
         {"limit_bound_ok", t.limit_bound_ok},
         {"limit_residual", t.limit_residual},
         {"converged", t.converged}};
  if (t.warning) j["warning"] = *t.warning;
  return j;
}

json eqthm_to_json(const EqthmReport& r) {
  json conds = json::array();
  for (const auto& c : r.conditions) {
    conds.push_back(json{{"name", c.name},
                         {"statement", c.statement},
                         {"evaluated", c.evaluated},
                         {"exact", c.exact},
                         {"holds", c.holds},
                         {"value", finite_or_string(c.value, c.finite)},
                         {"method", c.method}});
  }
  json j{{"conditions", conds}, {"member", r.member}, {"hard_failure", r.hard_failure}};
  if (r.warning) j["warning"] = *r.warning;
  return j;
}

json surjectivity_to_json(const SurjectivityResult& r) {
  return json{{"m", point_to_json(r.m)},
              {"bstar", dual_point_to_json(r.bstar)},
              {"rt_residual", r.rt_residual},
              {"incl_primal_residual", r.incl_primal_residual},
              {"incl_dual_residual", r.incl_dual_residual}};
}

json adjoint_report_to_json(const AdjointReport& r) {
  json basis = json::array();
  for (const auto& d : r.vA_basis) basis.push_back(dual_point_to_json(d));
  return json{{"vA_basis", basis},
              {"v_monotone", r.v_monotone},
              {"vA_monotone", r.vA_monotone},
              {"v_maximal", r.v_maximal},
              {"vA_maximal", r.vA_maximal},
              {"consistent_qqthm", r.consistent_qqthm}};
}

json tail_identity_to_json(const TailIdentity& t) {
  return json{{"lhs", t.lhs}, {"rhs", t.rhs}, {"equal", t.equal}};
}

json tail_witness_to_json(const TailNiWitness& w) {
  return json{{"value", w.value}, {"bound_ok", w.bound_ok}};
}

json tail_structure_to_json(const TailStructure& t) {
  return json{{"lm_equals_gt", t.lm_equals_gt}, {"points_checked", t.points_checked}};
}

json run_report(const std::string& command, json inputs, json results,
                std::vector<std::string> warnings) {
  return json{{"format_version", 1},
              {"tool", "monokit"},
              {"tool_version", "0.1.0"},
              {"command", command},
              {"inputs", std::move(inputs)},
              {"results", std::move(results)},
              {"warnings", std::move(warnings)}};
}

}  // namespace monokit::io
