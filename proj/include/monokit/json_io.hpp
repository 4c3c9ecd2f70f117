#pragma once

#include <json.hpp>

#include "monokit/adjoint.hpp"
#include "monokit/gallery.hpp"
#include "monokit/quasidense.hpp"

// JSON schema (format_version 1).  Parsers throw ContractError naming the
// offending field; serializers emit plain objects with sorted keys so golden
// files are byte-stable.

namespace monokit::io {

using json = nlohmann::json;

json vec_to_json(const Vec& v);
Vec vec_from_json(const json& j, const std::string& where);

json space_to_json(const Space& s);
Space space_from_json(const json& j, const std::string& where);

json point_to_json(const PdPoint& b);
PdPoint point_from_json(const json& j, const std::string& where);
json dual_point_to_json(const DualPoint& d);
DualPoint dual_point_from_json(const json& j, const std::string& where);

// operator files: {"kind":"finite_graph"|"linear"|"pwa_subdiff", ...} with an
// optional "space" object; dim is inferred from the data when absent and p
// defaults to 2
struct LoadedOperator {
  Space space{1, 2.0};
  OperatorRep op;
};
json operator_to_json(const Space& s, const OperatorRep& op);
LoadedOperator operator_from_json(const json& j);

// subspace files: {"basis":[{"x":...,"xstar":...},...]}, optional "space"
struct LoadedSubspace {
  Space space{1, 2.0};
  LinSubspace v;
};
LoadedSubspace subspace_from_json(const json& j);

json transform_value_to_json(const TransformValue& tv);
json monotonicity_to_json(const MonotonicityReport& r);
json gossez_to_json(const GossezMembership& g);
json certificate_to_json(const EquivCertificate& c);
json iteration_to_json(const IterationTrace& t);
json eqthm_to_json(const EqthmReport& r);
json surjectivity_to_json(const SurjectivityResult& r);
json adjoint_report_to_json(const AdjointReport& r);
json tail_identity_to_json(const TailIdentity& t);
json tail_witness_to_json(const TailNiWitness& w);
json tail_structure_to_json(const TailStructure& t);

// the report envelope every CLI command emits
json run_report(const std::string& command, json inputs, json results,
                std::vector<std::string> warnings);

}  // namespace monokit::io
