#ifndef STEPMOMENTS_JSON_IO_HPP
#define STEPMOMENTS_JSON_IO_HPP

#include <json.hpp>

#include "stepmoments/coalescence.hpp"
#include "stepmoments/hankel.hpp"
#include "stepmoments/moments.hpp"
#include "stepmoments/oracle.hpp"
#include "stepmoments/sdp.hpp"

namespace stepmoments::io {

// Documented wire schemas (field names are fixed):
//   StepFunction       {"breakpoints":[...], "heights":[...]}
//   MomentVector       {"exponents":[...], "values":[...]}
//   PopulationHistory  {"breakpoints":[...], "sizes":[...], "domain":"halfline"}
//   CoalescenceVector  {"n":..., "values":[...], "normalized":bool}

nlohmann::json to_json(const StepFunction& f);
StepFunction step_from_json(const nlohmann::json& j);

nlohmann::json to_json(const MomentVector& m);
MomentVector moment_vector_from_json(const nlohmann::json& j);

nlohmann::json to_json(const PopulationHistory& eta);
PopulationHistory history_from_json(const nlohmann::json& j);

nlohmann::json to_json(const CoalescenceVector& c);
CoalescenceVector coalescence_from_json(const nlohmann::json& j);

nlohmann::json to_json(const AtomicMeasure& mu);
AtomicMeasure atoms_from_json(const nlohmann::json& j);

nlohmann::json to_json(const MembershipResult& r);
nlohmann::json to_json(const oracle::FitResult& r);
nlohmann::json to_json(const oracle::GridFit& g);
nlohmann::json to_json(const oracle::TheoremReport& rep);
nlohmann::json to_json(const ManifoldNearestResult& r);

// Debug serialization; matrices as dense row-major arrays.
nlohmann::json to_json(const sdp::SdpProblem& p);
nlohmann::json to_json(const sdp::SdpSolution& s);

}  // namespace stepmoments::io

#endif
