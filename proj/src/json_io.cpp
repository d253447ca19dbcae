#include "stepmoments/json_io.hpp"

namespace stepmoments::io {

using nlohmann::json;

namespace {

json matrix_rows(const Eigen::MatrixXd& M) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<double> doubles(const json& j, const char* field) {
  if (!j.contains(field)) throw std::invalid_argument(std::string("missing field: ") + field);
  return j.at(field).get<std::vector<double>>();
}

}  // namespace

json to_json(const StepFunction& f) {
  return json{{"breakpoints", f.breakpoints}, {"heights", f.heights}};
}

StepFunction step_from_json(const json& j) {
  return StepFunction(doubles(j, "breakpoints"), doubles(j, "heights"));
}

json to_json(const MomentVector& m) {
  return json{{"exponents", m.exponent_set.exponents()}, {"values", m.values}};
}

MomentVector moment_vector_from_json(const json& j) {
  if (!j.contains("exponents")) throw std::invalid_argument("missing field: exponents");
  return MomentVector(ExponentSet(j.at("exponents").get<std::vector<int>>()),
                      doubles(j, "values"));
}

json to_json(const PopulationHistory& eta) {
  return json{{"breakpoints", eta.breakpoints}, {"sizes", eta.sizes}, {"domain", "halfline"}};
}

PopulationHistory history_from_json(const json& j) {
  if (j.contains("domain") && j.at("domain").get<std::string>() != "halfline")
    throw std::invalid_argument("PopulationHistory: domain must be \"halfline\"");
  return PopulationHistory(doubles(j, "breakpoints"), doubles(j, "sizes"));
}

json to_json(const CoalescenceVector& c) {
  return json{{"n", c.n}, {"values", c.values}, {"normalized", c.normalized}};
}

CoalescenceVector coalescence_from_json(const json& j) {
  CoalescenceVector c;
  c.n = j.at("n").get<int>();
  c.values = doubles(j, "values");
  c.normalized = j.value("normalized", false);
  return c;
}

json to_json(const AtomicMeasure& mu) {
  std::vector<double> locs, ws;
  for (const auto& a : mu.atoms) {
    locs.push_back(a.location);
    ws.push_back(a.weight);
  }
  return json{{"locations", locs}, {"weights", ws}};
}

AtomicMeasure atoms_from_json(const json& j) {
  const auto locs = doubles(j, "locations");
  const auto ws = doubles(j, "weights");
  if (locs.size() != ws.size())
    throw std::invalid_argument("AtomicMeasure: locations/weights length mismatch");
  std::vector<AtomicMeasure::Atom> atoms;
  for (size_t i = 0; i < locs.size(); ++i) atoms.push_back({locs[i], ws[i]});
  return AtomicMeasure(std::move(atoms));
}

json to_json(const MembershipResult& r) {
  json j{{"decision", to_string(r.decision)},
         {"margin", r.margin},
         {"min_eigenvalues", {r.min_eigenvalues.first, r.min_eigenvalues.second}}};
  if (r.certificate_atoms) j["certificate_atoms"] = to_json(*r.certificate_atoms);
  if (r.certificate_functional) j["certificate_functional"] = *r.certificate_functional;
  if (!r.message.empty()) j["message"] = r.message;
  return j;
}

json to_json(const oracle::FitResult& r) {
  return json{{"s", r.best.s},
              {"w", r.best.w},
              {"residual", r.residual},
              {"starts_tried", r.starts_tried},
              {"converged", r.converged}};
}

json to_json(const oracle::GridFit& g) {
  return json{{"residual", g.residual}, {"grid_size", g.grid_size}};
}

json to_json(const oracle::TheoremReport& rep) {
  json cases = json::array();
  for (const auto& c : rep.cases)
    cases.push_back(json{{"theorem", c.theorem},
                         {"A", c.A},
                         {"k", c.k},
                         {"trials", c.trials},
                         {"max_residual", c.max_residual},
                         {"pass", c.pass}});
  return json{{"cases", std::move(cases)}, {"pass", rep.pass}};
}

json to_json(const ManifoldNearestResult& r) {
  json j{{"projection", to_json(r.projection)}, {"distance", r.distance}};
  if (r.witness)
    j["witness"] = to_json(*r.witness);
  else
    j["witness_note"] = r.witness_note;
  return j;
}

json to_json(const sdp::SdpProblem& p) {
  json blocks = json::array();
  for (const auto& b : p.blocks) {
    json coeffs = json::array();
    for (const auto& c : b.coeff) coeffs.push_back(matrix_rows(c));
    blocks.push_back(json{{"f0", matrix_rows(b.f0)}, {"coeff", std::move(coeffs)}});
  }
  json eqs = json::array();
  for (const auto& [a, b] : p.equalities) {
    eqs.push_back(json{{"a", std::vector<double>(a.data(), a.data() + a.size())}, {"b", b}});
  }
  return json{{"num_vars", p.num_vars},
              {"objective", std::vector<double>(p.objective.data(),
                                                p.objective.data() + p.objective.size())},
              {"blocks", std::move(blocks)},
              {"equalities", std::move(eqs)}};
}

json to_json(const sdp::SdpSolution& s) {
  json duals = json::array();
  for (const auto& d : s.dual_blocks) duals.push_back(matrix_rows(d));
  return json{{"status", to_string(s.status)},
              {"x", std::vector<double>(s.x.data(), s.x.data() + s.x.size())},
              {"objective_value", s.objective_value},
              {"dual_objective", s.dual_objective},
              {"duality_gap", s.duality_gap},
              {"min_block_eigs", s.min_block_eigs},
              {"dual_blocks", std::move(duals)},
              {"iterations", s.iterations},
              {"message", s.message}};
}

}  // namespace stepmoments::io
