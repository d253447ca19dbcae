#include "stepmoments/coalescence.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "stepmoments/oracle.hpp"

namespace stepmoments {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

PopulationHistory::PopulationHistory(std::vector<double> bp, std::vector<double> sz)
    : breakpoints(std::move(bp)), sizes(std::move(sz)) {
  require(sizes.size() == breakpoints.size() + 1,
          "PopulationHistory: need one more size than breakpoints");
  double prev = 0.0;
  for (double b : breakpoints) {
    require(std::isfinite(b) && b > prev, "PopulationHistory: breakpoints must be positive and strictly increasing");
    prev = b;
  }
  for (double p : sizes)
    require(std::isfinite(p) && p > 0.0, "PopulationHistory: sizes must be strictly positive");
}

double PopulationHistory::value_at(double t) const {
  require(t >= 0.0, "PopulationHistory::value_at: t must be >= 0");
  size_t i = 0;
  while (i < breakpoints.size() && t >= breakpoints[i]) ++i;
  return sizes[i];
}

double intensity(const PopulationHistory& eta, double t) {
  require(t >= 0.0, "intensity: t must be >= 0");
  double acc = 0.0;
  double left = 0.0;
  for (size_t i = 0; i < eta.sizes.size(); ++i) {
    const double right = (i < eta.breakpoints.size()) ? eta.breakpoints[i]
                                                      : std::numeric_limits<double>::infinity();
    if (t <= right) return acc + (t - left) / eta.sizes[i];
    acc += (right - left) / eta.sizes[i];
    left = right;
  }
  return acc;  // unreachable: the last piece is unbounded
}

double intensity_inverse(const PopulationHistory& eta, double tau) {
  require(tau >= 0.0, "intensity_inverse: tau must be >= 0");
  double acc = 0.0;  // R at the left edge of the current piece
  double left = 0.0;
  for (size_t i = 0; i < eta.sizes.size(); ++i) {
    const double right = (i < eta.breakpoints.size()) ? eta.breakpoints[i]
                                                      : std::numeric_limits<double>::infinity();
    const double acc_right = acc + (right - left) / eta.sizes[i];
    if (tau <= acc_right || i + 1 == eta.sizes.size())
      return left + (tau - acc) * eta.sizes[i];
    acc = acc_right;
    left = right;
  }
  return left;
}

StepFunction to_unit_step(const PopulationHistory& eta) {
  const int k = eta.num_breakpoints();
  std::vector<double> bp(k), hs(k + 1);
  for (int j = 0; j < k; ++j) {
    // breakpoints e^{-R(b_k)} < ... < e^{-R(b_1)}
    bp[j] = std::exp(-intensity(eta, eta.breakpoints[k - 1 - j]));
  }
  for (int j = 0; j <= k; ++j) hs[j] = eta.sizes[k - j];
  return canonicalize(StepFunction(std::move(bp), std::move(hs)));
}

PopulationHistory from_unit_step(const StepFunction& f) {
  const StepFunction g = canonicalize(f);
  for (double y : g.heights)
    if (y <= 0.0)
      throw std::invalid_argument(
          "from_unit_step: the inverse transform lemma requires strictly positive heights");

  // q(tau) = f(e^{-tau}) has breakpoints -ln(s_j) in reverse order; the
  // history places them at Q(tau) = int_0^tau q, with the same values.
  const int k = g.num_breakpoints();
  std::vector<double> q_bp(k), q_val(k + 1);
  for (int j = 0; j < k; ++j) q_bp[j] = -std::log(g.breakpoints[k - 1 - j]);
  for (int j = 0; j <= k; ++j) q_val[j] = g.heights[k - j];

  std::vector<double> bp(k);
  double acc = 0.0, left = 0.0;
  for (int j = 0; j < k; ++j) {
    acc += q_val[j] * (q_bp[j] - left);
    bp[j] = acc;
    left = q_bp[j];
  }
  return PopulationHistory(std::move(bp), std::move(q_val));
}

CoalescenceVector coalescence_vector(const PopulationHistory& eta, int n) {
  require(n >= 2, "coalescence_vector: n >= 2 required");
  const MomentVector m = moments_of_step(to_unit_step(eta), coalescence_exponents(n));
  return CoalescenceVector{n, m.values, false};
}

CoalescenceVector normalize(const CoalescenceVector& c) {
  double sum = 0.0;
  for (double v : c.values) sum += v;
  require(sum > 0.0, "normalize: coordinate sum must be positive");
  CoalescenceVector out{c.n, c.values, true};
  for (double& v : out.values) v /= sum;
  return out;
}

ExponentSet coalescence_exponents(int n) {
  require(n >= 2, "coalescence_exponents: n >= 2 required");
  std::vector<int> exps(n - 1);
  for (int i = 2; i <= n; ++i) exps[i - 2] = i * (i - 1) / 2 - 1;
  return ExponentSet(std::move(exps));
}

MembershipResult manifold_membership(const std::vector<double>& point, int n,
                                     const sdp::SolverOptions& opts,
                                     sdp::SdpSolution* diagnostics) {
  const ExponentSet A = coalescence_exponents(n);
  require(static_cast<int>(point.size()) == A.size(),
          "manifold_membership: point dimension must be n-1");
  double sum = 0.0;
  for (double v : point) sum += v;
  if (std::abs(sum - 1.0) > 1e-9) {
    MembershipResult res;
    res.decision = Membership::outside;
    res.margin = -(std::abs(sum - 1.0));
    res.message = "not on simplex: coordinate sum differs from 1";
    return res;
  }
  return sdp::projected_membership(MomentVector(A, point), opts, diagnostics);
}

ManifoldNearestResult manifold_nearest(const std::vector<double>& p, int n,
                                       const sdp::SolverOptions& opts,
                                       const WitnessOptions& wopts) {
  const ExponentSet A = coalescence_exponents(n);
  require(static_cast<int>(p.size()) == A.size(), "manifold_nearest: point dimension must be n-1");

  sdp::NearestPointResult np = sdp::nearest_point(p, A, /*sum_to_one=*/true, opts);
  ManifoldNearestResult out{np.projection, np.distance, std::nullopt, "", np.solution};

  // Witness: step-function representations of the projection with k = n-2
  // breakpoints; prefer the smallest worst-case population jump.
  oracle::FitOptions fo;
  fo.seed = wopts.seed;
  fo.starts = wopts.starts;
  fo.jobs = wopts.jobs;
  std::vector<PolytopePoint> fiber =
      oracle::fiber_sample(out.projection, n - 2, wopts.candidates, fo);
  if (fiber.empty()) {
    out.witness_note = "no step-function fit of the projection at k = n-2";
    return out;
  }

  double best_jump = std::numeric_limits<double>::infinity();
  for (const PolytopePoint& q : fiber) {
    StepFunction f({}, {0.0});
    try {
      f = polytope_to_step(q);
    } catch (const std::exception&) {
      continue;  // mass on a degenerate piece: not a step function
    }
    bool positive = true;
    for (double y : f.heights) positive = positive && y > 0.0;
    if (!positive) continue;
    double jump = 0.0;
    for (size_t i = 1; i < f.heights.size(); ++i)
      jump = std::max(jump, std::abs(std::log(f.heights[i] / f.heights[i - 1])));
    if (jump < best_jump) {
      best_jump = jump;
      out.witness = from_unit_step(f);
    }
  }
  if (!out.witness)
    out.witness_note = "all fits touch the boundary (zero or atomic pieces); no positive history";
  return out;
}

}  // namespace stepmoments
