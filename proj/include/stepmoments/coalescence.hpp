#ifndef STEPMOMENTS_COALESCENCE_HPP
#define STEPMOMENTS_COALESCENCE_HPP

#include <optional>
#include <string>
#include <vector>

#include "stepmoments/moments.hpp"
#include "stepmoments/hankel.hpp"
#include "stepmoments/sdp.hpp"

namespace stepmoments {

/// Piecewise-constant effective population size on [0, infinity), in
/// coalescent units: sizes[i] on [breakpoints[i-1], breakpoints[i]) with
/// implicit endpoints 0 and infinity.  Sizes are strictly positive.
struct PopulationHistory {
  PopulationHistory(std::vector<double> breakpoints, std::vector<double> sizes);

  std::vector<double> breakpoints;
  std::vector<double> sizes;

  int num_breakpoints() const { return static_cast<int>(breakpoints.size()); }
  double value_at(double t) const;
};

/// Cumulative coalescence intensity R(t) = int_0^t 1/eta, piecewise linear,
/// strictly increasing, R(0) = 0.
double intensity(const PopulationHistory& eta, double t);

/// Inverse of the intensity (both directions are piecewise linear).
double intensity_inverse(const PopulationHistory& eta, double tau);

/// The time-rescaled history as a density on the unit interval,
/// eta*(u) = eta(R^{-1}(-ln u)): breakpoints e^{-R(b_k)} < ... < e^{-R(b_1)}
/// with the sizes in reversed order.
StepFunction to_unit_step(const PopulationHistory& eta);

/// Inverse construction for strictly positive step functions: with
/// q(tau) = f(e^{-tau}) and Q its antiderivative, returns
/// eta(t) = q(Q^{-1}(t)), which transforms back to f exactly.
/// Throws when f has a zero height (the construction needs q bounded
/// away from zero).
PopulationHistory from_unit_step(const StepFunction& f);

/// Expected first-coalescence times c_2..c_n of subsamples of sizes 2..n.
struct CoalescenceVector {
  int n = 2;
  std::vector<double> values;  // c_2 .. c_n
  bool normalized = false;
};

/// c_i = int_0^1 eta*(u) u^{C(i,2)-1} du, evaluated in closed form through
/// the unit-interval moments of to_unit_step(eta).
CoalescenceVector coalescence_vector(const PopulationHistory& eta, int n);

/// Division by the coordinate sum; rejects the zero vector.
CoalescenceVector normalize(const CoalescenceVector& c);

/// The exponent set {C(i,2) - 1 : i = 2..n} = {0, 2, 5, 9, 14, ...}.
ExponentSet coalescence_exponents(int n);

/// Membership of a point in the coalescence manifold C_{n,k} for any
/// k >= n-2: checks the coordinate sum, then projected membership over
/// the coalescence exponents.
MembershipResult manifold_membership(const std::vector<double>& point, int n,
                                     const sdp::SolverOptions& opts = {},
                                     sdp::SdpSolution* diagnostics = nullptr);

struct ManifoldNearestResult {
  MomentVector projection;
  double distance = 0.0;
  std::optional<PopulationHistory> witness;
  std::string witness_note;
  sdp::SdpSolution solution;
};

struct WitnessOptions {
  std::uint64_t seed = 42;
  int starts = 32;
  int candidates = 12;     // fiber points examined for the jump heuristic
  double fit_tol = 1e-6;   // residual bound for usable witnesses
  int jobs = 1;
};

/// Nearest point on C_{n, n-2} to p (sum-to-one nearest-point SDP), plus an
/// attempt to recover a witness history: step-function fits of the
/// projection with k = n-2 breakpoints, preferring the candidate with the
/// smallest worst-case population jump, converted through from_unit_step.
ManifoldNearestResult manifold_nearest(const std::vector<double>& p, int n,
                                       const sdp::SolverOptions& opts = {},
                                       const WitnessOptions& wopts = {});

}  // namespace stepmoments

#endif
