#ifndef STEPMOMENTS_ORACLE_HPP
#define STEPMOMENTS_ORACLE_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "stepmoments/moments.hpp"

namespace stepmoments::oracle {

struct FitOptions {
  std::uint64_t seed = 42;
  int starts = 32;  // random multi-starts, in addition to structured seeds
  int jobs = 1;
  /// Constrain the fitted coordinate sum to 1 (weighted-row NNLS).
  bool sum_one = false;
  /// Additional cut-point seeds (each projected onto the sorted box).
  std::vector<std::vector<double>> extra_starts;
};

struct GridFit {
  double residual = 0.0;  // Euclidean distance in moment space
  Eigen::VectorXd weights;
  int grid_size = 0;
};

/// Conic-hull membership on a uniform grid: nonnegative least squares of m
/// against the curve atoms v_A(i/(N-1)), optionally with the coordinate-sum
/// constraint.  The residual tends to 0 with N exactly for members.
GridFit grid_membership(const MomentVector& m, int grid_size = 2001, bool sum_one = false);

struct FitResult {
  PolytopePoint best{{}, {0.0}};
  double residual = 0.0;
  int starts_tried = 0;
  bool converged = false;
};

/// Multi-start best fit of m by a step function with at most k breakpoints
/// (optionally with monotone heights): Nelder-Mead over the sorted cut
/// points with an inner nonnegative least-squares solve for the masses,
/// then a Gauss-Newton polish.
FitResult best_fit_step(const MomentVector& m, int k, Monotone mode = Monotone::none,
                        const FitOptions& opts = {});

struct TheoremCase {
  std::string theorem;
  std::vector<int> A;
  int k = 0;
  int trials = 0;
  /// Worst fit residual over the trials; for tightness cases, the best
  /// residual the multi-start could reach (an empirical lower bound).
  double max_residual = 0.0;
  bool pass = false;
};

struct TheoremReport {
  std::vector<TheoremCase> cases;
  bool pass = true;
};

/// Randomized checks of the breakpoint-budget theorems at desk scale:
/// random cone members must fit at k = |A|-1 (monotone members at
/// k = floor(|A|/2)) to 1e-6, while planted boundary targets must stay
/// at least 1e-4 away from the smaller budget across 256 multi-starts.
TheoremReport theorem_suite(const ExponentSet& A, int trials, const FitOptions& opts = {});

/// Distinct parameter points (s, w) with ||mu_A(s, w) - m|| <= 1e-6 found
/// by repeated randomized local solves; exploratory (no connectivity claim).
std::vector<PolytopePoint> fiber_sample(const MomentVector& m, int k, int count,
                                        const FitOptions& opts = {});

}  // namespace stepmoments::oracle

#endif
