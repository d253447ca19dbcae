#ifndef STEPMOMENTS_SDP_HPP
#define STEPMOMENTS_SDP_HPP

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "stepmoments/hankel.hpp"
#include "stepmoments/moments.hpp"

namespace stepmoments::sdp {

/// One linear matrix inequality  f0 + sum_i x_i coeff[i] >= 0.
struct SdpBlock {
  Eigen::MatrixXd f0;
  std::vector<Eigen::MatrixXd> coeff;  // one symmetric matrix per variable

  int dim() const { return static_cast<int>(f0.rows()); }
};

/// Dense block SDP: minimize objective.x subject to every block being
/// positive semidefinite and the affine equalities a.x = b.
struct SdpProblem {
  int num_vars = 0;
  Eigen::VectorXd objective;
  std::vector<SdpBlock> blocks;
  std::vector<std::pair<Eigen::VectorXd, double>> equalities;
  /// Optional hint; the solver is infeasible-start and completes it.
  std::optional<Eigen::VectorXd> initial_x;
};

enum class SdpStatus { optimal, feasible, infeasible, max_iter };

std::string to_string(SdpStatus s);

struct IterationRecord {
  double primal_obj = 0.0;
  double dual_obj = 0.0;
  double gap = 0.0;
  double primal_res = 0.0;  // equality/LMI linkage residual
  double dual_res = 0.0;    // dual feasibility residual
  double mu = 0.0;
};

struct SdpSolution {
  SdpStatus status = SdpStatus::max_iter;
  Eigen::VectorXd x;
  double objective_value = 0.0;
  double dual_objective = 0.0;
  double duality_gap = 0.0;
  std::vector<double> min_block_eigs;  // eigenvalues of the blocks at x
  std::vector<Eigen::MatrixXd> dual_blocks;
  int iterations = 0;
  std::string message;
  std::vector<IterationRecord> trace;
};

struct SolverOptions {
  /// Relative duality-gap requirement for declaring the solution optimal.
  double gap_tol = 1e-9;
  /// The solver keeps polishing toward this gap while steps make progress.
  double target_gap = 5e-13;
  int max_iter = 200;
  /// Inside/outside threshold on feasibility margins.
  double feas_tol = 1e-7;
};

/// Primal-dual path-following interior-point solve with Nesterov-Todd
/// scaling and a Mehrotra predictor-corrector step.  Equality constraints
/// are eliminated by a null-space parameterization up front; Newton systems
/// are solved densely.
SdpSolution solve(const SdpProblem& p, const SolverOptions& opts = {});

struct FeasibilityResult {
  bool feasible = false;
  /// margin = -t*, the best achievable smallest block eigenvalue.
  double margin = 0.0;
  Eigen::VectorXd x;  // witness point (without the shift variable)
  std::vector<Eigen::MatrixXd> dual_blocks;
  SdpSolution solution;
};

/// Feasibility of { blocks(x) >= 0, equalities } via
///   minimize t  s.t.  block_j(x) + t I >= 0,
/// declared feasible when t* <= feas_tol.  The dual solution of an
/// infeasible problem carries a separating functional on the data.
FeasibilityResult feasibility(const std::vector<SdpBlock>& blocks,
                              const std::vector<std::pair<Eigen::VectorXd, double>>& equalities,
                              std::optional<Eigen::VectorXd> initial_x = {},
                              const SolverOptions& opts = {});

/// Hankel-pair LMIs for a full sequence m_0..m_d, as affine maps of the
/// variables at indices offset..offset+d in a num_vars-dimensional space.
std::vector<SdpBlock> hankel_blocks(int degree, int num_vars, int offset = 0);

/// Membership of a sparse moment vector in M(A): base-shift to B with
/// 0 in B, pin the B-coordinates of a full sequence m_0..m_max(B), impose
/// the Hankel pair, and test feasibility.  `diagnostics`, when given,
/// receives the underlying solver run.
MembershipResult projected_membership(const MomentVector& m, const SolverOptions& opts = {},
                                      SdpSolution* diagnostics = nullptr);

/// Membership in the monotone cones: the given coordinates are pinned
/// through the corresponding gamma-curve linear map of a full sequence.
MembershipResult monotone_membership(const MomentVector& m, Monotone direction,
                                     const SolverOptions& opts = {},
                                     SdpSolution* diagnostics = nullptr);

struct NearestPointResult {
  MomentVector projection;
  double distance = 0.0;
  SdpSolution solution;
};

/// Nearest point of M(A) (optionally sliced by sum_a m_a = 1) to p:
/// minimize lambda over the Hankel blocks plus the arrow block
/// [[lambda, x - p], [(x - p)^T, I]].
NearestPointResult nearest_point(const std::vector<double>& p, const ExponentSet& A,
                                 bool sum_to_one, const SolverOptions& opts = {});

}  // namespace stepmoments::sdp

#endif
