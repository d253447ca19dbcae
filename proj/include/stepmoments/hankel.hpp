#ifndef STEPMOMENTS_HANKEL_HPP
#define STEPMOMENTS_HANKEL_HPP

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "stepmoments/moments.hpp"

namespace stepmoments {

/// The two symmetric matrices whose joint positive semidefiniteness
/// characterizes a full moment sequence m_0..m_d on [0,1].
///   d = 2e   : h1 = (m_{i+j})_{0..e},    h2 = (m_{i+j+1} - m_{i+j+2})_{0..e-1}
///   d = 2e+1 : h1 = (m_{i+j+1})_{0..e},  h2 = (m_{i+j} - m_{i+j+1})_{0..e}
struct HankelPair {
  Eigen::MatrixXd h1;
  Eigen::MatrixXd h2;
  bool even = true;
  int degree = 0;
};

/// Builds the Hankel pair; the moment vector must carry consecutive
/// exponents 0..d.
HankelPair hankel_pair(const MomentVector& m);

/// Smallest eigenvalue of a symmetric matrix (tridiagonalization + QL via
/// Eigen's selfadjoint solver).  Rejects matrices that are not symmetric
/// within 1e-12 relative to their largest entry.
double psd_min_eig(const Eigen::MatrixXd& M);

enum class Membership { inside, boundary, outside };

std::string to_string(Membership m);

struct MembershipResult {
  Membership decision = Membership::outside;
  /// Smallest eigenvalues of the two Hankel blocks (at the witness
  /// completion, for projected tests).
  std::pair<double, double> min_eigenvalues{0.0, 0.0};
  /// Boundary certificate: a representing atomic measure, when recoverable.
  std::optional<AtomicMeasure> certificate_atoms;
  /// Outside certificate: coefficients p_c (c = 0..d) of a polynomial
  /// nonnegative on [0,1] with sum_c p_c m_c < 0.
  std::optional<std::vector<double>> certificate_functional;
  /// Signed margin: for eigenvalue tests the worst block eigenvalue; for
  /// SDP-based tests the optimal shift -t*.
  double margin = 0.0;
  std::string message;
};

/// PSD trichotomy for a full sequence m_0..m_d with tolerance
/// psd_tol = 1e-9 (1 + |trace|) per block.  On the boundary, attempts atom
/// extraction for the certificate.
MembershipResult full_membership(const MomentVector& m);

/// Recovers the representing atomic measure of a boundary sequence: kernel
/// vector of the most singular block -> companion-matrix roots in [0,1]
/// (plus the endpoints as candidates) -> nonnegative least-squares weights.
/// Throws std::runtime_error("atom extraction failed...") when the
/// reconstruction misses m by more than 1e-8 (1 + ||m||).
AtomicMeasure extract_atoms(const MomentVector& m);

struct IndexReport {
  AtomicMeasure atoms;
  int boundary_count = 0;  // atoms at {0,1}
  int interior_count = 0;  // atoms in (0,1)
  int index = 0;           // boundary_count + 2 * interior_count
};

/// Index b + 2i of an atomic measure, with endpoint tolerance 1e-9.
IndexReport index_of(const AtomicMeasure& mu);

/// Determinant of the generalized Vandermonde matrix S_A(r) with entries
/// r_j^{a_i}; requires min(A) = 0, |r| = |A| and strictly increasing r in
/// [0,1].  Strictly positive for all valid inputs.
double schur_det(const ExponentSet& A, const std::vector<double>& r);

struct BialternantCheck {
  double lhs = 0.0;  // det S_A(r)
  double rhs = 0.0;  // Vandermonde(r) * schur polynomial via tableaux
};

/// Evaluates both sides of the bialternant identity
///   det S_A(r) = prod_{i<j} (r_j - r_i) * s_lambda(r),
/// the Schur polynomial being summed over semistandard Young tableaux of
/// shape lambda = (a_n - (n-1), ..., a_1).  Throws when the tableau
/// enumeration would be too large for desk scale.
BialternantCheck bialternant_check(const ExponentSet& A, const std::vector<double>& r);

/// Dense matrix as CSV text (debugging aid).
std::string matrix_csv(const Eigen::MatrixXd& M);

}  // namespace stepmoments

#endif
