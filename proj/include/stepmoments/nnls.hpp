#ifndef STEPMOMENTS_NNLS_HPP
#define STEPMOMENTS_NNLS_HPP

#include <Eigen/Dense>

namespace stepmoments {

struct NnlsResult {
  Eigen::VectorXd x;
  double residual = 0.0;  // ||A x - b||_2
  bool converged = true;
  int iterations = 0;
};

/// Lawson-Hanson active-set solve of  min ||A x - b||_2  s.t.  x >= 0.
/// Passive-set least-squares subproblems are solved by column-pivoted QR.
NnlsResult nnls(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, int max_iter = -1);

}  // namespace stepmoments

#endif
