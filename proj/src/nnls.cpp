#include "stepmoments/nnls.hpp"

#include <limits>
#include <vector>

namespace stepmoments {

namespace {

// Least squares on the passive columns only.
Eigen::VectorXd passive_solve(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                              const std::vector<int>& passive) {
  Eigen::MatrixXd Ap(A.rows(), static_cast<int>(passive.size()));
  for (size_t j = 0; j < passive.size(); ++j) Ap.col(static_cast<int>(j)) = A.col(passive[j]);
  return Ap.colPivHouseholderQr().solve(b);
}

}  // namespace

NnlsResult nnls(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, int max_iter) {
  const int n = static_cast<int>(A.cols());
  if (max_iter < 0) max_iter = 3 * n + 30;

  NnlsResult out;
  out.x = Eigen::VectorXd::Zero(n);
  if (n == 0 || A.rows() == 0) {
    out.residual = b.norm();
    return out;
  }

  std::vector<bool> in_passive(n, false);
  std::vector<int> passive;
  Eigen::VectorXd resid = b;  // b - A x
  Eigen::VectorXd colnorm(n);
  for (int j = 0; j < n; ++j) colnorm[j] = std::max(A.col(j).norm(), 1e-300);
  constexpr double kDualEps = 10.0 * std::numeric_limits<double>::epsilon();

  int iter = 0;
  while (iter < max_iter) {
    // Column-equilibrated dual over the active set; by Cauchy-Schwarz the
    // normalized entries are bounded by ||resid||, which sets the scale of
    // the termination test.
    Eigen::VectorXd w = A.transpose() * resid;
    const double rnorm = resid.norm();
    int best = -1;
    double best_w = kDualEps * rnorm;
    for (int j = 0; j < n; ++j) {
      const double wj = w[j] / colnorm[j];
      if (!in_passive[j] && wj > best_w) {
        best_w = wj;
        best = j;
      }
    }
    if (best < 0) break;  // KKT satisfied

    in_passive[best] = true;
    passive.push_back(best);

    // Inner loop: restore feasibility of the passive-set solution.
    while (true) {
      ++iter;
      Eigen::VectorXd z = passive_solve(A, b, passive);
      double alpha = 1.0;
      int blocker = -1;
      for (size_t j = 0; j < passive.size(); ++j) {
        if (z[static_cast<int>(j)] <= 0.0) {
          const double xj = out.x[passive[j]];
          const double step = xj / (xj - z[static_cast<int>(j)]);
          if (step < alpha) {
            alpha = step;
            blocker = static_cast<int>(j);
          }
        }
      }
      if (blocker < 0) {
        for (size_t j = 0; j < passive.size(); ++j) out.x[passive[j]] = z[static_cast<int>(j)];
        break;
      }
      for (size_t j = 0; j < passive.size(); ++j) {
        const int col = passive[j];
        out.x[col] += alpha * (z[static_cast<int>(j)] - out.x[col]);
      }
      // Remove entries driven to (or numerically at) zero.
      std::vector<int> keep;
      for (size_t j = 0; j < passive.size(); ++j) {
        if (static_cast<int>(j) == blocker || out.x[passive[j]] <= 0.0) {
          out.x[passive[j]] = 0.0;
          in_passive[passive[j]] = false;
        } else {
          keep.push_back(passive[j]);
        }
      }
      passive.swap(keep);
      if (passive.empty()) break;
      if (iter >= max_iter) {
        out.converged = false;
        break;
      }
    }
    resid = b - A * out.x;
    if (!out.converged) break;
  }
  if (iter >= max_iter) out.converged = false;

  out.iterations = iter;
  out.residual = (b - A * out.x).norm();
  return out;
}

}  // namespace stepmoments
