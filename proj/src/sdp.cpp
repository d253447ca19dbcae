#include "stepmoments/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace stepmoments::sdp {

namespace {

// The Newton systems are solved in extended precision: the Hankel blocks of
// interior moment sequences are Hilbert-like and the acceptance workloads
// need duality gaps near 1e-12.
using Real = long double;
using Mat = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;
using Vec = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

Real frob(const Mat& m) { return m.size() ? std::sqrt((double)m.cwiseProduct(m).sum()) : Real(0); }

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

struct Reduced {
  Vec c;                            // reduced objective
  std::vector<Mat> b0;              // per block, blocks are b0 + sum z_l bl[l]
  std::vector<std::vector<Mat>> bl; // [block][reduced var]
  Mat null_basis;                   // x = x0 + N z
  Vec x0;
  Real obj_const = 0;
  int nz = 0;
  bool equalities_consistent = true;
};

Reduced reduce(const SdpProblem& p) {
  const int n = p.num_vars;
  Reduced r;

  const int q = static_cast<int>(p.equalities.size());
  if (q == 0) {
    r.x0 = Vec::Zero(n);
    r.null_basis = Mat::Identity(n, n);
  } else {
    Mat A(q, n);
    Vec b(q);
    for (int i = 0; i < q; ++i) {
      require(p.equalities[i].first.size() == n, "sdp: equality row dimension mismatch");
      A.row(i) = p.equalities[i].first.cast<Real>().transpose();
      b[i] = p.equalities[i].second;
    }
    Eigen::FullPivLU<Mat> lu(A);
    r.x0 = lu.solve(b);
    if ((A * r.x0 - b).cwiseAbs().maxCoeff() > 1e-9 * (1.0 + (double)b.cwiseAbs().maxCoeff())) {
      r.equalities_consistent = false;
      return r;
    }
    if (lu.rank() == n) {
      r.null_basis = Mat(n, 0);
    } else {
      Mat K = lu.kernel();
      Eigen::HouseholderQR<Mat> qr(K);
      r.null_basis = qr.householderQ() * Mat::Identity(n, K.cols());
    }
  }
  r.nz = static_cast<int>(r.null_basis.cols());
  r.c = r.null_basis.transpose() * p.objective.cast<Real>();
  r.obj_const = p.objective.cast<Real>().dot(r.x0);

  for (const SdpBlock& blk : p.blocks) {
    Mat g0 = blk.f0.cast<Real>();
    for (int i = 0; i < n; ++i) g0 += r.x0[i] * blk.coeff[i].cast<Real>();
    g0 = ((g0 + g0.transpose()) / 2).eval();
    std::vector<Mat> gl(r.nz);
    for (int l = 0; l < r.nz; ++l) {
      Mat m = Mat::Zero(blk.dim(), blk.dim());
      for (int i = 0; i < n; ++i) {
        const Real w = r.null_basis(i, l);
        if (w != Real(0)) m += w * blk.coeff[i].cast<Real>();
      }
      gl[l] = ((m + m.transpose()) / 2).eval();
    }
    r.b0.push_back(std::move(g0));
    r.bl.push_back(std::move(gl));
  }
  return r;
}

void validate(const SdpProblem& p) {
  require(p.num_vars >= 0, "sdp: negative variable count");
  require(p.objective.size() == p.num_vars, "sdp: objective dimension mismatch");
  for (const SdpBlock& blk : p.blocks) {
    require(blk.f0.rows() == blk.f0.cols(), "sdp: block f0 not square");
    require(static_cast<int>(blk.coeff.size()) == p.num_vars,
            "sdp: block needs one coefficient matrix per variable");
    const double scale = std::max(1.0, blk.f0.size() ? blk.f0.cwiseAbs().maxCoeff() : 0.0);
    require(blk.f0.size() == 0 ||
                (blk.f0 - blk.f0.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale,
            "sdp: block f0 not symmetric");
    for (const Eigen::MatrixXd& m : blk.coeff) {
      require(m.rows() == blk.f0.rows() && m.cols() == blk.f0.cols(),
              "sdp: coefficient matrix dimension mismatch");
      const double s = std::max(1.0, m.size() ? m.cwiseAbs().maxCoeff() : 0.0);
      require(m.size() == 0 || (m - m.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * s,
              "sdp: coefficient matrix not symmetric");
    }
  }
  if (p.initial_x) require(p.initial_x->size() == p.num_vars, "sdp: initial point dimension mismatch");
}

// Largest a >= 0 with diag(lam) + a * D >= 0 (scaled-space ratio test).
Real max_step(const Vec& lam, const Mat& D) {
  if (lam.size() == 0) return Real(1e18);
  Mat T = D;
  for (int i = 0; i < T.rows(); ++i)
    for (int j = 0; j < T.cols(); ++j) T(i, j) /= std::sqrt((double)(lam[i] * lam[j]));
  Eigen::SelfAdjointEigenSolver<Mat> es(T, Eigen::EigenvaluesOnly);
  const Real mn = es.eigenvalues().minCoeff();
  if (mn >= 0) return Real(1e18);
  return -1 / mn;
}

struct BlockWork {
  Mat G, Ginv;
  Vec lam;
  std::vector<Mat> bhat;  // scaled coefficient matrices
  Mat rdhat;              // scaled linkage residual
};

}  // namespace

std::string to_string(SdpStatus s) {
  switch (s) {
    case SdpStatus::optimal: return "optimal";
    case SdpStatus::feasible: return "feasible";
    case SdpStatus::infeasible: return "infeasible";
    case SdpStatus::max_iter: return "max_iter";
  }
  return "?";
}

SdpSolution solve(const SdpProblem& p, const SolverOptions& opts) {
  validate(p);
  SdpSolution out;

  const Reduced red = reduce(p);
  if (!red.equalities_consistent) {
    out.status = SdpStatus::infeasible;
    out.message = "equality constraints are inconsistent";
    out.x = Eigen::VectorXd::Zero(p.num_vars);
    return out;
  }

  const int nb = static_cast<int>(red.b0.size());
  const int nz = red.nz;

  auto finish = [&](const Vec& z, const std::vector<Mat>& X, double gap, double rp, double rd,
                    int iters, const std::string& msg) {
    const Vec x = red.x0 + red.null_basis * z;
    out.x = x.cast<double>();
    out.objective_value = static_cast<double>(red.c.dot(z) + red.obj_const);
    out.dual_objective = out.objective_value - gap;
    out.duality_gap = std::abs(gap);
    out.iterations = iters;
    out.message = msg;
    bool psd_ok = true;
    for (int j = 0; j < nb; ++j) {
      Mat S = red.b0[j];
      for (int l = 0; l < nz; ++l) S += z[l] * red.bl[j][l];
      Eigen::SelfAdjointEigenSolver<Mat> es(S, Eigen::EigenvaluesOnly);
      const double mn = S.size() ? static_cast<double>(es.eigenvalues().minCoeff())
                                 : std::numeric_limits<double>::infinity();
      out.min_block_eigs.push_back(mn);
      if (mn < -1e-9 * (1.0 + std::abs((double)S.trace()))) psd_ok = false;
    }
    for (int j = 0; j < nb; ++j) out.dual_blocks.push_back(X[j].cast<double>());
    const bool gap_ok = out.duality_gap <= opts.gap_tol * (1.0 + std::abs(out.objective_value));
    const bool res_ok = rp <= 1e-8 && rd <= 1e-8;
    if (psd_ok && gap_ok && res_ok)
      out.status = SdpStatus::optimal;
    else if (psd_ok)
      out.status = SdpStatus::feasible;
    else
      out.status = SdpStatus::max_iter;
    return out;
  };

  // Fixed point: everything is pinned by the equalities.
  if (nz == 0) {
    std::vector<Mat> X(nb);
    for (int j = 0; j < nb; ++j) X[j] = Mat::Zero(red.b0[j].rows(), red.b0[j].cols());
    finish(Vec::Zero(0), X, 0.0, 0.0, 0.0, 0, "fully determined by equalities");
    if (out.status == SdpStatus::max_iter) out.status = SdpStatus::infeasible;
    return out;
  }

  // Starting point.
  Vec z = Vec::Zero(nz);
  if (p.initial_x)
    z = red.null_basis.transpose() * (p.initial_x->cast<Real>() - red.x0);
  std::vector<Mat> S(nb), X(nb);
  Real total_dim = 0;
  for (int j = 0; j < nb; ++j) {
    Mat Sj = red.b0[j];
    for (int l = 0; l < nz; ++l) Sj += z[l] * red.bl[j][l];
    Eigen::SelfAdjointEigenSolver<Mat> es(Sj, Eigen::EigenvaluesOnly);
    const Real mn = es.eigenvalues().minCoeff();
    const Real scale = 1 + frob(red.b0[j]) / Sj.rows();
    if (mn <= 1e-8 * scale) Sj += (2 * std::max(Real(0), -mn) + Real(0.1) * scale) * Mat::Identity(Sj.rows(), Sj.cols());
    S[j] = Sj;
    const Real xi = std::max(Real(1), red.c.size() ? red.c.cwiseAbs().maxCoeff() : Real(1));
    X[j] = xi * Mat::Identity(Sj.rows(), Sj.cols());
    total_dim += Sj.rows();
  }

  const Real c_scale = 1 + (red.c.size() ? (double)red.c.cwiseAbs().maxCoeff() : 0.0);
  Real b0_scale = 1;
  for (int j = 0; j < nb; ++j) b0_scale = std::max(b0_scale, 1 + frob(red.b0[j]));

  // Best iterate seen, by worst of (relative gap, residuals).
  Vec best_z = z;
  std::vector<Mat> best_X = X;
  double best_score = std::numeric_limits<double>::infinity();
  double best_gap = 0, best_rp = 1, best_rd = 1;
  std::string note;

  int iter = 0;
  double prev_mu = std::numeric_limits<double>::infinity();
  int no_progress = 0;

  for (; iter < opts.max_iter; ++iter) {
    // Residuals and merit.
    Vec r(nz);
    for (int l = 0; l < nz; ++l) {
      Real acc = red.c[l];
      for (int j = 0; j < nb; ++j) acc -= (red.bl[j][l].cwiseProduct(X[j])).sum();
      r[l] = acc;
    }
    std::vector<Mat> Rd(nb);
    Real rp_num = 0;
    for (int j = 0; j < nb; ++j) {
      Mat Sz = red.b0[j];
      for (int l = 0; l < nz; ++l) Sz += z[l] * red.bl[j][l];
      Rd[j] = Sz - S[j];
      rp_num = std::max(rp_num, frob(Rd[j]));
    }
    Real gap_ip = 0;
    for (int j = 0; j < nb; ++j) gap_ip += (X[j].cwiseProduct(S[j])).sum();
    const Real mu = gap_ip / total_dim;

    const Real pobj = red.c.dot(z);
    Real dobj = 0;
    for (int j = 0; j < nb; ++j) dobj -= (red.b0[j].cwiseProduct(X[j])).sum();
    const double gap = static_cast<double>(pobj - dobj);
    // Normalized the way the optimality contract states it: against the
    // reported objective value (constant term included).
    const double relgap = std::abs(gap) / (1.0 + std::abs((double)(pobj + red.obj_const)));
    const double rp = static_cast<double>(rp_num / b0_scale);
    const double rd = static_cast<double>(r.cwiseAbs().maxCoeff() / c_scale);

    out.trace.push_back({static_cast<double>(pobj + red.obj_const),
                         static_cast<double>(dobj + red.obj_const), gap, rp, rd,
                         static_cast<double>(mu)});

    const double score = std::max({relgap, rp, rd});
    if (score < best_score) {
      best_score = score;
      best_z = z;
      best_X = X;
      best_gap = gap;
      best_rp = rp;
      best_rd = rd;
    }

    if (relgap <= opts.target_gap && rp <= 1e-11 && rd <= 1e-11) break;
    if ((double)mu > 0.99 * prev_mu && relgap <= opts.gap_tol) {
      ++no_progress;
      if (no_progress >= 3) break;
    } else {
      no_progress = 0;
    }
    prev_mu = (double)mu;

    // NT scaling per block.
    std::vector<BlockWork> W(nb);
    bool broke = false;
    for (int j = 0; j < nb && !broke; ++j) {
      Eigen::LLT<Mat> lx(X[j]), ls(S[j]);
      if (lx.info() != Eigen::Success || ls.info() != Eigen::Success) {
        note = "numerical breakdown: iterate left the cone";
        broke = true;
        break;
      }
      Mat L = lx.matrixL();
      Mat Ls = ls.matrixL();
      Eigen::JacobiSVD<Mat> svd(Ls.transpose() * L, Eigen::ComputeFullU | Eigen::ComputeFullV);
      Vec lam = svd.singularValues();
      if (lam.minCoeff() <= Real(0)) {
        note = "numerical breakdown: vanishing scaling spectrum";
        broke = true;
        break;
      }
      Vec isqrt = lam.cwiseSqrt().cwiseInverse();
      W[j].G = L * svd.matrixV() * isqrt.asDiagonal();
      W[j].Ginv = isqrt.asDiagonal() * svd.matrixU().transpose() * Ls.transpose();
      W[j].lam = lam;
      W[j].bhat.resize(nz);
      for (int l = 0; l < nz; ++l) {
        Mat m = W[j].G.transpose() * red.bl[j][l] * W[j].G;
        W[j].bhat[l] = ((m + m.transpose()) / 2).eval();
      }
      Mat rh = W[j].G.transpose() * Rd[j] * W[j].G;
      W[j].rdhat = ((rh + rh.transpose()) / 2).eval();
    }
    if (broke) break;

    // Schur complement.
    Mat M = Mat::Zero(nz, nz);
    for (int j = 0; j < nb; ++j)
      for (int l = 0; l < nz; ++l)
        for (int k = l; k < nz; ++k) {
          const Real v = (W[j].bhat[l].cwiseProduct(W[j].bhat[k])).sum();
          M(l, k) += v;
          if (k != l) M(k, l) += v;
        }
    Eigen::LDLT<Mat> mf(M);
    if (mf.info() != Eigen::Success) {
      note = "numerical breakdown: singular Newton system";
      break;
    }

    auto newton = [&](const std::vector<Mat>& K, Vec& dz, std::vector<Mat>& dXh,
                      std::vector<Mat>& dSh) {
      Vec rhs(nz);
      for (int l = 0; l < nz; ++l) {
        Real acc = -r[l];
        for (int j = 0; j < nb; ++j)
          acc += (W[j].bhat[l].cwiseProduct(K[j] - W[j].rdhat)).sum();
        rhs[l] = acc;
      }
      dz = mf.solve(rhs);
      dz += mf.solve(rhs - M * dz);  // one round of iterative refinement
      dXh.resize(nb);
      dSh.resize(nb);
      for (int j = 0; j < nb; ++j) {
        Mat ds = W[j].rdhat;
        for (int l = 0; l < nz; ++l) ds += dz[l] * W[j].bhat[l];
        dSh[j] = ds;
        dXh[j] = K[j] - ds;
      }
    };

    // Predictor (affine scaling direction).
    std::vector<Mat> K(nb);
    for (int j = 0; j < nb; ++j) K[j] = -Mat(W[j].lam.asDiagonal());
    Vec dz_a;
    std::vector<Mat> dXh_a, dSh_a;
    newton(K, dz_a, dXh_a, dSh_a);

    Real ax = Real(1e18), as = Real(1e18);
    for (int j = 0; j < nb; ++j) {
      ax = std::min(ax, max_step(W[j].lam, dXh_a[j]));
      as = std::min(as, max_step(W[j].lam, dSh_a[j]));
    }
    const Real a_aff = std::min(Real(1), ax);
    const Real s_aff = std::min(Real(1), as);
    Real mu_aff = 0;
    for (int j = 0; j < nb; ++j) {
      const Mat xa = Mat(W[j].lam.asDiagonal()) + a_aff * dXh_a[j];
      const Mat sa = Mat(W[j].lam.asDiagonal()) + s_aff * dSh_a[j];
      mu_aff += (xa.cwiseProduct(sa)).sum();
    }
    mu_aff /= total_dim;
    Real sigma = mu_aff / mu;
    sigma = std::clamp(sigma * sigma * sigma, Real(0), Real(1));

    // Corrector with the Mehrotra second-order term.
    for (int j = 0; j < nb; ++j) {
      const Vec& lam = W[j].lam;
      Mat rhs = -dXh_a[j] * dSh_a[j];
      rhs = ((rhs + rhs.transpose()) / 2).eval();
      rhs += sigma * mu * Mat::Identity(lam.size(), lam.size());
      rhs -= Mat(lam.cwiseProduct(lam).asDiagonal());
      for (int a = 0; a < lam.size(); ++a)
        for (int b = 0; b < lam.size(); ++b) rhs(a, b) *= 2 / (lam[a] + lam[b]);
      K[j] = rhs;
    }
    Vec dz;
    std::vector<Mat> dXh, dSh;
    newton(K, dz, dXh, dSh);

    ax = Real(1e18);
    as = Real(1e18);
    for (int j = 0; j < nb; ++j) {
      ax = std::min(ax, max_step(W[j].lam, dXh[j]));
      as = std::min(as, max_step(W[j].lam, dSh[j]));
    }
    Real tau = Real(0.98);
    if (relgap < 1e-4) tau = Real(0.995);
    if (relgap < 1e-8) tau = Real(0.999);
    Real astep = std::min(Real(1), tau * ax);
    Real sstep = std::min(Real(1), tau * as);
    if (astep < 1e-5 && sstep < 1e-5) {
      // Retry as a pure centering step before declaring a stall.
      for (int j = 0; j < nb; ++j) {
        const Vec& lam = W[j].lam;
        Mat rhs = mu * Mat::Identity(lam.size(), lam.size());
        rhs -= Mat(lam.cwiseProduct(lam).asDiagonal());
        for (int a = 0; a < lam.size(); ++a)
          for (int b = 0; b < lam.size(); ++b) rhs(a, b) *= 2 / (lam[a] + lam[b]);
        K[j] = rhs;
      }
      newton(K, dz, dXh, dSh);
      ax = as = Real(1e18);
      for (int j = 0; j < nb; ++j) {
        ax = std::min(ax, max_step(W[j].lam, dXh[j]));
        as = std::min(as, max_step(W[j].lam, dSh[j]));
      }
      astep = std::min(Real(1), Real(0.9) * ax);
      sstep = std::min(Real(1), Real(0.9) * as);
      if (astep < 1e-5 && sstep < 1e-5) {
        note = "stalled: step sizes vanished";
        break;
      }
    }

    for (int j = 0; j < nb; ++j) {
      Mat dX = W[j].G * dXh[j] * W[j].G.transpose();
      Mat dS = W[j].Ginv.transpose() * dSh[j] * W[j].Ginv;
      X[j] += astep * ((dX + dX.transpose()) / 2);
      S[j] += sstep * ((dS + dS.transpose()) / 2);
    }
    z += sstep * dz;
  }

  return finish(best_z, best_X, best_gap, best_rp, best_rd, iter, note);
}

std::vector<SdpBlock> hankel_blocks(int degree, int num_vars, int offset) {
  require(degree >= 0 && offset >= 0 && offset + degree < num_vars,
          "hankel_blocks: variable range out of bounds");
  auto zero_block = [&](int dim) {
    SdpBlock b;
    b.f0 = Eigen::MatrixXd::Zero(dim, dim);
    b.coeff.assign(num_vars, Eigen::MatrixXd::Zero(dim, dim));
    return b;
  };
  std::vector<SdpBlock> out;
  if (degree % 2 == 0) {
    const int e = degree / 2;
    SdpBlock b1 = zero_block(e + 1);
    for (int i = 0; i <= e; ++i)
      for (int j = 0; j <= e; ++j) b1.coeff[offset + i + j](i, j) += 1.0;
    out.push_back(std::move(b1));
    if (e > 0) {
      SdpBlock b2 = zero_block(e);
      for (int i = 0; i < e; ++i)
        for (int j = 0; j < e; ++j) {
          b2.coeff[offset + i + j + 1](i, j) += 1.0;
          b2.coeff[offset + i + j + 2](i, j) -= 1.0;
        }
      out.push_back(std::move(b2));
    }
  } else {
    const int e = (degree - 1) / 2;
    SdpBlock b1 = zero_block(e + 1);
    SdpBlock b2 = zero_block(e + 1);
    for (int i = 0; i <= e; ++i)
      for (int j = 0; j <= e; ++j) {
        b1.coeff[offset + i + j + 1](i, j) += 1.0;
        b2.coeff[offset + i + j](i, j) += 1.0;
        b2.coeff[offset + i + j + 1](i, j) -= 1.0;
      }
    out.push_back(std::move(b1));
    out.push_back(std::move(b2));
  }
  return out;
}

FeasibilityResult feasibility(const std::vector<SdpBlock>& blocks,
                              const std::vector<std::pair<Eigen::VectorXd, double>>& equalities,
                              std::optional<Eigen::VectorXd> initial_x, const SolverOptions& opts) {
  require(!blocks.empty(), "feasibility: at least one block required");
  const int n = static_cast<int>(blocks.front().coeff.size());
  for (const SdpBlock& b : blocks)
    require(static_cast<int>(b.coeff.size()) == n, "feasibility: inconsistent variable counts");

  SdpProblem p;
  p.num_vars = n + 1;  // shift variable t appended last
  p.objective = Eigen::VectorXd::Zero(n + 1);
  p.objective[n] = 1.0;
  for (const SdpBlock& b : blocks) {
    SdpBlock aug;
    aug.f0 = b.f0;
    aug.coeff = b.coeff;
    aug.coeff.push_back(Eigen::MatrixXd::Identity(b.dim(), b.dim()));
    p.blocks.push_back(std::move(aug));
  }
  for (const auto& [a, rhs] : equalities) {
    Eigen::VectorXd row = Eigen::VectorXd::Zero(n + 1);
    row.head(n) = a;
    p.equalities.emplace_back(row, rhs);
  }

  Eigen::VectorXd x0 = initial_x ? *initial_x : Eigen::VectorXd::Zero(n);
  require(x0.size() == n, "feasibility: initial point dimension mismatch");
  double deficit = 0.0;
  for (const SdpBlock& b : blocks) {
    Eigen::MatrixXd F = b.f0;
    for (int i = 0; i < n; ++i) F += x0[i] * b.coeff[i];
    deficit = std::max(deficit, -psd_min_eig((F + F.transpose()) / 2));
  }
  Eigen::VectorXd init(n + 1);
  init.head(n) = x0;
  init[n] = 2.0 * std::max(0.0, deficit) + 0.1;
  p.initial_x = init;

  FeasibilityResult out;
  out.solution = solve(p, opts);
  const double t_star = out.solution.x[n];
  out.margin = -t_star;
  out.feasible = t_star <= opts.feas_tol;
  out.x = out.solution.x.head(n);
  out.dual_blocks = out.solution.dual_blocks;
  return out;
}

namespace {

Eigen::VectorXd lebesgue_like(int degree, double scale) {
  Eigen::VectorXd v(degree + 1);
  for (int j = 0; j <= degree; ++j) v[j] = scale / (j + 1);
  return v;
}

MembershipResult single_exponent_membership(const MomentVector& m, const SolverOptions& opts) {
  // |A| = 1: the cone is just m >= 0.
  MembershipResult res;
  const double v = m.values[0];
  const double tol = opts.feas_tol * (1.0 + std::abs(v));
  res.margin = v;
  res.min_eigenvalues = {v, v};
  if (v > tol)
    res.decision = Membership::inside;
  else if (v < -tol)
    res.decision = Membership::outside;
  else
    res.decision = Membership::boundary;
  return res;
}

// Shared tail of the membership wrappers: run feasibility, classify, and
// attach certificates computed from the witness completion / dual blocks.
MembershipResult classify(const std::vector<SdpBlock>& blocks,
                          const std::vector<std::pair<Eigen::VectorXd, double>>& equalities,
                          const Eigen::VectorXd& init, int degree,
                          const std::vector<int>& pinned_vars, const SolverOptions& opts,
                          SdpSolution* diagnostics) {
  FeasibilityResult fr = feasibility(blocks, equalities, init, opts);
  if (diagnostics) *diagnostics = fr.solution;

  MembershipResult res;
  res.margin = fr.margin;

  std::vector<double> vals(fr.x.data(), fr.x.data() + degree + 1);
  const MomentVector completion(ExponentSet::consecutive(degree), vals);
  const HankelPair hp = hankel_pair(completion);
  res.min_eigenvalues = {psd_min_eig(hp.h1), psd_min_eig(hp.h2)};

  if (fr.margin > opts.feas_tol) {
    res.decision = Membership::inside;
  } else if (fr.margin < -opts.feas_tol) {
    res.decision = Membership::outside;
    // Separating functional on the pinned coordinates from the dual blocks.
    std::vector<double> func;
    for (int var : pinned_vars) {
      double acc = 0.0;
      for (size_t j = 0; j < blocks.size(); ++j)
        acc += (blocks[j].coeff[var].cwiseProduct(fr.dual_blocks[j])).sum();
      func.push_back(acc);
    }
    res.certificate_functional = std::move(func);
  } else {
    res.decision = Membership::boundary;
    try {
      res.certificate_atoms = extract_atoms(completion);
    } catch (const std::exception& e) {
      res.message = e.what();
    }
  }
  return res;
}

}  // namespace

MembershipResult projected_membership(const MomentVector& m, const SolverOptions& opts,
                                      SdpSolution* diagnostics) {
  if (m.size() == 1) return single_exponent_membership(m, opts);

  const MomentVector mb = base_shift(m);
  const ExponentSet& B = mb.exponent_set;
  const int d = B.degree();
  const int nv = d + 1;

  std::vector<SdpBlock> blocks = hankel_blocks(d, nv);
  std::vector<std::pair<Eigen::VectorXd, double>> eqs;
  std::vector<int> pinned;
  for (int i = 0; i < B.size(); ++i) {
    Eigen::VectorXd row = Eigen::VectorXd::Zero(nv);
    row[B.exponents()[i]] = 1.0;
    eqs.emplace_back(row, mb.values[i]);
    pinned.push_back(B.exponents()[i]);
  }

  Eigen::VectorXd init = lebesgue_like(d, std::max(1e-3, mb.values[0]));
  for (int i = 0; i < B.size(); ++i) init[B.exponents()[i]] = mb.values[i];

  return classify(blocks, eqs, init, d, pinned, opts, diagnostics);
}

MembershipResult monotone_membership(const MomentVector& m, Monotone direction,
                                     const SolverOptions& opts, SdpSolution* diagnostics) {
  require(direction != Monotone::none, "monotone_membership: direction must be up or down");
  const ExponentSet& A = m.exponent_set;

  if (direction == Monotone::down) {
    // gamma_down coordinates: m_{a-min(A)} / (a+1) for a in A.
    const ExponentSet B = A.base_shift();
    const int d = B.degree();
    if (d == 0) {
      // Single-point curve: the cone is the ray of (1/(a+1))_a.
      MomentVector scaled(ExponentSet({0}), {m.values[0] * (A.min_exp() + 1)});
      return single_exponent_membership(scaled, opts);
    }
    const int nv = d + 1;
    std::vector<SdpBlock> blocks = hankel_blocks(d, nv);
    std::vector<std::pair<Eigen::VectorXd, double>> eqs;
    std::vector<int> pinned;
    for (int i = 0; i < A.size(); ++i) {
      const int a = A.exponents()[i];
      Eigen::VectorXd row = Eigen::VectorXd::Zero(nv);
      row[a - A.min_exp()] = 1.0;
      eqs.emplace_back(row, (a + 1.0) * m.values[i]);
      pinned.push_back(a - A.min_exp());
    }
    Eigen::VectorXd init = lebesgue_like(d, std::max(1e-3, (A.min_exp() + 1.0) * m.values[0]));
    return classify(blocks, eqs, init, d, pinned, opts, diagnostics);
  }

  // gamma_up coordinates: (1/(a+1)) sum_{j<=a} m_j for a in A.
  const int d = A.degree();
  const int nv = d + 1;
  std::vector<SdpBlock> blocks = hankel_blocks(d, nv);
  std::vector<std::pair<Eigen::VectorXd, double>> eqs;
  std::vector<int> pinned;
  for (int i = 0; i < A.size(); ++i) {
    const int a = A.exponents()[i];
    Eigen::VectorXd row = Eigen::VectorXd::Zero(nv);
    for (int j = 0; j <= a; ++j) row[j] = 1.0;
    eqs.emplace_back(row, (a + 1.0) * m.values[i]);
    pinned.push_back(a);
  }
  Eigen::VectorXd init = lebesgue_like(d, std::max(1e-3, m.values[0]));
  return classify(blocks, eqs, init, d, pinned, opts, diagnostics);
}

NearestPointResult nearest_point(const std::vector<double>& p, const ExponentSet& A,
                                 bool sum_to_one, const SolverOptions& opts) {
  require(static_cast<int>(p.size()) == A.size(), "nearest_point: |p| = |A| required");
  const int d = A.degree();
  const int na = A.size();
  const int nv = d + 2;       // m_0..m_d and lambda
  const int lam_idx = d + 1;

  SdpProblem prob;
  prob.num_vars = nv;
  prob.objective = Eigen::VectorXd::Zero(nv);
  prob.objective[lam_idx] = 1.0;
  prob.blocks = hankel_blocks(d, nv);

  // Arrow block [[lambda, x - p], [(x - p)^T, I]].
  SdpBlock arrow;
  arrow.f0 = Eigen::MatrixXd::Zero(na + 1, na + 1);
  arrow.f0.bottomRightCorner(na, na).setIdentity();
  for (int i = 0; i < na; ++i) {
    arrow.f0(0, i + 1) = -p[i];
    arrow.f0(i + 1, 0) = -p[i];
  }
  arrow.coeff.assign(nv, Eigen::MatrixXd::Zero(na + 1, na + 1));
  for (int i = 0; i < na; ++i) {
    Eigen::MatrixXd& c = arrow.coeff[A.exponents()[i]];
    c(0, i + 1) += 1.0;
    c(i + 1, 0) += 1.0;
  }
  arrow.coeff[lam_idx](0, 0) = 1.0;
  prob.blocks.push_back(std::move(arrow));

  if (sum_to_one) {
    Eigen::VectorXd row = Eigen::VectorXd::Zero(nv);
    for (int a : A.exponents()) row[a] = 1.0;
    prob.equalities.emplace_back(row, 1.0);
  }

  double scale = 1.0;
  if (sum_to_one) {
    double s = 0.0;
    for (int a : A.exponents()) s += 1.0 / (a + 1);
    scale = 1.0 / s;
  }
  Eigen::VectorXd init(nv);
  init.head(d + 1) = lebesgue_like(d, scale);
  double dist2 = 0.0;
  for (int i = 0; i < na; ++i) {
    const double diff = init[A.exponents()[i]] - p[i];
    dist2 += diff * diff;
  }
  init[lam_idx] = 2.0 * dist2 + 1.0;
  prob.initial_x = init;

  NearestPointResult out{MomentVector(A, std::vector<double>(na, 0.0)), 0.0, solve(prob, opts)};
  for (int i = 0; i < na; ++i) out.projection.values[i] = out.solution.x[A.exponents()[i]];
  out.distance = std::sqrt(std::max(0.0, out.solution.x[lam_idx]));
  return out;
}

}  // namespace stepmoments::sdp
