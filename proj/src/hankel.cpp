#include "stepmoments/hankel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "stepmoments/nnls.hpp"

namespace stepmoments {

namespace {

constexpr double kRootTol = 1e-7;
constexpr double kEndTol = 1e-9;

double psd_tol_for(const Eigen::MatrixXd& M) {
  const double tr = (M.size() > 0) ? std::abs(M.trace()) : 0.0;
  return 1e-9 * (1.0 + tr);
}

void check_consecutive(const MomentVector& m, const char* who) {
  if (!m.exponent_set.is_consecutive())
    throw std::invalid_argument(std::string(who) + ": consecutive exponents 0..d required");
}

// Convolution square conv_c = sum_{i+j=c} u_i u_j of the kernel vector,
// used to express u^T H(m) u as a linear functional of the moments.
std::vector<double> conv_square(const Eigen::VectorXd& u) {
  const int n = static_cast<int>(u.size());
  std::vector<double> c(2 * n - 1, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) c[i + j] += u[i] * u[j];
  return c;
}

// Coefficients p_c (c = 0..d) with u^T H u = sum_c p_c m_c for the given
// block of the pair.
std::vector<double> block_functional(const Eigen::VectorXd& u, bool even, bool first_block,
                                     int degree) {
  std::vector<double> p(degree + 1, 0.0);
  const std::vector<double> cs = conv_square(u);
  auto add = [&](int shift, double sign) {
    for (size_t c = 0; c < cs.size(); ++c) {
      const size_t idx = c + static_cast<size_t>(shift);
      if (idx <= static_cast<size_t>(degree)) p[idx] += sign * cs[c];
    }
  };
  if (even) {
    if (first_block) {
      add(0, 1.0);  // q(x)^2
    } else {
      add(1, 1.0);  // x (1-x) q(x)^2
      add(2, -1.0);
    }
  } else {
    if (first_block) {
      add(1, 1.0);  // x q(x)^2
    } else {
      add(0, 1.0);  // (1-x) q(x)^2
      add(1, -1.0);
    }
  }
  return p;
}

struct EigPair {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
};

EigPair sym_eig(const Eigen::MatrixXd& M) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
  if (es.info() != Eigen::Success) throw std::runtime_error("symmetric eigensolver failed");
  return {es.eigenvalues(), es.eigenvectors()};
}

// Real roots of the polynomial with coefficients c_0..c_deg via the
// companion matrix, keeping roots near [0,1].
std::vector<double> roots_in_unit_interval(Eigen::VectorXd coeffs) {
  // Strip negligible leading coefficients.
  int deg = static_cast<int>(coeffs.size()) - 1;
  const double scale = coeffs.cwiseAbs().maxCoeff();
  if (scale == 0.0) return {};
  while (deg > 0 && std::abs(coeffs[deg]) <= 1e-12 * scale) --deg;
  if (deg == 0) return {};

  Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(deg, deg);
  for (int i = 1; i < deg; ++i) comp(i, i - 1) = 1.0;
  for (int i = 0; i < deg; ++i) comp(i, deg - 1) = -coeffs[i] / coeffs[deg];

  Eigen::EigenSolver<Eigen::MatrixXd> es(comp);
  if (es.info() != Eigen::Success) throw std::runtime_error("companion eigensolver failed");

  std::vector<double> roots;
  for (int i = 0; i < deg; ++i) {
    const std::complex<double> z = es.eigenvalues()[i];
    if (std::abs(z.imag()) >= kRootTol) continue;
    double x = z.real();
    if (x < -kRootTol || x > 1.0 + kRootTol) continue;
    roots.push_back(std::clamp(x, 0.0, 1.0));
  }
  return roots;
}

Eigen::MatrixXd vandermonde(const std::vector<double>& nodes, int degree) {
  Eigen::MatrixXd V(degree + 1, static_cast<int>(nodes.size()));
  for (size_t j = 0; j < nodes.size(); ++j)
    for (int a = 0; a <= degree; ++a) V(a, static_cast<int>(j)) = pow_int(nodes[j], a);
  return V;
}

// Gauss-Newton on (interior locations, weights) against the full moment
// equations, in extended precision: clustered high-degree plants are
// ill-conditioned enough that double rounding alone costs ~1e-7 in the
// parameters.  Reverts any step that fails to reduce the residual.
void polish_atoms(std::vector<double>& locs, Eigen::VectorXd& w, const Eigen::VectorXd& target,
                  int degree) {
  using Real = long double;
  using MatL = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;
  using VecL = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

  const int na = static_cast<int>(locs.size());
  const VecL t = target.cast<Real>();
  auto powl_int = [](Real x, int a) {
    Real acc = 1.0L, base = x;
    for (int e = a; e > 0; e >>= 1, base *= base)
      if (e & 1) acc *= base;
    return acc;
  };
  auto residual = [&](const std::vector<Real>& r, const VecL& ww) {
    VecL res = -t;
    for (int j = 0; j < na; ++j)
      for (int a = 0; a <= degree; ++a) res[a] += ww[j] * powl_int(r[j], a);
    return res;
  };

  std::vector<Real> rl(locs.begin(), locs.end());
  VecL wl = w.cast<Real>();
  for (int pass = 0; pass < 8; ++pass) {
    const VecL res = residual(rl, wl);
    const Real rn = res.norm();
    if (rn < 1e-16L * (1.0L + t.norm())) break;
    std::vector<int> movable;
    for (int j = 0; j < na; ++j)
      if (rl[j] > kEndTol && rl[j] < 1.0L - kEndTol) movable.push_back(j);
    MatL J(degree + 1, na + static_cast<int>(movable.size()));
    for (int j = 0; j < na; ++j)
      for (int a = 0; a <= degree; ++a) J(a, j) = powl_int(rl[j], a);
    for (size_t jj = 0; jj < movable.size(); ++jj) {
      const int j = movable[jj];
      for (int a = 0; a <= degree; ++a)
        J(a, na + static_cast<int>(jj)) = (a == 0) ? Real(0) : wl[j] * a * powl_int(rl[j], a - 1);
    }
    const VecL step = J.colPivHouseholderQr().solve(-res);
    std::vector<Real> new_locs = rl;
    VecL new_w = wl;
    for (int j = 0; j < na; ++j) new_w[j] += step[j];
    for (size_t jj = 0; jj < movable.size(); ++jj)
      new_locs[movable[jj]] =
          std::clamp(new_locs[movable[jj]] + step[na + static_cast<int>(jj)], Real(0), Real(1));
    bool ok = std::is_sorted(new_locs.begin(), new_locs.end());
    for (int j = 0; ok && j < na; ++j)
      if (new_w[j] < 0.0L) ok = false;
    if (!ok) break;
    if (residual(new_locs, new_w).norm() < rn) {
      rl = std::move(new_locs);
      wl = std::move(new_w);
    } else {
      break;
    }
  }
  for (int j = 0; j < na; ++j) {
    locs[j] = static_cast<double>(rl[j]);
    w[j] = static_cast<double>(wl[j]);
  }
}

}  // namespace

HankelPair hankel_pair(const MomentVector& m) {
  check_consecutive(m, "hankel_pair");
  const int d = m.exponent_set.degree();
  HankelPair hp;
  hp.degree = d;
  hp.even = (d % 2 == 0);
  const auto& v = m.values;
  if (hp.even) {
    const int e = d / 2;
    hp.h1.resize(e + 1, e + 1);
    for (int i = 0; i <= e; ++i)
      for (int j = 0; j <= e; ++j) hp.h1(i, j) = v[i + j];
    hp.h2.resize(e, e);
    for (int i = 0; i < e; ++i)
      for (int j = 0; j < e; ++j) hp.h2(i, j) = v[i + j + 1] - v[i + j + 2];
  } else {
    const int e = (d - 1) / 2;
    hp.h1.resize(e + 1, e + 1);
    hp.h2.resize(e + 1, e + 1);
    for (int i = 0; i <= e; ++i)
      for (int j = 0; j <= e; ++j) {
        hp.h1(i, j) = v[i + j + 1];
        hp.h2(i, j) = v[i + j] - v[i + j + 1];
      }
  }
  return hp;
}

double psd_min_eig(const Eigen::MatrixXd& M) {
  if (M.rows() != M.cols()) throw std::invalid_argument("psd_min_eig: square matrix required");
  if (M.size() == 0) return std::numeric_limits<double>::infinity();
  const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
  if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw std::invalid_argument("psd_min_eig: matrix not symmetric within 1e-12");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw std::runtime_error("psd_min_eig: eigensolver failed");
  return es.eigenvalues().minCoeff();
}

std::string to_string(Membership m) {
  switch (m) {
    case Membership::inside: return "inside";
    case Membership::boundary: return "boundary";
    case Membership::outside: return "outside";
  }
  return "?";
}

MembershipResult full_membership(const MomentVector& m) {
  check_consecutive(m, "full_membership");
  const HankelPair hp = hankel_pair(m);
  const double e1 = psd_min_eig(hp.h1);
  const double e2 = psd_min_eig(hp.h2);
  const double tol1 = psd_tol_for(hp.h1);
  const double tol2 = psd_tol_for(hp.h2);

  MembershipResult res;
  res.min_eigenvalues = {e1, e2};
  res.margin = std::min(e1, e2);

  if (e1 > tol1 && e2 > tol2) {
    res.decision = Membership::inside;
    return res;
  }
  if (e1 < -tol1 || e2 < -tol2) {
    res.decision = Membership::outside;
    // Separating functional from the most negative block.
    const bool use_first = (e1 / std::max(tol1, 1e-300)) <= (e2 / std::max(tol2, 1e-300));
    const Eigen::MatrixXd& B = use_first ? hp.h1 : hp.h2;
    const EigPair ep = sym_eig(B);
    res.certificate_functional =
        block_functional(ep.vectors.col(0), hp.even, use_first, hp.degree);
    return res;
  }
  res.decision = Membership::boundary;
  try {
    res.certificate_atoms = extract_atoms(m);
  } catch (const std::exception& e) {
    res.message = e.what();
  }
  return res;
}

AtomicMeasure extract_atoms(const MomentVector& m) {
  check_consecutive(m, "extract_atoms");
  const HankelPair hp = hankel_pair(m);
  const int d = hp.degree;

  // Pick the kernel block: the numerically singular one, preferring the
  // larger block (more root capacity) when both qualify.
  struct Cand {
    const Eigen::MatrixXd* M;
    double rel_min;  // smallest |eig| relative to tolerance scale
    bool first;
  };
  std::vector<Cand> cands;
  for (int which = 0; which < 2; ++which) {
    const Eigen::MatrixXd& B = (which == 0) ? hp.h1 : hp.h2;
    if (B.size() == 0) continue;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(B, Eigen::EigenvaluesOnly);
    const double mn = es.eigenvalues().cwiseAbs().minCoeff();
    cands.push_back({&B, mn / psd_tol_for(B), which == 0});
  }
  if (cands.empty()) throw std::runtime_error("atom extraction failed: empty Hankel pair");
  const Cand* pick = &cands[0];
  for (const Cand& c : cands) {
    const bool c_sing = c.rel_min <= 1.0;
    const bool p_sing = pick->rel_min <= 1.0;
    if (c_sing && p_sing) {
      if (c.M->rows() > pick->M->rows()) pick = &c;
    } else if (c_sing != p_sing) {
      if (c_sing) pick = &c;
    } else if (c.rel_min < pick->rel_min) {
      pick = &c;
    }
  }

  const EigPair ep = sym_eig(*pick->M);
  int kmin = 0;
  for (int i = 1; i < ep.values.size(); ++i)
    if (std::abs(ep.values[i]) < std::abs(ep.values[kmin])) kmin = i;
  std::vector<double> roots = roots_in_unit_interval(ep.vectors.col(kmin));

  // The singular localizing blocks annihilate endpoint atoms, so 0 and 1
  // are always kept as weight candidates; NNLS zeroes them when absent.
  roots.push_back(0.0);
  roots.push_back(1.0);
  std::sort(roots.begin(), roots.end());
  std::vector<double> nodes;
  for (double r : roots)
    if (nodes.empty() || r - nodes.back() > 1e-8) nodes.push_back(r);

  const Eigen::VectorXd target = Eigen::Map<const Eigen::VectorXd>(m.values.data(), m.size());
  NnlsResult fit = nnls(vandermonde(nodes, d), target);

  // Keep meaningfully weighted atoms and refine them.
  const double drop_tol = 1e-10 * (1.0 + target.cwiseAbs().maxCoeff());
  std::vector<double> locs;
  std::vector<double> ws;
  for (size_t j = 0; j < nodes.size(); ++j) {
    if (fit.x[static_cast<int>(j)] > drop_tol) {
      locs.push_back(nodes[j]);
      ws.push_back(fit.x[static_cast<int>(j)]);
    }
  }
  Eigen::VectorXd w = Eigen::Map<Eigen::VectorXd>(ws.data(), static_cast<int>(ws.size()));
  if (!locs.empty()) polish_atoms(locs, w, target, d);

  const double resid = (vandermonde(locs, d) * w - target).norm();
  if (resid > 1e-8 * (1.0 + target.norm()))
    throw std::runtime_error("atom extraction failed: reconstruction residual " +
                             std::to_string(resid));

  std::vector<AtomicMeasure::Atom> atoms;
  for (size_t j = 0; j < locs.size(); ++j)
    if (w[static_cast<int>(j)] > 0.0) atoms.push_back({locs[j], w[static_cast<int>(j)]});
  return AtomicMeasure(std::move(atoms));
}

IndexReport index_of(const AtomicMeasure& mu) {
  IndexReport rep{mu, 0, 0, 0};
  for (const auto& at : mu.atoms) {
    if (at.location <= kEndTol || at.location >= 1.0 - kEndTol)
      ++rep.boundary_count;
    else
      ++rep.interior_count;
  }
  rep.index = rep.boundary_count + 2 * rep.interior_count;
  return rep;
}

double schur_det(const ExponentSet& A, const std::vector<double>& r) {
  if (A.min_exp() != 0) throw std::invalid_argument("schur_det: min(A) = 0 required");
  const int n = A.size();
  if (static_cast<int>(r.size()) != n)
    throw std::invalid_argument("schur_det: need |r| = |A| sample points");
  for (int j = 0; j < n; ++j) {
    if (!(r[j] >= 0.0 && r[j] <= 1.0))
      throw std::invalid_argument("schur_det: points must lie in [0,1]");
    if (j > 0 && !(r[j] > r[j - 1]))
      throw std::invalid_argument("schur_det: points must be strictly increasing");
  }

  // Gaussian elimination with partial pivoting in extended precision; the
  // determinant can be tiny relative to the entries for nearly coincident
  // points.
  std::vector<long double> M(static_cast<size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      M[static_cast<size_t>(i) * n + j] =
          static_cast<long double>(pow_int(r[j], A.exponents()[i]));
  long double det = 1.0L;
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int i = col + 1; i < n; ++i)
      if (fabsl(M[static_cast<size_t>(i) * n + col]) > fabsl(M[static_cast<size_t>(piv) * n + col]))
        piv = i;
    if (M[static_cast<size_t>(piv) * n + col] == 0.0L) return 0.0;
    if (piv != col) {
      for (int j = 0; j < n; ++j)
        std::swap(M[static_cast<size_t>(piv) * n + j], M[static_cast<size_t>(col) * n + j]);
      det = -det;
    }
    const long double p = M[static_cast<size_t>(col) * n + col];
    det *= p;
    for (int i = col + 1; i < n; ++i) {
      const long double f = M[static_cast<size_t>(i) * n + col] / p;
      for (int j = col; j < n; ++j)
        M[static_cast<size_t>(i) * n + j] -= f * M[static_cast<size_t>(col) * n + j];
    }
  }
  return static_cast<double>(det);
}

namespace {

// Number of semistandard Young tableaux of shape lambda with entries in
// 1..n, by the hook content formula; used as an enumeration size guard.
double ssyt_count(const std::vector<int>& lambda, int n) {
  std::vector<int> conj;  // conjugate partition
  if (!lambda.empty()) {
    conj.resize(lambda[0], 0);
    for (int row = 0; row < static_cast<int>(lambda.size()); ++row)
      for (int col = 0; col < lambda[row]; ++col) ++conj[col];
  }
  double count = 1.0;
  for (int i = 0; i < static_cast<int>(lambda.size()); ++i) {
    for (int j = 0; j < lambda[i]; ++j) {
      const int hook = (lambda[i] - j) + (conj[j] - i) - 1;
      count *= static_cast<double>(n + j - i) / hook;
    }
  }
  return count;
}

void ssyt_sum(const std::vector<int>& lambda, const std::vector<double>& r, int row, int col,
              std::vector<std::vector<int>>& fill, long double monomial, long double& total) {
  const int nrows = static_cast<int>(lambda.size());
  if (row == nrows) {
    total += monomial;
    return;
  }
  if (col == lambda[row]) {
    ssyt_sum(lambda, r, row + 1, 0, fill, monomial, total);
    return;
  }
  const int n = static_cast<int>(r.size());
  int lo = 1;
  if (col > 0) lo = std::max(lo, fill[row][col - 1]);            // weak along rows
  if (row > 0 && col < lambda[row - 1]) lo = std::max(lo, fill[row - 1][col] + 1);  // strict down
  for (int v = lo; v <= n; ++v) {
    fill[row][col] = v;
    ssyt_sum(lambda, r, row, col + 1, fill, monomial * static_cast<long double>(r[v - 1]), total);
  }
}

}  // namespace

BialternantCheck bialternant_check(const ExponentSet& A, const std::vector<double>& r) {
  BialternantCheck out;
  out.lhs = schur_det(A, r);

  const int n = A.size();
  std::vector<int> lambda(n);
  for (int i = 0; i < n; ++i) lambda[i] = A.exponents()[n - 1 - i] - (n - 1 - i);
  while (!lambda.empty() && lambda.back() == 0) lambda.pop_back();

  if (ssyt_count(lambda, n) > 5e7)
    throw std::invalid_argument("bialternant_check: tableau shape too large to enumerate");

  long double schur = 0.0L;
  if (lambda.empty()) {
    schur = 1.0L;
  } else {
    std::vector<std::vector<int>> fill(lambda.size());
    for (size_t i = 0; i < lambda.size(); ++i) fill[i].assign(lambda[i], 0);
    ssyt_sum(lambda, r, 0, 0, fill, 1.0L, schur);
  }

  long double vdm = 1.0L;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) vdm *= static_cast<long double>(r[j] - r[i]);

  out.rhs = static_cast<double>(vdm * schur);
  return out;
}

std::string matrix_csv(const Eigen::MatrixXd& M) {
  std::ostringstream os;
  os.precision(17);
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
      if (j) os << ',';
      os << M(i, j);
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace stepmoments
