#include "stepmoments/oracle.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <stdexcept>
#include <thread>

#include "stepmoments/hankel.hpp"
#include "stepmoments/nnls.hpp"

namespace stepmoments::oracle {

namespace {

constexpr double kSumRowWeight = 1e6;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::vector<double> project_sorted(std::vector<double> s) {
  for (double& v : s) v = std::clamp(v, 0.0, 1.0);
  std::sort(s.begin(), s.end());
  return s;
}

// Column entries and their derivatives for one piece of the fit basis.
//   general: h_a(right, left) / (a+1)      (mass basis)
//   up:      (1 - left^{a+1}) / (a+1)      (indicator (left, 1])
//   down:    right^{a+1} / (a+1)           (indicator [0, right])
struct FitContext {
  std::vector<int> exps;
  int degree = 0;
  Eigen::VectorXd target;  // |A| entries, plus the weighted sum row if sum_one
  Eigen::VectorXd target_plain;
  Monotone mode = Monotone::none;
  bool sum_one = false;
  int k = 0;

  int rows() const { return static_cast<int>(exps.size()) + (sum_one ? 1 : 0); }

  void column(double left, double right, int piece, Eigen::Ref<Eigen::VectorXd> col) const {
    const int na = static_cast<int>(exps.size());
    if (mode == Monotone::up) {
      for (int i = 0; i < na; ++i)
        col[i] = (1.0 - pow_int(left, exps[i] + 1)) / (exps[i] + 1.0);
    } else if (mode == Monotone::down) {
      for (int i = 0; i < na; ++i) col[i] = pow_int(right, exps[i] + 1) / (exps[i] + 1.0);
    } else {
      // h_a = right^a + left * h_{a-1}
      double h = 1.0, rp = 1.0;
      int next = 0;
      for (int a = 0; a <= degree; ++a) {
        if (a > 0) {
          rp *= right;
          h = rp + left * h;
        }
        if (next < na && exps[next] == a) {
          col[next] = h / (a + 1.0);
          ++next;
        }
      }
    }
    (void)piece;
    if (sum_one) col[na] = kSumRowWeight * col.head(na).sum();
  }

  Eigen::MatrixXd columns(const std::vector<double>& s) const {
    Eigen::MatrixXd V(rows(), k + 1);
    for (int p = 0; p <= k; ++p) {
      const double left = (p == 0) ? 0.0 : s[p - 1];
      const double right = (p == k) ? 1.0 : s[p];
      column(left, right, p, V.col(p));
    }
    return V;
  }

  // Residual of the best nonnegative coefficients at fixed cut points.
  double eval(const std::vector<double>& s, Eigen::VectorXd* coef_out) const {
    const Eigen::MatrixXd V = columns(s);
    NnlsResult fit = nnls(V, target);
    if (coef_out) *coef_out = fit.x;
    const int na = static_cast<int>(exps.size());
    return (V.topRows(na) * fit.x - target_plain).norm();
  }

  // Coefficients -> (s, w) parameter point.
  PolytopePoint to_polytope(const std::vector<double>& s, const Eigen::VectorXd& coef) const {
    std::vector<double> w(k + 1, 0.0);
    if (mode == Monotone::none) {
      for (int p = 0; p <= k; ++p) w[p] = std::max(0.0, coef[p]);
    } else {
      for (int p = 0; p <= k; ++p) {
        double y = 0.0;
        if (mode == Monotone::up)
          for (int j = 0; j <= p; ++j) y += coef[j];
        else
          for (int j = p; j <= k; ++j) y += coef[j];
        const double left = (p == 0) ? 0.0 : s[p - 1];
        const double right = (p == k) ? 1.0 : s[p];
        w[p] = std::max(0.0, y * (right - left));
      }
    }
    return PolytopePoint(s, std::move(w));
  }
};

// d/dx of h_a(x, y): D_a = a x^{a-1} + y D_{a-1}.
void dh_dx(int degree, const std::vector<int>& exps, double x, double y,
           Eigen::Ref<Eigen::VectorXd> out) {
  const int na = static_cast<int>(exps.size());
  double D = 0.0, xp = 1.0;  // xp = x^{a-1}
  int next = 0;
  for (int a = 0; a <= degree; ++a) {
    if (a > 0) {
      D = a * xp + y * D;
      xp *= x;
    }
    if (next < na && exps[next] == a) {
      out[next] = D;
      ++next;
    }
  }
}

struct LocalResult {
  double residual = std::numeric_limits<double>::infinity();
  std::vector<double> s;
  Eigen::VectorXd coef;
  bool converged = false;
};

// Nelder-Mead over the raw cut-point coordinates (projection inside the
// objective keeps it well defined on all of R^k).
LocalResult nelder_mead(const FitContext& ctx, std::vector<double> start, int max_eval) {
  const int k = ctx.k;
  LocalResult out;
  if (k == 0) {
    out.s = {};
    out.residual = ctx.eval(out.s, &out.coef);
    out.converged = true;
    return out;
  }

  struct Vertex {
    std::vector<double> x;
    double f;
  };
  auto feval = [&](const std::vector<double>& x) { return ctx.eval(project_sorted(x), nullptr); };

  std::vector<Vertex> simplex;
  simplex.push_back({start, feval(start)});
  for (int i = 0; i < k; ++i) {
    std::vector<double> v = start;
    v[i] += (v[i] > 0.5) ? -0.12 : 0.12;
    simplex.push_back({v, feval(v)});
  }
  int evals = k + 1;

  auto order = [&] {
    std::sort(simplex.begin(), simplex.end(),
              [](const Vertex& a, const Vertex& b) { return a.f < b.f; });
  };
  order();

  while (evals < max_eval) {
    const double spread = simplex.back().f - simplex.front().f;
    if (spread <= 1e-14 * (1.0 + std::abs(simplex.front().f))) {
      out.converged = true;
      break;
    }
    std::vector<double> centroid(k, 0.0);
    for (int v = 0; v < k; ++v)
      for (int i = 0; i < k; ++i) centroid[i] += simplex[v].x[i] / k;

    auto combine = [&](double t) {
      std::vector<double> p(k);
      for (int i = 0; i < k; ++i) p[i] = centroid[i] + t * (simplex[k].x[i] - centroid[i]);
      return p;
    };

    std::vector<double> xr = combine(-1.0);
    const double fr = feval(xr);
    ++evals;
    if (fr < simplex[0].f) {
      std::vector<double> xe = combine(-2.0);
      const double fe = feval(xe);
      ++evals;
      simplex[k] = (fe < fr) ? Vertex{xe, fe} : Vertex{xr, fr};
    } else if (fr < simplex[k - 1].f) {
      simplex[k] = {xr, fr};
    } else {
      const bool outside = fr < simplex[k].f;
      std::vector<double> xc = combine(outside ? -0.5 : 0.5);
      const double fc = feval(xc);
      ++evals;
      if (fc < std::min(fr, simplex[k].f)) {
        simplex[k] = {xc, fc};
      } else {
        for (int v = 1; v <= k; ++v) {
          for (int i = 0; i < k; ++i)
            simplex[v].x[i] = simplex[0].x[i] + 0.5 * (simplex[v].x[i] - simplex[0].x[i]);
          simplex[v].f = feval(simplex[v].x);
          ++evals;
        }
      }
    }
    order();
  }

  out.s = project_sorted(simplex.front().x);
  out.residual = ctx.eval(out.s, &out.coef);
  return out;
}

// Gauss-Newton refinement on (cut points, coefficients) jointly, with
// projection back onto the feasible set after each step.
void gauss_newton_polish(const FitContext& ctx, LocalResult& r) {
  const int k = ctx.k;
  const int na = static_cast<int>(ctx.exps.size());
  const int nrows = ctx.rows();

  for (int pass = 0; pass < 8; ++pass) {
    const Eigen::MatrixXd V = ctx.columns(r.s);
    Eigen::VectorXd res = V * r.coef - ctx.target;
    const double rn = res.norm();
    if (rn < 1e-15 * (1.0 + ctx.target.norm())) break;

    Eigen::MatrixXd J(nrows, k + (k + 1));
    J.rightCols(k + 1) = V;
    for (int i = 0; i < k; ++i) {
      Eigen::VectorXd dcol = Eigen::VectorXd::Zero(nrows);
      Eigen::VectorXd tmp(na);
      if (ctx.mode == Monotone::up) {
        // s_i is the left edge of piece i+1.
        for (int a = 0; a < na; ++a) tmp[a] = -pow_int(r.s[i], ctx.exps[a]);
        dcol.head(na) = r.coef[i + 1] * tmp;
      } else if (ctx.mode == Monotone::down) {
        // s_i is the right edge of piece i.
        for (int a = 0; a < na; ++a) tmp[a] = pow_int(r.s[i], ctx.exps[a]);
        dcol.head(na) = r.coef[i] * tmp;
      } else {
        const double li = (i == 0) ? 0.0 : r.s[i - 1];
        const double ri1 = (i + 1 == k) ? 1.0 : r.s[i + 1];
        dh_dx(ctx.degree, ctx.exps, r.s[i], li, tmp);  // right edge of piece i
        for (int a = 0; a < na; ++a)
          dcol[a] += r.coef[i] * tmp[a] / (ctx.exps[a] + 1.0);
        dh_dx(ctx.degree, ctx.exps, r.s[i], ri1, tmp);  // left edge of piece i+1
        for (int a = 0; a < na; ++a)
          dcol[a] += r.coef[i + 1] * tmp[a] / (ctx.exps[a] + 1.0);
      }
      if (ctx.sum_one) dcol[na] = kSumRowWeight * dcol.head(na).sum();
      J.col(i) = dcol;
    }

    const Eigen::VectorXd step = J.colPivHouseholderQr().solve(-res);
    double scale = 1.0;
    bool accepted = false;
    for (int half = 0; half < 4 && !accepted; ++half, scale *= 0.5) {
      std::vector<double> s_new = r.s;
      for (int i = 0; i < k; ++i) s_new[i] += scale * step[i];
      s_new = project_sorted(s_new);
      Eigen::VectorXd c_new = r.coef + scale * step.tail(k + 1);
      c_new = c_new.cwiseMax(0.0);
      const Eigen::VectorXd res_new = ctx.columns(s_new) * c_new - ctx.target;
      if (res_new.norm() < rn) {
        r.s = std::move(s_new);
        r.coef = std::move(c_new);
        accepted = true;
      }
    }
    if (!accepted) break;
  }
  // Re-optimize the coefficients exactly at the final cut points.
  r.residual = ctx.eval(r.s, &r.coef);
}

std::vector<std::vector<double>> structured_starts(const FitContext& ctx, const MomentVector& m,
                                                   const FitOptions& opts) {
  const int k = ctx.k;
  std::vector<std::vector<double>> starts;
  if (k == 0) {
    starts.push_back({});
    return starts;
  }

  for (const auto& es : opts.extra_starts) {
    std::vector<double> s = es;
    s.resize(k, 1.0);
    starts.push_back(project_sorted(std::move(s)));
  }

  std::vector<double> equi(k);
  for (int i = 0; i < k; ++i) equi[i] = (i + 1.0) / (k + 1.0);
  starts.push_back(equi);

  // Support of a coarse grid fit.
  {
    GridFit gf = grid_membership(m, 401, ctx.sum_one);
    std::vector<std::pair<double, double>> atoms;  // (weight, location)
    for (int i = 0; i < gf.weights.size(); ++i)
      if (gf.weights[i] > 1e-12)
        atoms.emplace_back(gf.weights[i], static_cast<double>(i) / (gf.grid_size - 1));
    std::sort(atoms.rbegin(), atoms.rend());
    std::vector<double> s;
    for (const auto& [w, t] : atoms) {
      bool close = false;
      for (double v : s) close = close || std::abs(v - t) < 1e-3;
      if (!close) s.push_back(t);
      if (static_cast<int>(s.size()) == k) break;
    }
    while (static_cast<int>(s.size()) < k) s.push_back(equi[s.size()]);
    starts.push_back(project_sorted(std::move(s)));
  }

  // Near the boundary of the full cone, atom locations seed degenerate cuts.
  if (m.exponent_set.is_consecutive()) {
    try {
      MembershipResult fm = full_membership(m);
      if (fm.decision == Membership::boundary && fm.certificate_atoms) {
        std::vector<double> s;
        for (const auto& at : fm.certificate_atoms->atoms) {
          if (at.location <= 1e-9 || at.location >= 1.0 - 1e-9) {
            s.push_back(at.location);
          } else {
            s.push_back(at.location);
            s.push_back(at.location);
          }
        }
        s.resize(k, 1.0);
        starts.push_back(project_sorted(std::move(s)));
      }
    } catch (const std::exception&) {
      // certificate unavailable; skip the seed
    }
  }
  return starts;
}

LocalResult run_start(const FitContext& ctx, const std::vector<double>& start) {
  const int max_eval = 120 * ctx.k + 80;
  LocalResult r = nelder_mead(ctx, start, max_eval);
  gauss_newton_polish(ctx, r);
  return r;
}

bool lex_less(const LocalResult& a, const LocalResult& b) {
  if (a.residual != b.residual) return a.residual < b.residual;
  if (a.s != b.s) return a.s < b.s;
  for (int i = 0; i < std::min(a.coef.size(), b.coef.size()); ++i)
    if (a.coef[i] != b.coef[i]) return a.coef[i] < b.coef[i];
  return false;
}

std::vector<LocalResult> multi_start(const FitContext& ctx, const MomentVector& m,
                                     const FitOptions& opts) {
  std::vector<std::vector<double>> starts = structured_starts(ctx, m, opts);
  const int k = ctx.k;
  if (k > 0) {
    for (int i = 0; i < opts.starts; ++i) {
      std::mt19937_64 rng(splitmix64(opts.seed ^ (0x5151ULL + i)));
      std::uniform_real_distribution<double> unif(0.0, 1.0);
      std::vector<double> s(k);
      for (double& v : s) v = unif(rng);
      starts.push_back(project_sorted(std::move(s)));
    }
  }

  std::vector<LocalResult> results(starts.size());
  const int jobs = std::max(1, opts.jobs);
  if (jobs == 1 || starts.size() < 2) {
    for (size_t i = 0; i < starts.size(); ++i) results[i] = run_start(ctx, starts[i]);
  } else {
    std::vector<std::thread> pool;
    std::atomic<size_t> cursor{0};
    for (int t = 0; t < jobs; ++t)
      pool.emplace_back([&] {
        for (size_t i = cursor.fetch_add(1); i < starts.size(); i = cursor.fetch_add(1))
          results[i] = run_start(ctx, starts[i]);
      });
    for (auto& th : pool) th.join();
  }
  return results;
}

FitContext make_context(const MomentVector& m, int k, Monotone mode, bool sum_one) {
  if (k < 0) throw std::invalid_argument("best_fit_step: k must be >= 0");
  FitContext ctx;
  ctx.exps = m.exponent_set.exponents();
  ctx.degree = m.exponent_set.degree();
  ctx.mode = mode;
  ctx.sum_one = sum_one;
  ctx.k = k;
  ctx.target_plain = Eigen::Map<const Eigen::VectorXd>(m.values.data(), m.size());
  if (sum_one) {
    ctx.target.resize(m.size() + 1);
    ctx.target.head(m.size()) = ctx.target_plain;
    ctx.target[m.size()] = kSumRowWeight;
  } else {
    ctx.target = ctx.target_plain;
  }
  return ctx;
}

}  // namespace

GridFit grid_membership(const MomentVector& m, int grid_size, bool sum_one) {
  if (grid_size < 2) throw std::invalid_argument("grid_membership: grid_size must be >= 2");
  const int na = m.size();
  const int rows = na + (sum_one ? 1 : 0);
  Eigen::MatrixXd V(rows, grid_size);
  Eigen::VectorXd b(rows);
  for (int i = 0; i < grid_size; ++i) {
    const double t = static_cast<double>(i) / (grid_size - 1);
    for (int a = 0; a < na; ++a) V(a, i) = pow_int(t, m.exponent_set.exponents()[a]);
    if (sum_one) V(na, i) = kSumRowWeight * V.col(i).head(na).sum();
  }
  for (int a = 0; a < na; ++a) b[a] = m.values[a];
  if (sum_one) b[na] = kSumRowWeight;

  NnlsResult fit = nnls(V, b);
  GridFit out;
  out.weights = fit.x;
  out.grid_size = grid_size;
  out.residual =
      (V.topRows(na) * fit.x - Eigen::Map<const Eigen::VectorXd>(m.values.data(), na)).norm();
  return out;
}

FitResult best_fit_step(const MomentVector& m, int k, Monotone mode, const FitOptions& opts) {
  const FitContext ctx = make_context(m, k, mode, opts.sum_one);
  std::vector<LocalResult> results = multi_start(ctx, m, opts);

  const LocalResult* best = &results.front();
  bool any_converged = false;
  for (const LocalResult& r : results) {
    any_converged = any_converged || r.converged;
    if (lex_less(r, *best)) best = &r;
  }

  FitResult out;
  out.best = ctx.to_polytope(best->s, best->coef);
  out.residual = best->residual;
  out.starts_tried = static_cast<int>(results.size());
  out.converged = any_converged || ctx.k == 0;
  return out;
}

std::vector<PolytopePoint> fiber_sample(const MomentVector& m, int k, int count,
                                        const FitOptions& opts) {
  const FitContext ctx = make_context(m, k, Monotone::none, opts.sum_one);
  FitOptions wide = opts;
  wide.starts = std::max(opts.starts, 4 * count);
  std::vector<LocalResult> results = multi_start(ctx, m, wide);
  std::sort(results.begin(), results.end(), lex_less);

  std::vector<PolytopePoint> out;
  for (const LocalResult& r : results) {
    if (r.residual > 1e-6) break;  // sorted, so nothing fittable remains
    PolytopePoint p = ctx.to_polytope(r.s, r.coef);
    bool fresh = true;
    for (const PolytopePoint& q : out) {
      double dist = 0.0;
      for (int i = 0; i < k; ++i) dist = std::max(dist, std::abs(p.s[i] - q.s[i]));
      for (int i = 0; i <= k; ++i) dist = std::max(dist, std::abs(p.w[i] - q.w[i]));
      if (dist <= 1e-3) {
        fresh = false;
        break;
      }
    }
    if (fresh) out.push_back(std::move(p));
    if (static_cast<int>(out.size()) == count) break;
  }
  return out;
}

namespace {

// Random interior member of M(A): a constant component plus 1-3 narrow
// spikes standing in for atoms.
MomentVector random_member(const ExponentSet& A, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double spike_width = 1e-6;
  const int n_atoms = 1 + static_cast<int>(unif(rng) * 3.0);

  std::vector<double> centers;
  while (static_cast<int>(centers.size()) < n_atoms) {
    const double t = 0.01 + 0.96 * unif(rng);
    bool ok = true;
    for (double c : centers) ok = ok && std::abs(c - t) > 1e-4;
    if (ok) centers.push_back(t);
  }
  std::sort(centers.begin(), centers.end());

  const double base = 0.1 + 0.9 * unif(rng);  // constant component, mass >= 0.1
  std::vector<double> bp, hs;
  hs.push_back(base);
  for (double c : centers) {
    const double mass = 0.2 + 0.8 * unif(rng);
    bp.push_back(c);
    hs.push_back(base + mass / spike_width);
    bp.push_back(c + spike_width);
    hs.push_back(base);
  }
  return moments_of_step(StepFunction(std::move(bp), std::move(hs)), A);
}

MomentVector random_monotone_member(const ExponentSet& A, Monotone mode, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const int kk = A.size();
  std::vector<double> bp;
  while (static_cast<int>(bp.size()) < kk) {
    const double t = 0.02 + 0.96 * unif(rng);
    bool ok = true;
    for (double c : bp) ok = ok && std::abs(c - t) > 1e-3;
    if (ok) bp.push_back(t);
  }
  std::sort(bp.begin(), bp.end());
  std::vector<double> hs(kk + 1);
  double acc = 0.05 * unif(rng);
  for (int i = 0; i <= kk; ++i) {
    acc += 0.05 + unif(rng);
    hs[i] = acc;
  }
  if (mode == Monotone::down) std::reverse(hs.begin(), hs.end());
  return moments_of_step(StepFunction(std::move(bp), std::move(hs)), A);
}

// Boundary target of index exactly |A|-1: endpoint atom when the parity
// needs it, the rest interior.  Interior atoms sit in [0.6, 0.85], where
// the distance to the smaller budget is widest empirically.
MomentVector planted_boundary(const ExponentSet& A) {
  const int idx = A.size() - 1;
  const int b = idx % 2;
  const int i = (idx - b) / 2;
  std::vector<AtomicMeasure::Atom> atoms;
  if (b) atoms.push_back({0.0, 0.3});
  for (int j = 0; j < i; ++j)
    atoms.push_back({0.6 + 0.25 * j / std::max(1, i - 1), (1.0 - 0.3 * b) / i});
  return moments_of_atoms(AtomicMeasure(std::move(atoms)), A);
}

// Monotone target needing the full floor(|A|/2) budget: a combination of
// interior gamma-curve points.
MomentVector planted_monotone(const ExponentSet& A, Monotone mode) {
  const int km = A.size() / 2;
  const std::vector<double> ts = {0.35, 0.8, 0.15};
  std::vector<double> vals(A.size(), 0.0);
  for (int j = 0; j < std::max(1, km); ++j) {
    const MomentVector g = (mode == Monotone::up) ? gamma_up(ts[j % 3], A) : gamma_down(ts[j % 3], A);
    for (int i = 0; i < A.size(); ++i) vals[i] += g.values[i] / std::max(1, km);
  }
  return MomentVector(A, std::move(vals));
}

TheoremCase run_upper(const std::string& name, const ExponentSet& A, int k, Monotone mode,
                      int trials, const FitOptions& opts) {
  TheoremCase tc{name, A.exponents(), k, trials, 0.0, false};
  for (int t = 0; t < trials; ++t) {
    std::mt19937_64 rng(splitmix64(opts.seed ^ (0xABCDULL * (t + 1))));
    const MomentVector m = (mode == Monotone::none) ? random_member(A, rng)
                                                    : random_monotone_member(A, mode, rng);
    FitOptions fo = opts;
    fo.seed = splitmix64(opts.seed + t);
    const FitResult fr = best_fit_step(m, k, mode, fo);
    tc.max_residual = std::max(tc.max_residual, fr.residual);
  }
  tc.pass = tc.max_residual <= 1e-6;
  return tc;
}

TheoremCase run_lower(const std::string& name, const ExponentSet& A, int k, Monotone mode,
                      const MomentVector& target, const FitOptions& opts) {
  FitOptions fo = opts;
  fo.starts = std::max(opts.starts, 256);
  const FitResult fr = best_fit_step(target, k, mode, fo);
  TheoremCase tc{name, A.exponents(), k, 1, fr.residual, fr.residual >= 1e-4};
  return tc;
}

}  // namespace

TheoremReport theorem_suite(const ExponentSet& A, int trials, const FitOptions& opts) {
  TheoremReport rep;
  const int n = A.size();

  rep.cases.push_back(run_upper("MomentBound1", A, n - 1, Monotone::none, trials, opts));
  if (n >= 2)
    rep.cases.push_back(run_lower("MomentBound2", A, n - 2, Monotone::none, planted_boundary(A), opts));

  const int km = n / 2;
  if (km >= 1) {
    rep.cases.push_back(run_upper("MonotoneCone-up", A, km, Monotone::up, trials, opts));
    rep.cases.push_back(run_upper("MonotoneCone-down", A, km, Monotone::down, trials, opts));
    rep.cases.push_back(
        run_lower("monotoneLowerBound-up", A, km - 1, Monotone::up, planted_monotone(A, Monotone::up), opts));
    rep.cases.push_back(run_lower("monotoneLowerBound-down", A, km - 1, Monotone::down,
                                  planted_monotone(A, Monotone::down), opts));
  }
  for (const TheoremCase& tc : rep.cases) rep.pass = rep.pass && tc.pass;
  return rep;
}

}  // namespace stepmoments::oracle
