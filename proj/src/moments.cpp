#include "stepmoments/moments.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace stepmoments {

namespace {

constexpr double kZeroWidth = 1e-15;

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

bool is_finite(double x) { return std::isfinite(x); }

}  // namespace

double pow_int(double t, long long a) {
  if (a <= 0) return 1.0;
  double base = t;
  double acc = 1.0;
  long long e = a;
  while (e > 0) {
    if (e & 1) acc *= base;
    base *= base;
    e >>= 1;
  }
  return acc;
}

ExponentSet::ExponentSet(std::vector<int> exponents) : exps_(std::move(exponents)) {
  require(!exps_.empty(), "ExponentSet: at least one exponent required");
  require(exps_.front() >= 0, "ExponentSet: exponents must be nonnegative");
  for (size_t i = 1; i < exps_.size(); ++i)
    require(exps_[i] > exps_[i - 1], "ExponentSet: exponents must be strictly increasing");
}

ExponentSet ExponentSet::consecutive(int degree) {
  require(degree >= 0, "ExponentSet::consecutive: degree must be >= 0");
  std::vector<int> e(degree + 1);
  for (int i = 0; i <= degree; ++i) e[i] = i;
  return ExponentSet(std::move(e));
}

bool ExponentSet::contains(int a) const {
  return std::binary_search(exps_.begin(), exps_.end(), a);
}

int ExponentSet::index_of(int a) const {
  auto it = std::lower_bound(exps_.begin(), exps_.end(), a);
  require(it != exps_.end() && *it == a, "ExponentSet: exponent not in set");
  return static_cast<int>(it - exps_.begin());
}

bool ExponentSet::is_consecutive() const {
  return exps_.front() == 0 && exps_.back() == size() - 1;
}

ExponentSet ExponentSet::base_shift() const {
  std::vector<int> shifted(exps_.size());
  const int m = min_exp();
  for (size_t i = 0; i < exps_.size(); ++i) shifted[i] = exps_[i] - m;
  return ExponentSet(std::move(shifted));
}

StepFunction::StepFunction(std::vector<double> bp, std::vector<double> h)
    : breakpoints(std::move(bp)), heights(std::move(h)) {
  require(heights.size() == breakpoints.size() + 1,
          "StepFunction: need one more height than breakpoints");
  double prev = 0.0;
  for (double s : breakpoints) {
    require(is_finite(s) && s >= 0.0 && s <= 1.0, "StepFunction: breakpoints must lie in [0,1]");
    require(s >= prev, "StepFunction: breakpoints must be sorted");
    prev = s;
  }
  for (double y : heights)
    require(is_finite(y) && y >= 0.0, "StepFunction: heights must be nonnegative");
}

double StepFunction::value_at(double x) const {
  require(x >= 0.0 && x <= 1.0, "StepFunction::value_at: x outside [0,1]");
  // First piece is closed at 0; later pieces are (s_{i-1}, s_i].
  size_t i = 0;
  while (i < breakpoints.size() && x > breakpoints[i]) ++i;
  return heights[i];
}

bool StepFunction::is_canonical() const {
  double prev = 0.0;
  for (double s : breakpoints) {
    if (s - prev <= kZeroWidth) return false;
    prev = s;
  }
  if (!breakpoints.empty() && 1.0 - breakpoints.back() <= kZeroWidth) return false;
  for (size_t i = 1; i < heights.size(); ++i)
    if (heights[i] == heights[i - 1]) return false;
  return true;
}

StepFunction canonicalize(const StepFunction& f) {
  // Pieces as (right edge, height); drop pieces of width <= kZeroWidth.
  std::vector<double> rights, hs;
  double left = 0.0;
  for (size_t i = 0; i < f.heights.size(); ++i) {
    const double right = (i < f.breakpoints.size()) ? f.breakpoints[i] : 1.0;
    if (right - left > kZeroWidth) {
      rights.push_back(right);
      hs.push_back(f.heights[i]);
      left = right;
    }
  }
  if (rights.empty()) {
    // Everything collapsed; keep the last height as the constant value.
    rights.push_back(1.0);
    hs.push_back(f.heights.back());
  }
  rights.back() = 1.0;  // trailing zero-width pieces folded into the last one

  // Merge runs of exactly equal height.
  std::vector<double> mr, mh;
  for (size_t i = 0; i < hs.size(); ++i) {
    if (!mh.empty() && hs[i] == mh.back()) {
      mr.back() = rights[i];
    } else {
      mr.push_back(rights[i]);
      mh.push_back(hs[i]);
    }
  }
  mr.pop_back();  // final right edge (1.0) is implicit
  return StepFunction(std::move(mr), std::move(mh));
}

PolytopePoint::PolytopePoint(std::vector<double> s_, std::vector<double> w_)
    : s(std::move(s_)), w(std::move(w_)) {
  require(w.size() == s.size() + 1, "PolytopePoint: need one more mass than cut points");
  double prev = 0.0;
  for (double si : s) {
    require(is_finite(si) && si >= 0.0 && si <= 1.0, "PolytopePoint: s must lie in [0,1]");
    require(si >= prev, "PolytopePoint: s must be sorted");
    prev = si;
  }
  for (double wi : w) require(is_finite(wi) && wi >= 0.0, "PolytopePoint: masses must be nonnegative");
}

PolytopePoint step_to_polytope(const StepFunction& f) {
  std::vector<double> w(f.heights.size());
  double left = 0.0;
  for (size_t i = 0; i < f.heights.size(); ++i) {
    const double right = (i < f.breakpoints.size()) ? f.breakpoints[i] : 1.0;
    w[i] = f.heights[i] * (right - left);
    left = right;
  }
  return PolytopePoint(f.breakpoints, std::move(w));
}

StepFunction polytope_to_step(const PolytopePoint& p, double tol) {
  std::vector<double> bp, hs;
  double left = 0.0;
  for (size_t i = 0; i < p.w.size(); ++i) {
    const double right = (i < p.s.size()) ? p.s[i] : 1.0;
    const double width = right - left;
    if (width <= tol) {
      if (p.w[i] > tol)
        throw std::invalid_argument(
            "polytope_to_step: positive mass on a zero-width piece has no step-function form");
      continue;  // zero-width, zero-mass piece: fold into its neighbor
    }
    if (!hs.empty()) bp.push_back(left);
    hs.push_back(p.w[i] / width);
    left = right;
  }
  if (hs.empty()) hs.push_back(0.0);
  return canonicalize(StepFunction(std::move(bp), std::move(hs)));
}

AtomicMeasure::AtomicMeasure(std::vector<Atom> a) : atoms(std::move(a)) {
  double prev = -1.0;
  for (const Atom& at : atoms) {
    require(is_finite(at.location) && at.location >= 0.0 && at.location <= 1.0,
            "AtomicMeasure: locations must lie in [0,1]");
    require(at.location > prev, "AtomicMeasure: locations must be strictly increasing");
    require(is_finite(at.weight) && at.weight > 0.0, "AtomicMeasure: weights must be positive");
    prev = at.location;
  }
}

double AtomicMeasure::total_mass() const {
  double s = 0.0;
  for (const Atom& at : atoms) s += at.weight;
  return s;
}

MomentVector::MomentVector(ExponentSet es, std::vector<double> v)
    : exponent_set(std::move(es)), values(std::move(v)) {
  require(static_cast<int>(values.size()) == exponent_set.size(),
          "MomentVector: one value per exponent required");
}

MomentVector moments_of_step(const StepFunction& f, const ExponentSet& A) {
  std::vector<double> vals(A.size(), 0.0);
  const auto& exps = A.exponents();
  double left = 0.0;
  for (size_t i = 0; i < f.heights.size(); ++i) {
    const double right = (i < f.breakpoints.size()) ? f.breakpoints[i] : 1.0;
    const double y = f.heights[i];
    if (y != 0.0) {
      for (size_t j = 0; j < exps.size(); ++j) {
        const long long a = exps[j];
        vals[j] += y * (pow_int(right, a + 1) - pow_int(left, a + 1)) / static_cast<double>(a + 1);
      }
    }
    left = right;
  }
  return MomentVector(A, std::move(vals));
}

MomentVector moments_of_polytope_point(const PolytopePoint& p, const ExponentSet& A) {
  const int d = A.degree();
  std::vector<double> vals(A.size(), 0.0);
  std::vector<double> h(d + 1);  // h[a] = sum_{j=0}^{a} x^j y^{a-j}
  double left = 0.0;
  for (size_t i = 0; i < p.w.size(); ++i) {
    const double right = (i < p.s.size()) ? p.s[i] : 1.0;
    const double wi = p.w[i];
    if (wi != 0.0) {
      // Recurrence h_a = x^a + y h_{a-1}; all terms nonnegative, so stable
      // through the degenerate x == y case (where h_a = (a+1) x^a).
      double xpow = 1.0;
      h[0] = 1.0;
      for (int a = 1; a <= d; ++a) {
        xpow *= right;
        h[a] = xpow + left * h[a - 1];
      }
      const auto& exps = A.exponents();
      for (size_t j = 0; j < exps.size(); ++j)
        vals[j] += wi * h[exps[j]] / static_cast<double>(exps[j] + 1);
    }
    left = right;
  }
  return MomentVector(A, std::move(vals));
}

MomentVector moment_curve(double t, const ExponentSet& A) {
  require(std::isfinite(t) && t >= 0.0 && t <= 1.0, "moment_curve: t outside [0,1]");
  std::vector<double> vals(A.size());
  for (int j = 0; j < A.size(); ++j) vals[j] = pow_int(t, A.exponents()[j]);
  return MomentVector(A, std::move(vals));
}

MomentVector gamma_up(double t, const ExponentSet& A) {
  require(std::isfinite(t) && t >= 0.0 && t <= 1.0, "gamma_up: t outside [0,1]");
  std::vector<double> vals(A.size());
  // Running partial sums of powers: sum_{i=0}^{a} t^i.
  double acc = 1.0, pw = 1.0;
  int next = 0;
  for (int a = 0; a <= A.degree(); ++a) {
    if (a > 0) {
      pw *= t;
      acc += pw;
    }
    if (next < A.size() && A.exponents()[next] == a) {
      vals[next] = acc / static_cast<double>(a + 1);
      ++next;
    }
  }
  return MomentVector(A, std::move(vals));
}

MomentVector gamma_down(double t, const ExponentSet& A) {
  require(std::isfinite(t) && t >= 0.0 && t <= 1.0, "gamma_down: t outside [0,1]");
  std::vector<double> vals(A.size());
  const int m = A.min_exp();
  for (int j = 0; j < A.size(); ++j) {
    const int a = A.exponents()[j];
    vals[j] = pow_int(t, a - m) / static_cast<double>(a + 1);
  }
  return MomentVector(A, std::move(vals));
}

MomentVector base_shift(const MomentVector& m) {
  return MomentVector(m.exponent_set.base_shift(), m.values);
}

MomentVector moments_of_atoms(const AtomicMeasure& mu, const ExponentSet& A) {
  std::vector<double> vals(A.size(), 0.0);
  for (const auto& at : mu.atoms)
    for (int j = 0; j < A.size(); ++j)
      vals[j] += at.weight * pow_int(at.location, A.exponents()[j]);
  return MomentVector(A, std::move(vals));
}

}  // namespace stepmoments
