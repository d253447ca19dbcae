#ifndef STEPMOMENTS_MOMENTS_HPP
#define STEPMOMENTS_MOMENTS_HPP

#include <vector>
#include <string>

namespace stepmoments {

/// Integer power with the 0^0 = 1 convention, by repeated squaring.
double pow_int(double t, long long a);

/// Height-ordering constraint for monotone step-function cones.
enum class Monotone { none, up, down };

/// A finite set of nonnegative integer exponents, kept sorted strictly
/// increasing.  The "base shift" subtracts the smallest exponent so that
/// 0 is in the shifted set.
class ExponentSet {
public:
  explicit ExponentSet(std::vector<int> exponents);

  /// The consecutive set {0, 1, ..., degree}.
  static ExponentSet consecutive(int degree);

  const std::vector<int>& exponents() const { return exps_; }
  int min_exp() const { return exps_.front(); }
  int degree() const { return exps_.back(); }
  int size() const { return static_cast<int>(exps_.size()); }

  bool contains(int a) const;
  /// Position of exponent a within the set; throws if absent.
  int index_of(int a) const;
  /// True when the set is exactly {0, 1, ..., degree}.
  bool is_consecutive() const;

  ExponentSet base_shift() const;

  bool operator==(const ExponentSet& o) const { return exps_ == o.exps_; }

private:
  std::vector<int> exps_;
};

/// Nonnegative piecewise-constant density on [0,1].  Piece i takes value
/// heights[i] on (breakpoints[i-1], breakpoints[i]] with implicit endpoints
/// 0 and 1; the first piece is closed at 0.  Construction accepts weakly
/// sorted breakpoints in [0,1] (degenerate zero-width pieces allowed);
/// canonicalize() produces the strict form.
struct StepFunction {
  StepFunction(std::vector<double> breakpoints, std::vector<double> heights);

  std::vector<double> breakpoints;
  std::vector<double> heights;

  int num_breakpoints() const { return static_cast<int>(breakpoints.size()); }
  double value_at(double x) const;
  bool is_canonical() const;
};

/// Merges zero-width pieces (width <= 1e-15) and adjacent pieces of exactly
/// equal height.  Idempotent and moment-preserving.
StepFunction canonicalize(const StepFunction& f);

/// (s, w) parameterization of a step function: weakly sorted cut points
/// s_1 <= ... <= s_k in [0,1] and nonnegative piece masses w_1..w_{k+1},
/// w_i = y_i * (s_i - s_{i-1}).  Degenerate s_{i-1} = s_i is allowed and
/// corresponds to a point mass in the closure.
struct PolytopePoint {
  PolytopePoint(std::vector<double> s, std::vector<double> w);

  std::vector<double> s;
  std::vector<double> w;

  int num_breakpoints() const { return static_cast<int>(s.size()); }
};

/// Step function -> (s, w) with w_i the mass of piece i.
PolytopePoint step_to_polytope(const StepFunction& f);

/// (s, w) -> step function.  Requires positive width wherever w_i > tol;
/// zero-width pieces with (numerically) zero mass are dropped.
StepFunction polytope_to_step(const PolytopePoint& p, double tol = 1e-12);

/// Finitely supported nonnegative measure on [0,1]: strictly increasing
/// locations paired with strictly positive weights.
struct AtomicMeasure {
  struct Atom {
    double location;
    double weight;
  };

  explicit AtomicMeasure(std::vector<Atom> atoms);

  std::vector<Atom> atoms;

  int size() const { return static_cast<int>(atoms.size()); }
  double total_mass() const;
};

/// Moment coordinates (m_a)_{a in A} for an exponent set A.
struct MomentVector {
  MomentVector(ExponentSet exponent_set, std::vector<double> values);

  ExponentSet exponent_set;
  std::vector<double> values;

  int size() const { return static_cast<int>(values.size()); }
  double operator[](int i) const { return values[i]; }
  /// Value attached to exponent a (throws if a is not in the set).
  double at_exponent(int a) const { return values[exponent_set.index_of(a)]; }
};

/// Exact closed-form moments of a step function:
///   m_a = sum_i y_i (s_i^{a+1} - s_{i-1}^{a+1}) / (a+1).
MomentVector moments_of_step(const StepFunction& f, const ExponentSet& A);

/// Moments through the (s, w) parameterization,
///   m_a = sum_i w_i (s_i^a + s_i^{a-1} s_{i-1} + ... + s_{i-1}^a) / (a+1),
/// continuous on the closed polytope: a collapsed piece contributes
/// w_i * v_A(s_i) exactly.
MomentVector moments_of_polytope_point(const PolytopePoint& p, const ExponentSet& A);

/// The moment curve v_A(t) = (t^a)_{a in A}, t in [0,1], with 0^0 = 1.
MomentVector moment_curve(double t, const ExponentSet& A);

/// Moments of the normalized increasing indicator (1/(1-t)) 1_{(t,1]}:
///   (gamma_up(t))_a = (1/(a+1)) sum_{i=0}^{a} t^i.
MomentVector gamma_up(double t, const ExponentSet& A);

/// Moments of the normalized decreasing indicator (1/t^{min(A)+1}) 1_{[0,t]}:
///   (gamma_down(t))_a = t^{a - min(A)} / (a+1).
MomentVector gamma_down(double t, const ExponentSet& A);

/// Re-indexes the values by B = A - min(A); the identity when 0 is in A.
MomentVector base_shift(const MomentVector& m);

/// Moments of an atomic measure: sum_j w_j v_A(r_j).
MomentVector moments_of_atoms(const AtomicMeasure& mu, const ExponentSet& A);

}  // namespace stepmoments

#endif
