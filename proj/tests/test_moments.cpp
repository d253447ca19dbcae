#include <doctest.h>

#include <cmath>
#include <random>

#include "quadrature.hpp"
#include "stepmoments/moments.hpp"

using namespace stepmoments;

namespace {

StepFunction random_step(std::mt19937_64& rng, int k) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> bp;
  while (static_cast<int>(bp.size()) < k) {
    const double t = 0.02 + 0.96 * unif(rng);
    bool ok = true;
    for (double b : bp) ok = ok && std::abs(b - t) > 1e-3;
    if (ok) bp.push_back(t);
  }
  std::sort(bp.begin(), bp.end());
  std::vector<double> hs(k + 1);
  for (double& h : hs) h = 3.0 * unif(rng);
  return StepFunction(bp, hs);
}

double quad_moment(const StepFunction& f, int a) {
  std::vector<double> cuts = f.breakpoints;
  return testsupport::integrate([&](double x) { return pow_int(x, a) * f.value_at(x); }, 0.0, 1.0,
                                cuts);
}

}  // namespace

TEST_CASE("pow_int conventions") {
  CHECK(pow_int(0.0, 0) == 1.0);
  CHECK(pow_int(0.0, 5) == 0.0);
  CHECK(pow_int(2.0, 10) == 1024.0);
  CHECK(pow_int(0.5, 3) == doctest::Approx(0.125).epsilon(1e-15));
}

TEST_CASE("ExponentSet invariants and shift") {
  CHECK_THROWS(ExponentSet({}));
  CHECK_THROWS(ExponentSet({2, 2}));
  CHECK_THROWS(ExponentSet({3, 1}));
  CHECK_THROWS(ExponentSet({-1, 0}));
  const ExponentSet A({2, 5, 9});
  CHECK(A.min_exp() == 2);
  CHECK(A.degree() == 9);
  CHECK(A.base_shift().exponents() == std::vector<int>{0, 3, 7});
  CHECK(ExponentSet::consecutive(3).is_consecutive());
  CHECK_FALSE(A.is_consecutive());
  CHECK(A.index_of(5) == 1);
  CHECK_THROWS(A.index_of(4));
}

TEST_CASE("moments of the constant density") {
  const StepFunction f({}, {1.0});
  const MomentVector m = moments_of_step(f, ExponentSet({0, 2, 5, 9}));
  CHECK(m.values[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(m.values[1] == doctest::Approx(1.0 / 3).epsilon(1e-15));
  CHECK(m.values[2] == doctest::Approx(1.0 / 6).epsilon(1e-15));
  CHECK(m.values[3] == doctest::Approx(1.0 / 10).epsilon(1e-15));
}

TEST_CASE("moments of a half-interval box") {
  const StepFunction f({0.5}, {2.0, 0.0});
  const MomentVector m = moments_of_step(f, ExponentSet({0, 1}));
  CHECK(m.values[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(m.values[1] == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("moments of the transformed example history") {
  // f = 1 on (0, e^-2], 3 on (e^-2, e^-1], 2 on (e^-1, 1]
  const StepFunction f({std::exp(-2.0), std::exp(-1.0)}, {1.0, 3.0, 2.0});
  const ExponentSet A({0, 2, 5, 9});
  const MomentVector m = moments_of_step(f, A);

  // Frozen from the independent quadrature oracle.
  const std::vector<double> expected = {2.0972088746982169, 0.68160985467151041,
                                        0.33374441062532662, 0.20000453958074552};
  for (int i = 0; i < 4; ++i) {
    CHECK(m.values[i] == doctest::Approx(expected[i]).epsilon(1e-13));
    const double q = quad_moment(f, A.exponents()[i]);
    CHECK(std::abs(m.values[i] - q) <= 1e-10 * std::abs(q));
  }
}

TEST_CASE("quadrature agreement on random step functions") {
  std::mt19937_64 rng(7);
  const ExponentSet A({0, 1, 3, 7, 12});
  for (int trial = 0; trial < 25; ++trial) {
    const StepFunction f = random_step(rng, 1 + trial % 4);
    const MomentVector m = moments_of_step(f, A);
    for (int i = 0; i < A.size(); ++i) {
      const double q = quad_moment(f, A.exponents()[i]);
      CHECK(std::abs(m.values[i] - q) <= 1e-10 * (1.0 + std::abs(q)));
    }
  }
}

TEST_CASE("moment linearity and monotone coordinates") {
  std::mt19937_64 rng(11);
  const ExponentSet A({0, 2, 5, 9});
  for (int trial = 0; trial < 20; ++trial) {
    const StepFunction f = random_step(rng, 2);
    const StepFunction g = random_step(rng, 3);

    // Pointwise sum as a step function on the merged breakpoints.
    std::vector<double> bp = f.breakpoints;
    bp.insert(bp.end(), g.breakpoints.begin(), g.breakpoints.end());
    std::sort(bp.begin(), bp.end());
    bp.erase(std::unique(bp.begin(), bp.end()), bp.end());
    std::vector<double> hs;
    for (size_t i = 0; i <= bp.size(); ++i) {
      const double left = (i == 0) ? 0.0 : bp[i - 1];
      const double right = (i == bp.size()) ? 1.0 : bp[i];
      const double mid = 0.5 * (left + right);
      hs.push_back(f.value_at(mid) + g.value_at(mid));
    }
    const MomentVector sum = moments_of_step(StepFunction(bp, hs), A);
    const MomentVector mf = moments_of_step(f, A);
    const MomentVector mg = moments_of_step(g, A);
    for (int i = 0; i < A.size(); ++i)
      CHECK(sum.values[i] == doctest::Approx(mf.values[i] + mg.values[i]).epsilon(1e-12));

    // Scaling by a nonnegative factor.
    StepFunction scaled = f;
    for (double& h : scaled.heights) h *= 2.5;
    const MomentVector ms = moments_of_step(scaled, A);
    for (int i = 0; i < A.size(); ++i)
      CHECK(ms.values[i] == doctest::Approx(2.5 * mf.values[i]).epsilon(1e-13));

    // x^a <= x^{a'} on [0,1] for a > a'.
    for (int i = 1; i < A.size(); ++i) CHECK(mf.values[i] <= mf.values[i - 1] + 1e-15);
  }
}

TEST_CASE("polytope-point moments match and extend the step formula") {
  const ExponentSet A01({0, 1});
  const MomentVector m1 = moments_of_polytope_point(PolytopePoint({0.5}, {1.0, 0.0}), A01);
  CHECK(m1.values[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(m1.values[1] == doctest::Approx(0.25).epsilon(1e-15));

  // Fully degenerate piece carries a point mass: w * v_A(t).
  const ExponentSet A({0, 2, 5, 9});
  const double t = 0.37;
  const MomentVector md = moments_of_polytope_point(PolytopePoint({t, t}, {0.0, 1.0, 0.0}), A);
  const MomentVector v = moment_curve(t, A);
  for (int i = 0; i < A.size(); ++i)
    CHECK(md.values[i] == doctest::Approx(v.values[i]).epsilon(1e-14));

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const ExponentSet A4({0, 1, 2, 3});
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<double> s = {unif(rng), unif(rng)};
    std::sort(s.begin(), s.end());
    if (s[0] < 1e-3 || s[1] - s[0] < 1e-3 || 1.0 - s[1] < 1e-3) continue;
    const std::vector<double> w = {unif(rng), unif(rng), unif(rng)};
    const PolytopePoint p(s, w);
    const MomentVector mp = moments_of_polytope_point(p, A4);
    const MomentVector ms = moments_of_step(polytope_to_step(p), A4);
    for (int i = 0; i < A4.size(); ++i)
      CHECK(std::abs(mp.values[i] - ms.values[i]) <= 1e-12);
  }
}

TEST_CASE("polytope-point moments are continuous at collapsing pieces") {
  const ExponentSet A({0, 2, 5, 9});
  const double t = 0.6;
  const MomentVector limit = moments_of_polytope_point(PolytopePoint({t, t}, {0.0, 1.0, 0.0}), A);
  for (double eps : {1e-4, 1e-6, 1e-8}) {
    const MomentVector near =
        moments_of_polytope_point(PolytopePoint({t - eps, t}, {0.0, 1.0, 0.0}), A);
    for (int i = 0; i < A.size(); ++i)
      CHECK(std::abs(near.values[i] - limit.values[i]) <= 20.0 * eps);
  }
}

TEST_CASE("moment curve endpoints and domain") {
  const ExponentSet A({0, 2, 5, 9});
  const MomentVector v1 = moment_curve(1.0, A);
  for (double x : v1.values) CHECK(x == 1.0);
  const MomentVector v0 = moment_curve(0.0, A);
  CHECK(v0.values == std::vector<double>{1.0, 0.0, 0.0, 0.0});
  const MomentVector vh = moment_curve(0.5, ExponentSet({0, 1, 2}));
  CHECK(vh.values[0] == 1.0);
  CHECK(vh.values[1] == 0.5);
  CHECK(vh.values[2] == 0.25);
  CHECK_THROWS(moment_curve(-0.1, A));
  CHECK_THROWS(moment_curve(1.1, A));
}

TEST_CASE("gamma curves") {
  const ExponentSet A({0, 2, 5, 9});
  const MomentVector g0 = gamma_up(0.0, A);
  CHECK(g0.values[0] == doctest::Approx(1.0));
  CHECK(g0.values[1] == doctest::Approx(1.0 / 3));
  CHECK(g0.values[2] == doctest::Approx(1.0 / 6));
  CHECK(g0.values[3] == doctest::Approx(1.0 / 10));

  const MomentVector d1 = gamma_down(1.0, A);
  for (int i = 0; i < A.size(); ++i) CHECK(d1.values[i] == doctest::Approx(g0.values[i]));

  CHECK(gamma_down(0.0, A).values == std::vector<double>{1.0, 0.0, 0.0, 0.0});

  const MomentVector u1 = gamma_up(1.0, A);
  for (double x : u1.values) CHECK(x == doctest::Approx(1.0));

  const MomentVector uh = gamma_up(0.5, ExponentSet({0, 1}));
  CHECK(uh.values[0] == doctest::Approx(1.0));
  CHECK(uh.values[1] == doctest::Approx(0.75));

  // gamma_up(t) is the moment vector of (1/(1-t)) 1_{(t,1]}.
  for (double t : {0.25, 0.5, 0.8}) {
    const StepFunction ind({t}, {0.0, 1.0 / (1.0 - t)});
    const MomentVector direct = moments_of_step(ind, A);
    const MomentVector g = gamma_up(t, A);
    for (int i = 0; i < A.size(); ++i)
      CHECK(g.values[i] == doctest::Approx(direct.values[i]).epsilon(1e-13));
  }
  // gamma_down(t) likewise for (1/t^{min(A)+1}) 1_{[0,t]}.
  const ExponentSet As({2, 5, 9});
  for (double t : {0.3, 0.7}) {
    const StepFunction ind({t}, {1.0 / pow_int(t, 3), 0.0});
    const MomentVector direct = moments_of_step(ind, As);
    const MomentVector g = gamma_down(t, As);
    for (int i = 0; i < As.size(); ++i)
      CHECK(g.values[i] == doctest::Approx(direct.values[i]).epsilon(1e-13));
  }
  CHECK_THROWS(gamma_up(1.5, A));
  CHECK_THROWS(gamma_down(-0.5, A));
}

TEST_CASE("base shift re-indexes values") {
  const MomentVector m(ExponentSet({1, 2}), {0.5, 0.25});
  const MomentVector b = base_shift(m);
  CHECK(b.exponent_set.exponents() == std::vector<int>{0, 1});
  CHECK(b.values == m.values);

  const MomentVector m0(ExponentSet({0, 2}), {1.0, 1.0 / 3});
  const MomentVector b0 = base_shift(m0);
  CHECK(b0.exponent_set == m0.exponent_set);
  CHECK(b0.values == m0.values);

  const MomentVector m2(ExponentSet({2, 5, 9}), {0.3, 0.2, 0.1});
  CHECK(base_shift(m2).exponent_set.exponents() == std::vector<int>{0, 3, 7});
}

TEST_CASE("atomic measure moments") {
  const ExponentSet A({0, 2, 5, 9});
  const MomentVector one = moments_of_atoms(AtomicMeasure({{1.0, 1.0}}), A);
  for (double x : one.values) CHECK(x == 1.0);

  const MomentVector mix =
      moments_of_atoms(AtomicMeasure({{0.0, 0.3}, {0.5, 0.7}}), ExponentSet({0, 1, 2}));
  CHECK(mix.values[0] == doctest::Approx(1.0));
  CHECK(mix.values[1] == doctest::Approx(0.35));
  CHECK(mix.values[2] == doctest::Approx(0.175));

  CHECK_THROWS(AtomicMeasure({{0.5, 0.0}}));          // zero weight
  CHECK_THROWS(AtomicMeasure({{0.5, 1.0}, {0.5, 1.0}}));  // duplicate location

  // Narrow spikes converge to the atoms.
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unif(0.1, 0.9);
  for (int trial = 0; trial < 5; ++trial) {
    const double t = unif(rng), w = 0.5 + unif(rng);
    const MomentVector target = moments_of_atoms(AtomicMeasure({{t, w}}), A);
    double prev_err = 1e9;
    for (double eps : {1e-3, 1e-4, 1e-5}) {
      const StepFunction spike({t, t + eps}, {0.0, w / eps, 0.0});
      const MomentVector ms = moments_of_step(spike, A);
      double err = 0.0;
      for (int i = 0; i < A.size(); ++i) err = std::max(err, std::abs(ms.values[i] - target.values[i]));
      CHECK(err <= 10.0 * eps);
      CHECK(err <= prev_err + 1e-12);
      prev_err = err;
    }
  }
}

TEST_CASE("canonicalize merges degenerate pieces") {
  const StepFunction c = canonicalize(StepFunction({0.5}, {2.0, 2.0}));
  CHECK(c.num_breakpoints() == 0);
  CHECK(c.heights == std::vector<double>{2.0});

  const StepFunction merged = canonicalize(StepFunction({0.1, 0.2, 0.7}, {1.0, 3.0, 3.0, 2.0}));
  CHECK(merged.breakpoints == std::vector<double>{0.1, 0.7});
  CHECK(merged.heights == std::vector<double>{1.0, 3.0, 2.0});

  const StepFunction canon({0.25, 0.5}, {1.0, 2.0, 1.0});
  const StepFunction same = canonicalize(canon);
  CHECK(same.breakpoints == canon.breakpoints);
  CHECK(same.heights == canon.heights);
  CHECK(canonicalize(same).breakpoints == same.breakpoints);  // idempotent

  // Zero-width pieces disappear; endpoints 0/1 bound empty pieces.
  const StepFunction zw = canonicalize(StepFunction({0.0, 0.4, 0.4, 1.0}, {9.0, 1.0, 7.0, 2.0, 3.0}));
  CHECK(zw.breakpoints == std::vector<double>{0.4});
  CHECK(zw.heights == std::vector<double>{1.0, 2.0});

  CHECK_THROWS(StepFunction({1.5}, {1.0, 1.0}));
  CHECK_THROWS(StepFunction({-0.1}, {1.0, 1.0}));
  CHECK_THROWS(StepFunction({0.5}, {1.0, -1.0}));

  // Moment preservation on degenerate inputs.
  const ExponentSet A({0, 2, 5});
  const StepFunction degen({0.3, 0.3, 0.6}, {1.0, 5.0, 1.0, 2.0});
  const MomentVector before = moments_of_step(degen, A);
  const MomentVector after = moments_of_step(canonicalize(degen), A);
  for (int i = 0; i < A.size(); ++i)
    CHECK(before.values[i] == doctest::Approx(after.values[i]).epsilon(1e-13));
}

TEST_CASE("step/polytope conversions round trip") {
  const StepFunction f({0.2, 0.7}, {1.0, 0.5, 2.0});
  const PolytopePoint p = step_to_polytope(f);
  CHECK(p.w[0] == doctest::Approx(0.2));
  CHECK(p.w[1] == doctest::Approx(0.25));
  CHECK(p.w[2] == doctest::Approx(0.6));
  const StepFunction back = polytope_to_step(p);
  CHECK(back.breakpoints == f.breakpoints);
  for (size_t i = 0; i < f.heights.size(); ++i)
    CHECK(back.heights[i] == doctest::Approx(f.heights[i]).epsilon(1e-14));

  CHECK_THROWS(polytope_to_step(PolytopePoint({0.5, 0.5}, {0.1, 0.8, 0.1})));
}

TEST_CASE("value_at follows the piece conventions") {
  const StepFunction f({0.25, 0.5}, {1.0, 2.0, 3.0});
  CHECK(f.value_at(0.0) == 1.0);   // first piece closed at 0
  CHECK(f.value_at(0.25) == 1.0);  // right-closed pieces
  CHECK(f.value_at(0.3) == 2.0);
  CHECK(f.value_at(0.5) == 2.0);
  CHECK(f.value_at(0.75) == 3.0);
  CHECK(f.value_at(1.0) == 3.0);
}
