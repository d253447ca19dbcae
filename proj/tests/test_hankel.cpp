#include <doctest.h>

#include <cmath>
#include <random>

#include "stepmoments/hankel.hpp"

using namespace stepmoments;

namespace {

MomentVector full_moments(const StepFunction& f, int d) {
  return moments_of_step(f, ExponentSet::consecutive(d));
}

MomentVector curve_full(double t, int d) {
  return moment_curve(t, ExponentSet::consecutive(d));
}

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
  for (double& h : hs) h = 2.0 * unif(rng);
  return StepFunction(bp, hs);
}

}  // namespace

TEST_CASE("hankel pair layouts") {
  // Even degree: Lebesgue moments of degree 2.
  const HankelPair p2 = hankel_pair(MomentVector(ExponentSet::consecutive(2), {1.0, 0.5, 1.0 / 3}));
  CHECK(p2.even);
  CHECK(p2.h1.rows() == 2);
  CHECK(p2.h1(0, 0) == 1.0);
  CHECK(p2.h1(0, 1) == 0.5);
  CHECK(p2.h1(1, 1) == doctest::Approx(1.0 / 3));
  CHECK(p2.h2.rows() == 1);
  CHECK(p2.h2(0, 0) == doctest::Approx(0.5 - 1.0 / 3));

  // Odd degree 3 at the curve point t.
  const double t = 0.3;
  const HankelPair p3 = hankel_pair(curve_full(t, 3));
  CHECK_FALSE(p3.even);
  CHECK(p3.h1(0, 0) == doctest::Approx(t));
  CHECK(p3.h1(0, 1) == doctest::Approx(t * t));
  CHECK(p3.h1(1, 1) == doctest::Approx(t * t * t));
  CHECK(p3.h2(0, 0) == doctest::Approx(1.0 - t));
  CHECK(p3.h2(0, 1) == doctest::Approx(t - t * t));
  CHECK(p3.h2(1, 1) == doctest::Approx(t * t - t * t * t));

  // Degree 9: the displayed pair of 5x5 matrices.
  std::vector<double> m(10);
  for (int i = 0; i < 10; ++i) m[i] = 1.0 / (i + 2);  // arbitrary distinct values
  const HankelPair p9 = hankel_pair(MomentVector(ExponentSet::consecutive(9), m));
  CHECK(p9.h1.rows() == 5);
  CHECK(p9.h2.rows() == 5);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) {
      CHECK(p9.h1(i, j) == m[i + j + 1]);
      CHECK(p9.h2(i, j) == m[i + j] - m[i + j + 1]);
    }

  CHECK_THROWS(hankel_pair(MomentVector(ExponentSet({0, 2}), {1.0, 0.3})));
}

TEST_CASE("hankel pair is linear in the moments") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> a(8), b(8);
  for (int i = 0; i < 8; ++i) {
    a[i] = unif(rng);
    b[i] = unif(rng);
  }
  std::vector<double> s(8);
  for (int i = 0; i < 8; ++i) s[i] = a[i] + 2.0 * b[i];
  const ExponentSet E = ExponentSet::consecutive(7);
  const HankelPair pa = hankel_pair(MomentVector(E, a));
  const HankelPair pb = hankel_pair(MomentVector(E, b));
  const HankelPair ps = hankel_pair(MomentVector(E, s));
  CHECK((ps.h1 - pa.h1 - 2.0 * pb.h1).cwiseAbs().maxCoeff() <= 1e-14);
  CHECK((ps.h2 - pa.h2 - 2.0 * pb.h2).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("psd_min_eig basics") {
  CHECK(psd_min_eig(Eigen::MatrixXd::Identity(3, 3)) == doctest::Approx(1.0));
  Eigen::MatrixXd ones(2, 2);
  ones << 1, 1, 1, 1;
  CHECK(psd_min_eig(ones) == doctest::Approx(0.0).epsilon(1e-12));
  Eigen::MatrixXd m(2, 2);
  m << 1, 2, 2, 1;
  CHECK(psd_min_eig(m) == doctest::Approx(-1.0));
  Eigen::MatrixXd ns(2, 2);
  ns << 1, 2, 0, 1;
  CHECK_THROWS(psd_min_eig(ns));
}

TEST_CASE("full membership trichotomy") {
  const MembershipResult inside =
      full_membership(MomentVector(ExponentSet::consecutive(4), {1.0, 0.5, 1.0 / 3, 0.25, 0.2}));
  CHECK(inside.decision == Membership::inside);

  const MembershipResult bdry = full_membership(curve_full(0.5, 4));
  CHECK(bdry.decision == Membership::boundary);
  REQUIRE(bdry.certificate_atoms.has_value());
  CHECK(bdry.certificate_atoms->size() == 1);
  CHECK(bdry.certificate_atoms->atoms[0].location == doctest::Approx(0.5).epsilon(1e-9));

  const MembershipResult out =
      full_membership(MomentVector(ExponentSet::consecutive(2), {1.0, 0.9, 0.5}));
  CHECK(out.decision == Membership::outside);
  REQUIRE(out.certificate_functional.has_value());
  // The functional is nonnegative on the cone and negative at m.
  const std::vector<double>& p = *out.certificate_functional;
  double at_m = p[0] * 1.0 + p[1] * 0.9 + p[2] * 0.5;
  CHECK(at_m < 0.0);
  for (double t = 0.0; t <= 1.0; t += 0.05) {
    double val = 0.0;
    for (size_t c = 0; c < p.size(); ++c) val += p[c] * pow_int(t, static_cast<int>(c));
    CHECK(val >= -1e-12);
  }
}

TEST_CASE("step-function sequences are never outside the spectrahedron") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 120; ++trial) {
    const int d = 4 + trial % 9;
    const StepFunction f = random_step(rng, 1 + trial % 4);
    const MembershipResult r = full_membership(full_moments(f, d));
    CHECK(r.decision != Membership::outside);
  }
}

TEST_CASE("atom extraction examples") {
  // Single Dirac at 0.5.
  const AtomicMeasure a1 = extract_atoms(curve_full(0.5, 4));
  REQUIRE(a1.size() == 1);
  CHECK(a1.atoms[0].location == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(a1.atoms[0].weight == doctest::Approx(1.0).epsilon(1e-10));

  // Two endpoint atoms.
  std::vector<double> m(5);
  for (int c = 0; c <= 4; ++c) m[c] = 0.3 * pow_int(0.0, c) + 0.7 * pow_int(1.0, c);
  const AtomicMeasure a2 = extract_atoms(MomentVector(ExponentSet::consecutive(4), m));
  REQUIRE(a2.size() == 2);
  CHECK(a2.atoms[0].location == doctest::Approx(0.0).epsilon(1e-10));
  CHECK(a2.atoms[0].weight == doctest::Approx(0.3).epsilon(1e-9));
  CHECK(a2.atoms[1].location == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(a2.atoms[1].weight == doctest::Approx(0.7).epsilon(1e-9));

  // Mixed endpoint + interior atoms, d = 6.
  std::vector<double> m3(7);
  for (int c = 0; c <= 6; ++c)
    m3[c] = 0.2 * pow_int(0.0, c) + 0.5 * pow_int(0.4, c) + 0.3 * pow_int(1.0, c);
  const AtomicMeasure a3 = extract_atoms(MomentVector(ExponentSet::consecutive(6), m3));
  REQUIRE(a3.size() == 3);
  CHECK(a3.atoms[0].location == doctest::Approx(0.0).epsilon(1e-8));
  CHECK(a3.atoms[1].location == doctest::Approx(0.4).epsilon(1e-8));
  CHECK(a3.atoms[2].location == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(a3.atoms[0].weight == doctest::Approx(0.2).epsilon(1e-8));
  CHECK(a3.atoms[1].weight == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(a3.atoms[2].weight == doctest::Approx(0.3).epsilon(1e-8));

  // Deep interior sequences cannot be represented by few atoms.
  CHECK_THROWS_WITH_AS(
      extract_atoms(MomentVector(ExponentSet::consecutive(4), {1.0, 0.5, 1.0 / 3, 0.25, 0.2})),
      doctest::Contains("atom extraction failed"), std::runtime_error);
}

TEST_CASE("plant-and-recover roundtrip") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int trial = 0; trial < 60; ++trial) {
    const int d = 4 + trial % 7;
    // Recoverable boundary measures have index b + 2i <= d.
    const bool at0 = unif(rng) < 0.3;
    const bool at1 = unif(rng) < 0.3;
    const int b = (at0 ? 1 : 0) + (at1 ? 1 : 0);
    const int max_interior = (d - b) / 2;
    const int n_interior = 1 + static_cast<int>(unif(rng) * (max_interior - 1 + 0.99));
    std::vector<AtomicMeasure::Atom> atoms;
    if (at0) atoms.push_back({0.0, 0.1 + unif(rng)});
    std::vector<double> locs;
    while (static_cast<int>(locs.size()) < n_interior) {
      const double t = 0.05 + 0.9 * unif(rng);
      bool ok = true;
      for (double l : locs) ok = ok && std::abs(l - t) > 5e-2;
      if (ok) locs.push_back(t);
    }
    std::sort(locs.begin(), locs.end());
    for (double l : locs) atoms.push_back({l, 0.1 + unif(rng)});
    if (at1) atoms.push_back({1.0, 0.1 + unif(rng)});

    const AtomicMeasure mu(atoms);
    const MomentVector m = moments_of_atoms(mu, ExponentSet::consecutive(d));
    const AtomicMeasure rec = extract_atoms(m);
    REQUIRE(rec.size() == mu.size());
    for (int i = 0; i < mu.size(); ++i) {
      CHECK(std::abs(rec.atoms[i].location - mu.atoms[i].location) <= 1e-7);
      CHECK(std::abs(rec.atoms[i].weight - mu.atoms[i].weight) <= 1e-7);
    }
  }
}

TEST_CASE("index of a boundary measure") {
  CHECK(index_of(AtomicMeasure({{1.0, 1.0}})).index == 1);
  CHECK(index_of(AtomicMeasure({{0.5, 1.0}})).index == 2);
  const IndexReport r = index_of(AtomicMeasure({{0.0, 0.3}, {0.5, 0.7}}));
  CHECK(r.boundary_count == 1);
  CHECK(r.interior_count == 1);
  CHECK(r.index == 3);
}

TEST_CASE("degenerating step functions respect the index bound") {
  // v(t) is the limit of 2-breakpoint step functions; its index is 2.
  const MomentVector m = curve_full(0.45, 6);
  const IndexReport r = index_of(extract_atoms(m));
  CHECK(r.index == 2);

  // An endpoint spike limit has index 1.
  std::vector<double> e(7);
  for (int c = 0; c <= 6; ++c) e[c] = 0.8 * pow_int(1.0, c);
  CHECK(index_of(extract_atoms(MomentVector(ExponentSet::consecutive(6), e))).index == 1);
}

TEST_CASE("schur determinants") {
  CHECK(schur_det(ExponentSet({0, 1, 2}), {0.0, 0.5, 1.0}) == doctest::Approx(0.25).epsilon(1e-12));

  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double t1 = 0.2, t2 = 0.9;
  CHECK(schur_det(ExponentSet({0, 1}), {t1, t2}) == doctest::Approx(t2 - t1).epsilon(1e-13));

  for (const std::vector<int>& exps :
       {std::vector<int>{0, 1, 2}, std::vector<int>{0, 2, 5}, std::vector<int>{0, 2, 5, 9}}) {
    const ExponentSet A(exps);
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<double> r(A.size());
      for (double& x : r) x = unif(rng);
      std::sort(r.begin(), r.end());
      bool distinct = true;
      for (size_t i = 1; i < r.size(); ++i) distinct = distinct && r[i] > r[i - 1];
      if (!distinct) continue;
      CHECK(schur_det(A, r) > 0.0);
    }
  }

  CHECK_THROWS(schur_det(ExponentSet({1, 2}), {0.1, 0.2}));             // min(A) != 0
  CHECK_THROWS(schur_det(ExponentSet({0, 1, 2}), {0.5, 0.1, 0.9}));     // unsorted
  CHECK_THROWS(schur_det(ExponentSet({0, 1, 2}), {0.1, 0.1, 0.9}));     // duplicate
  CHECK_THROWS(schur_det(ExponentSet({0, 1, 2}), {0.1, 0.9}));          // size mismatch
}

TEST_CASE("bialternant identity") {
  // Empty partition: det equals the Vandermonde product.
  const std::vector<double> r = {0.1, 0.4, 0.8};
  const BialternantCheck c1 = bialternant_check(ExponentSet({0, 1, 2}), r);
  const double vdm = (0.4 - 0.1) * (0.8 - 0.1) * (0.8 - 0.4);
  CHECK(c1.rhs == doctest::Approx(vdm).epsilon(1e-13));
  CHECK(c1.lhs == doctest::Approx(c1.rhs).epsilon(1e-12));

  // Single-box partition: schur polynomial r1 + r2 + r3.
  const BialternantCheck c2 = bialternant_check(ExponentSet({0, 1, 3}), r);
  CHECK(c2.rhs == doctest::Approx(vdm * (0.1 + 0.4 + 0.8)).epsilon(1e-13));
  CHECK(c2.lhs == doctest::Approx(c2.rhs).epsilon(1e-12));

  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (const std::vector<int>& exps : {std::vector<int>{0, 2, 5}, std::vector<int>{0, 2, 5, 9}}) {
    const ExponentSet A(exps);
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<double> rr(A.size());
      for (double& x : rr) x = unif(rng);
      std::sort(rr.begin(), rr.end());
      bool distinct = true;
      for (size_t i = 1; i < rr.size(); ++i) distinct = distinct && rr[i] > rr[i - 1];
      if (!distinct) continue;
      const BialternantCheck c = bialternant_check(A, rr);
      CHECK(std::abs(c.lhs - c.rhs) <= 1e-9 * std::max({std::abs(c.lhs), std::abs(c.rhs), 1e-300}));
    }
  }

  CHECK_THROWS(bialternant_check(ExponentSet({0, 40, 80, 120, 160, 200}),
                                 {0.1, 0.2, 0.3, 0.4, 0.5, 0.6}));  // shape too large
}
