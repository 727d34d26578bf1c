#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "ward/rh.hpp"

using namespace ward;

namespace {

CMat diag2(cplx a, cplx b) {
  CMat m = CMat::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

// v = [[1 + |a|^2, a], [conj a, 1]]: Hermitian, positive, det 1.
ContourFunction coupled_jump(const Contour& c, double amp) {
  return ContourFunction::sample(c, 2, 2, [amp](double z) {
    cplx a = amp * std::exp(-z * z) * cplx(1, 0.5 * z);
    CMat m(2, 2);
    m << 1 + std::norm(a), a, std::conj(a), 1;
    return m;
  });
}

}  // namespace

TEST_CASE("LDU of [[2,1],[1,1]] has pivots 2 and 1/2") {
  CMat A(2, 2);
  A << 2, 1, 1, 1;
  LDU f = ldu_factorize(A);
  CHECK(std::abs(f.S(0, 0) - 2.0) < 1e-15);
  CHECK(std::abs(f.S(1, 1) - 0.5) < 1e-15);
  CHECK(std::abs(f.C(1, 0) - 0.5) < 1e-15);
  CHECK(std::abs(f.B(0, 1) - 0.5) < 1e-15);
  CHECK((f.C * f.S * f.B - A).norm() < 1e-15);
}

TEST_CASE("LDU of random positive-definite matrices") {
  std::mt19937_64 rng(20241016);
  std::normal_distribution<double> nd;
  double worst_rec = 0, worst_minor = 0;
  for (int trial = 0; trial < 100; ++trial) {
    CMat G(3, 3);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) G(i, j) = cplx(nd(rng), nd(rng));
    CMat A = G * G.adjoint() + 0.1 * CMat::Identity(3, 3);
    LDU f = ldu_factorize(A);
    worst_rec = std::max(worst_rec, (f.C * f.S * f.B - A).norm() / A.norm());
    cplx prod = 1;
    for (int k = 0; k < 3; ++k) {
      prod *= f.S(k, k);
      worst_minor = std::max(worst_minor, std::abs(prod - f.minors[k]) / std::abs(f.minors[k]));
      CHECK(f.S(k, k).real() > 0);
      CHECK(std::abs(f.S(k, k).imag()) < 1e-12 * std::abs(f.S(k, k)));
      CHECK(f.C(k, k) == cplx(1));
      CHECK(f.B(k, k) == cplx(1));
    }
    // Hermitian input: the upper factor is the adjoint of the lower one
    CHECK((f.B - f.C.adjoint()).norm() < 1e-10);
  }
  CHECK(worst_rec <= 1e-12);
  CHECK(worst_minor <= 1e-14);
}

TEST_CASE("LDU reports a vanishing leading minor") {
  CMat A(2, 2);
  A << 0, 1, 1, 1;
  try {
    ldu_factorize(A);
    FAIL("expected MinorSingular");
  } catch (const WardError& e) {
    CHECK(e.kind() == ErrorKind::MinorSingular);
  }
}

TEST_CASE("small RHP with a diagonal jump matches the closed form") {
  Contour c = Contour::make(40, 1024);
  // delta = (z^2+1)/(z^2+4): Phi+ = (l+i)/(l+2i), Phi- = (l-2i)/(l-i)
  auto delta = [](double z) { return (z * z + 1) / (z * z + 4); };
  ContourFunction v = ContourFunction::sample(c, 2, 2, [&](double z) { return diag2(delta(z), 1 / delta(z)); });
  RhpOptions o;
  o.enforce_gate = false;
  RhpSolution s = solve_rhp_small(v, o);
  cplx lam(0.4, 0.9);
  cplx exact = (lam + kI) / (lam + 2.0 * kI);
  CMat P = s.evaluate(lam);
  CHECK(std::abs(P(0, 0) - exact) < 1e-7);
  CHECK(std::abs(P(1, 1) - 1.0 / exact) < 1e-7);
  CHECK(s.jump_residual < 1e-8);
}

TEST_CASE("scalar jump through the full general path") {
  Contour c = Contour::make(40, 1024);
  auto delta = [](double z) { return (z * z + 1) / (z * z + 4); };
  ContourFunction v = ContourFunction::sample(c, 2, 2, [&](double z) { return diag2(delta(z), 1 / delta(z)); });
  GeneralOptions o;
  o.force_general = true;
  GeneralSolution s = solve_rhp_general(v, o);
  CHECK_FALSE(s.direct);
  double err = 0;
  for (cplx lam : {cplx(0.4, 0.9), cplx(-3, 0.5), cplx(1, -0.6), cplx(0.2, -2)}) {
    cplx e = lam.imag() > 0 ? (lam + kI) / (lam + 2.0 * kI) : (lam - 2.0 * kI) / (lam - kI);
    CMat P = s.evaluate(lam);
    err = std::max({err, std::abs(P(0, 0) - e), std::abs(P(1, 1) - 1.0 / e), std::abs(P(0, 1)), std::abs(P(1, 0))});
  }
  CHECK(err <= 1e-7);
  CHECK(s.jump_residual < 1e-7);
}

TEST_CASE("triangular split reconstructs a positive jump") {
  Contour c = Contour::make(40, 512);
  ContourFunction v = coupled_jump(c, 1.5);
  TriangularFactorization t = triangular_split(v);
  CHECK(t.reconstruction_error < 1e-12);
  for (int j = 0; j < c.N; j += 17) {
    CMat hu = t.h_u.at(j), hl = t.h_l.at(j);
    CHECK(std::abs(hu(1, 0)) + std::abs(hu(0, 0)) + std::abs(hu(1, 1)) == 0);
    CHECK(std::abs(hl(0, 1)) + std::abs(hl(0, 0)) + std::abs(hl(1, 1)) == 0);
  }
}

TEST_CASE("Poisson rational approximation converges as eps shrinks") {
  Contour c = Contour::make(20, 1024);
  ContourFunction g = ContourFunction::sample(c, 2, 2, [](double z) {
    CMat m = CMat::Zero(2, 2);
    m(0, 1) = std::exp(-z * z);
    return m;
  });
  double prev = INFINITY;
  for (double eps : {0.4, 0.2, 0.1}) {
    RationalCorrection r = poisson_rational_approx(g, eps, 1.0 / (4 * c.h()));
    CHECK(r.approx_error < prev);
    prev = r.approx_error;
    for (size_t k = 0; k < r.poles.size(); ++k) CHECK(std::abs(std::abs(r.poles[k].imag()) - eps) < 1e-12);
  }
  CHECK(prev < 0.2);
}

TEST_CASE("general and direct paths agree on a small coupled jump") {
  Contour c = Contour::make(40, 1024);
  ContourFunction v = coupled_jump(c, 0.4);
  GeneralOptions direct, forced;
  forced.force_general = true;
  GeneralSolution a = solve_rhp_general(v, direct), b = solve_rhp_general(v, forced);
  CHECK(a.direct);
  CHECK_FALSE(b.direct);
  double d = 0;
  for (cplx lam : {cplx(0.3, 0.7), cplx(-1, -0.4), cplx(2, 1.5)}) d = std::max(d, frob(a.evaluate(lam) - b.evaluate(lam)));
  CHECK(d < 1e-6);
  CHECK(frob(a.first_moment(v) - b.first_moment(v)) < 1e-6);
}

TEST_CASE("large coupled jump: general path, det 1 and jump residual") {
  Contour c = Contour::make(40, 1024);
  ContourFunction v = coupled_jump(c, 1.5);
  GeneralSolution s = solve_rhp_general(v);
  CHECK_FALSE(s.direct);
  CHECK(s.jump_residual < 1e-6);
  CHECK(s.bcd1_residual < 1e-8);
  for (cplx lam : {cplx(0.3, 0.7), cplx(-1, -0.4)}) CHECK(std::abs(s.evaluate(lam).determinant() - 1.0) < 1e-6);
  // vanishing property: Psi(lambda) Psi(conj lambda)^* = 1 for a Hermitian jump
  cplx lam(0.5, 0.8);
  CHECK(frob(s.evaluate(lam) * s.evaluate(std::conj(lam)).adjoint() - CMat::Identity(2, 2)) < 1e-6);
}
