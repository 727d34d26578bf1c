#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ward/core.hpp"

using namespace ward;

namespace {

MatrixField scalar_field(const Grid2D& g, const std::function<cplx(double, double)>& f) {
  MatrixField m(2, g);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      m(0, 0, i, j) = f(g.x(i), g.y(j));
      m(1, 1, i, j) = -f(g.x(i), g.y(j));
    }
  return m;
}

}  // namespace

TEST_CASE("grid nodes exclude the right endpoint and contain zero") {
  Grid2D g = Grid2D::make(-12, 12, 64, -6, 6, 32);
  CHECK(g.dx() == doctest::Approx(0.375));
  CHECK(g.x(0) == -12);
  CHECK(g.x(g.x_zero_index()) == doctest::Approx(0).epsilon(1e-14));
  CHECK(g.y(g.y_zero_index()) == doctest::Approx(0).epsilon(1e-14));
  CHECK(g.xi(1) == doctest::Approx(2 * kPi / 24));
  CHECK(g.xi(g.nx - 1) == doctest::Approx(-2 * kPi / 24));
}

TEST_CASE("grid rejects bad shapes") {
  CHECK_THROWS_AS(Grid2D::make(-12, 12, 96, -6, 6, 64), WardError);
  CHECK_THROWS_AS(Grid2D::make(-12, 12, 4, -6, 6, 64), WardError);
  CHECK_THROWS_AS(Grid2D::make(12, -12, 64, -6, 6, 64), WardError);
  try {
    Grid2D::make(-12, 12, 96, -6, 6, 64);
  } catch (const WardError& e) {
    CHECK(e.kind() == ErrorKind::InvalidInput);
  }
}

TEST_CASE("Fourier transform of a Gaussian matches the continuum transform") {
  Grid2D g = Grid2D::make(-16, 16, 128, -4, 4, 8);
  MatrixField f = scalar_field(g, [](double x, double) { return std::exp(-x * x); });
  MatrixField fh = fourier_x(f);
  double err = 0;
  for (int k = 0; k < g.nx; ++k) {
    double xi = g.xi(k);
    cplx exact = k == g.nx / 2 ? 0.0 : std::sqrt(kPi) * std::exp(-xi * xi / 4);
    err = std::max(err, std::abs(fh(0, 0, k, 3) - exact));
  }
  CHECK(err < 1e-12);
  MatrixField back = inverse_fourier_x(fh);
  CHECK((back - f).sup_norm() < 1e-13);
}

TEST_CASE("spectral derivative is exact for resolved functions") {
  Grid2D g = Grid2D::make(-16, 16, 128, -4, 4, 8);
  MatrixField f = scalar_field(g, [](double x, double y) { return std::exp(-x * x - y * y); });
  MatrixField df = spectral_dx(f);
  MatrixField exact = scalar_field(g, [](double x, double y) { return -2 * x * std::exp(-x * x - y * y); });
  CHECK((df - exact).sup_norm() < 1e-12);
}

TEST_CASE("canonical directions are anti-Hermitian, traceless, unit norm") {
  for (int n : {2, 3}) {
    for (const CMat& d : {canonical_direction(n), offdiag_direction(n)}) {
      CHECK(antihermitian_defect(d) < 1e-15);
      CHECK(std::abs(d.trace()) < 1e-15);
      CHECK(frob(d) == doctest::Approx(1.0));
    }
  }
  CHECK_THROWS_AS(canonical_direction(1), WardError);
}

TEST_CASE("P1 of a Gaussian equals 4 pi A wy / wx") {
  Grid2D g = Grid2D::make(-16, 16, 256, -8, 8, 128);
  for (auto [wx, wy] : {std::pair{1.0, 1.0}, std::pair{1.5, 0.8}}) {
    PotentialField Q = make_test_potential(gaussian_spec(0.1, 2, wx, wy), g);
    double exact = 4 * kPi * 0.1 * wy / wx;
    CHECK(compute_p1_norm(Q) == doctest::Approx(exact).epsilon(1e-4));
  }
}

TEST_CASE("test potential samples and derivative agree with the analytic evaluators") {
  Grid2D g = Grid2D::make(-12, 12, 64, -6, 6, 64);
  PotentialField Q = make_test_potential(gaussian_spec(0.3), g);
  double e0 = 0, e1 = 0, su = 0;
  for (int j = 0; j < g.ny; j += 5)
    for (int i = 0; i < g.nx; i += 3) {
      e0 = std::max(e0, frob(Q.q.node(i, j) - Q.q_at(g.x(i), g.y(j))));
      e1 = std::max(e1, frob(Q.q_x.node(i, j) - Q.q_x_at(g.x(i), g.y(j))));
      su = std::max(su, antihermitian_defect(Q.q.node(i, j)) + std::abs(Q.q.node(i, j).trace()));
    }
  CHECK(e0 < 1e-14);
  CHECK(e1 < 1e-10);
  CHECK(su < 1e-15);

  // spectral q_x: truncation at Nyquist is exp(-(pi/dx)^2/4) ~ 2e-8 here
  PotentialField R = potential_from_samples(Q.q);
  CHECK((R.q_x - Q.q_x).sup_norm() < 1e-7);
}

TEST_CASE("zero potential has zero norms and passes the gate") {
  Grid2D g = Grid2D::make(-12, 12, 32, -6, 6, 32);
  PotentialField Z = zero_potential(2, g);
  CHECK(compute_p1_norm(Z) == 0);
  DecayClass d = norm_report(Z, 7);
  CHECK(d.p1_member);
  for (const auto& e : d.norms) CHECK(e.value == 0);
}

TEST_CASE("norm report flags under-resolved derivative norms instead of failing") {
  Grid2D g = Grid2D::make(-12, 12, 64, -6, 6, 64);
  PotentialField Q = make_test_potential(gaussian_spec(0.03), g);
  DecayClass d = norm_report(Q, 7);
  CHECK(d.p1_member);
  CHECK(d.p1_value == doctest::Approx(compute_p1_norm(Q)));
  bool some_checked = false;
  for (const auto& e : d.norms) {
    CHECK(std::isfinite(e.value));
    some_checked = some_checked || e.checked;
  }
  CHECK(some_checked);
}

TEST_CASE("make_test_potential rejects invalid directions") {
  Grid2D g = Grid2D::make(-12, 12, 32, -6, 6, 32);
  PotentialSpec s = gaussian_spec(0.1);
  s.components[0].direction = CMat::Identity(2, 2);
  CHECK_THROWS_AS(make_test_potential(s, g), WardError);
}
