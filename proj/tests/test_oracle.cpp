#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <json.hpp>

#include "ward/oracle.hpp"

using namespace ward;

namespace {

PotentialField gaussian_at_gate(const Grid2D& g, double gate) {
  PotentialField unit = make_test_potential(gaussian_spec(1.0), g);
  return make_test_potential(gaussian_spec(gate / compute_p1_norm(unit)), g);
}

}  // namespace

TEST_CASE("canonical oracle suite: every comparison within tolerance") {
  std::vector<OracleReport> reps = run_oracle_suite();
  REQUIRE(reps.size() >= 6);
  for (const auto& r : reps) {
    INFO(r.compared_quantity << ": " << r.sup_difference << " vs " << r.tolerance << " " << r.note);
    CHECK(r.verdict);
    CHECK(std::isfinite(r.sup_difference));
    CHECK(r.sup_difference <= r.tolerance);
  }
  auto j = nlohmann::json::parse(to_json(reps));
  CHECK(j["schema_version"] == 1);
  CHECK(j["reports"].size() == reps.size());
}

TEST_CASE("dense Volterra oracle refuses large grids") {
  Grid2D g = Grid2D::make(-12, 12, 128, -6, 6, 128);
  PotentialField Q = gaussian_at_gate(g, 0.5);
  CHECK_THROWS_AS(dense_volterra_oracle(Q, cplx(0.5, 0.5)), WardError);
}

TEST_CASE("finite differences converge at their stated order") {
  auto err = [](int nx, int order) {
    Grid2D g = Grid2D::make(-8, 8, nx, -4, 4, 16);
    MatrixField f(2, g), exact(2, g);
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        double x = g.x(i);
        f(0, 0, i, j) = std::exp(-x * x);
        exact(0, 0, i, j) = -2 * x * std::exp(-x * x);
      }
    MatrixField d = finite_difference(f, Axis::X, order);
    double e = 0;
    for (int j = 0; j < g.ny; ++j)
      for (int i = 4; i < g.nx - 4; ++i) e = std::max(e, std::abs(d(0, 0, i, j) - exact(0, 0, i, j)));
    return e;
  };
  CHECK(err(128, 2) / err(256, 2) == doctest::Approx(4).epsilon(0.1));
  CHECK(err(128, 4) / err(256, 4) == doctest::Approx(16).epsilon(0.1));
}

TEST_CASE("characteristic transport of an abelian potential is an exponential") {
  Grid2D g = Grid2D::make(-12, 12, 64, -6, 6, 64);
  PotentialField Q = gaussian_at_gate(g, 0.5);
  const double lam = 0.3, z = 0.4;
  TransportResult t = characteristic_transport(Q, lam, z);
  // int q_x(z - lam y, y) dy by Simpson on the analytic evaluator
  const int m = 20000;
  const double h = (g.y_max - g.y_min) / m;
  CMat s = CMat::Zero(2, 2);
  for (int k = 0; k <= m; ++k) {
    double y = g.y_min + k * h, w = (k == 0 || k == m) ? 1 : (k % 2 ? 4 : 2);
    s += w * Q.q_x_at(z - lam * y, y);
  }
  s *= h / 3;
  CMat e = CMat::Identity(2, 2);
  for (int a = 0; a < 2; ++a) e(a, a) = std::exp(s(a, a));
  CHECK(frob(t.holonomy - e) < 1e-10);
  CHECK(std::abs(t.holonomy.determinant() - 1.0) < 1e-10);
  CHECK(t.clipped_steps == 0);
}

TEST_CASE("Green's function solve reproduces the eigenfunction") {
  Grid2D g = Grid2D::make(-12, 12, 64, -6, 6, 64);
  PotentialField Q = gaussian_at_gate(g, 0.5);
  for (cplx lam : {cplx(0.5, 0.8), cplx(0.5, -0.8)}) {
    Eigenfunction e = eigenfunction(Q, lam, side_of(lam));
    MatrixField r = greens_solve(Q, e.psi, lam);
    CHECK((r - e.psi).sup_norm() < 1e-4);
  }
}
