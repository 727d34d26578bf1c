#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ward/evolution.hpp"

using namespace ward;

namespace {

const Grid2D g64 = Grid2D::make(-12, 12, 64, -6, 6, 64);

PotentialField gaussian_at_gate(const Grid2D& g, double gate) {
  PotentialField unit = make_test_potential(gaussian_spec(1.0), g);
  return make_test_potential(gaussian_spec(gate / compute_p1_norm(unit)), g);
}

// Abelian plane wave D a sin(k x + l y + w t) with k w = l^2 solves the PDE exactly.
std::vector<PotentialField> plane_wave(const Grid2D& g, const std::vector<double>& t, double l) {
  const double k = 2 * kPi * 2 / g.length_x(), w = l * l / k, a = 0.3;
  CMat D = canonical_direction(2);
  std::vector<PotentialField> out;
  for (double tk : t) {
    MatrixField q(2, g);
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) q.set_node(i, j, a * std::sin(k * g.x(i) + l * g.y(j) + w * tk) * D);
    out.push_back(potential_from_samples(q));
  }
  return out;
}

ScatteringData bump_data(const Grid2D& g, const std::vector<double>& lambdas) {
  ScatteringData v = ScatteringData::identity(2, g, lambdas);
  for (size_t l = 0; l < lambdas.size(); ++l)
    for (int iz = 0; iz < v.nz(); ++iz) {
      double z = g.x(iz);
      cplx a = 0.3 * std::exp(-z * z / (9 + lambdas[l] * lambdas[l] * 0.1));  // resolved, so shifts are exact
      CMat m(2, 2);
      m << 1 + std::norm(a), a, std::conj(a), 1;
      v.set_node(int(l), iz, m);
    }
  return v;
}

}  // namespace

TEST_CASE("time nodes are centred on zero") {
  auto t = centred_times(0.1, 2);
  REQUIRE(t.size() == 5);
  CHECK(t[0] == doctest::Approx(-0.2));
  CHECK(t[2] == 0);
  CHECK(t[4] == doctest::Approx(0.2));
}

TEST_CASE("default time step follows lambda^2 dt <= 2 dz") {
  ScatteringData v = ScatteringData::identity(2, g64, Contour::make(20, 64).nodes());
  double dt = default_time_step(v);
  double lmax = std::abs(v.lambda.front());
  CHECK(lmax * lmax * dt == doctest::Approx(2 * g64.dx()));
}

TEST_CASE("evolution at t = 0 is the identity map") {
  ScatteringData v = bump_data(g64, Contour::make(4, 16).nodes());
  EvolvedData e = evolve_data(v, 0.0);
  double d = 0;
  for (size_t k = 0; k < v.v.size(); ++k) d = std::max(d, std::abs(e.v.v[k] - v.v[k]));
  CHECK(d < 1e-15);
}

TEST_CASE("evolution shifts each column by lambda^2 t") {
  // pick t so that every shift is a whole number of grid cells: exact
  std::vector<double> lambdas = {-2.0, -1.0, 1.0, 2.0};
  ScatteringData v = bump_data(g64, lambdas);
  const double t = 3 * g64.dx();  // shifts 3 and 12 cells
  EvolvedData e = evolve_data(v, t);
  double d = 0;
  for (int l = 0; l < 4; ++l) {
    int cells = int(std::lround(lambdas[l] * lambdas[l] * t / g64.dx()));
    for (int iz = 0; iz < v.nz(); ++iz) d = std::max(d, frob(e.v.node(l, iz) - v.node(l, (iz + cells) % v.nz())));
  }
  CHECK(d < 1e-12);
  CHECK(e.det_defect < 1e-12);
  CHECK(e.min_eigenvalue > 0);
  CHECK(e.symmetrization < 1e-14);
}

TEST_CASE("det and positivity of v_t hold for arbitrary shifts") {
  ScatteringData v = bump_data(g64, Contour::make(4, 16).nodes());
  for (double t : {-0.37, 0.011, 0.5}) {
    EvolvedData e = evolve_data(v, t);
    CHECK(e.det_defect < 1e-9);
    CHECK(e.min_eigenvalue > 0);
  }
}

TEST_CASE("shift beyond the allowed z coverage is reported") {
  ScatteringData v = bump_data(g64, {-3.0, 3.0});
  try {
    evolve_data(v, 1.0, 5.0);
    FAIL("expected DomainExceeded");
  } catch (const WardError& e) {
    CHECK(e.kind() == ErrorKind::DomainExceeded);
    CHECK(e.value() == doctest::Approx(4.0));
  }
}

TEST_CASE("PDE residual operator: exact abelian solution, second order in t") {
  Grid2D g = Grid2D::make(-12, 12, 64, -6, 6, 256);
  const double l = 0.8;
  double r[2];
  int k = 0;
  for (double dt : {0.04, 0.02}) {
    auto t = centred_times(dt, 1);
    r[k++] = ward_pde_residual(plane_wave(g, t, l), t).sup;
  }
  CHECK(r[1] < 1e-4);
  CHECK(r[0] / r[1] == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("PDE residual needs three slices") {
  auto t = centred_times(0.01, 0);
  CHECK_THROWS_AS(ward_pde_residual(plane_wave(g64, t, 0.5), t), WardError);
}

TEST_CASE("Cauchy problem for the zero potential stays zero") {
  PotentialField Z = zero_potential(2, g64);
  SpacetimeSolution s = solve_cauchy(Z, Contour::make(20, 64).nodes(), centred_times(1e-3, 1));
  for (const auto& q : s.q_slices) CHECK(q.q.sup_norm() < 1e-15);
  CHECK(ward_pde_residual(s).sup < 1e-12);
}

TEST_CASE("three-slice evolution of a small Gaussian on 64 x 64") {
  PotentialField Q = gaussian_at_gate(g64, 0.5);
  ForwardResult f = forward_scattering(Q, Contour::make(40, 512).nodes());
  const double dt = default_time_step(f.data);
  SpacetimeSolution s = solve_cauchy(f.data, centred_times(dt, 1));
  for (const auto& rep : s.reports) {
    CHECK(rep.det_defect < 1e-9);
    CHECK(rep.min_eigenvalue > 0);
    CHECK(rep.su_defect < 1e-6);
  }
  PdeResidual pde = ward_pde_residual(s);
  CHECK(pde.sup <= std::max(1e-3, 10 * (dt * dt + g64.dy() * g64.dy())));

  SecondLaxReport sl = second_lax_residual(s.psi_probe, s.q_slices, s.t_nodes, s.probe);
  // the two forms differ by lambda times the first Lax residual
  CHECK(sl.agreement < 1e-12 * std::max(1.0, sl.m_form));
  CHECK(sl.m_form < 1e-2);
}
