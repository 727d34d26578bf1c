#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ward/inverse.hpp"

using namespace ward;

namespace {

const Grid2D g64 = Grid2D::make(-12, 12, 64, -6, 6, 64);

PotentialField gaussian_at_gate(const Grid2D& g, double gate) {
  PotentialField unit = make_test_potential(gaussian_spec(1.0), g);
  return make_test_potential(gaussian_spec(gate / compute_p1_norm(unit)), g);
}

struct Fixture {
  PotentialField Q = gaussian_at_gate(g64, 0.5);
  ForwardResult fwd = forward_scattering(Q, Contour::make(40, 512).nodes());
};

const Fixture& fixture() {
  static Fixture f;
  return f;
}

}  // namespace

TEST_CASE("contour must carry the cell-centred nodes") {
  ScatteringData v = ScatteringData::identity(2, g64, {-1.0, 0.0, 1.0});
  CHECK_THROWS_AS(contour_of(v), WardError);
  ScatteringData w = ScatteringData::identity(2, g64, Contour::make(20, 64).nodes());
  CHECK(contour_of(w) == Contour::make(20, 64));
}

TEST_CASE("jump rows at y = 0 are the data itself") {
  const ScatteringData& v = fixture().fwd.data;
  CVec r = jump_rows_at(v, 0.0);
  double d = 0;
  for (size_t k = 0; k < r.size(); ++k) d = std::max(d, std::abs(r[k] - v.v[k]));
  CHECK(d < 1e-14);
}

TEST_CASE("identity data reconstructs the zero potential") {
  ScatteringData v = ScatteringData::identity(2, g64, Contour::make(20, 64).nodes());
  ReconstructionResult r = reconstruct_potential(v);
  CHECK(r.q.q.sup_norm() < 1e-15);
  CHECK(r.residual_lax < 1e-15);
}

TEST_CASE("solve_point reproduces the forward eigenfunction off the axis") {
  const Fixture& f = fixture();
  const cplx probe(0.5, 1.0);
  Eigenfunction e = eigenfunction(f.Q, probe, Side::Upper);
  double d = 0;
  for (int j : {10, 32, 50})
    for (int i : {5, 32, 40}) {
      GeneralSolution s = solve_point(f.fwd.data, g64.x(i), g64.y(j));
      d = std::max(d, frob(s.evaluate(probe) - e.psi.node(i, j)));
    }
  CHECK(d < 1e-6);
}

TEST_CASE("round trip on 64 x 64: Q recovered up to the periodic gauge") {
  const Fixture& f = fixture();
  ReconstructionResult r = reconstruct_potential(f.fwd.data);
  CHECK(r.general_points == 0);
  CHECK(r.su_defect < 1e-6);
  CHECK(r.residual_lax < 1e-4);
  CHECK(r.jump_residual < 1e-10);

  // raw Q is Q0 minus its x-mean; anchored Q is Q0 - Q0(x_min, y)
  double raw = 0, anchored = 0, ref = f.Q.q.sup_norm();
  for (int j = 0; j < g64.ny; ++j) {
    CMat mean = CMat::Zero(2, 2);
    for (int i = 0; i < g64.nx; ++i) mean += f.Q.q.node(i, j) / double(g64.nx);
    for (int i = 0; i < g64.nx; ++i) {
      raw = std::max(raw, frob(r.q.q.node(i, j) - (f.Q.q.node(i, j) - mean)));
      anchored = std::max(anchored, frob(r.q_anchored.node(i, j) - (f.Q.q.node(i, j) - f.Q.q.node(0, j))));
    }
  }
  CHECK(raw / ref < 5e-3);
  CHECK(anchored / ref < 5e-3);
}

TEST_CASE("su(n) check catches a Hermitian perturbation") {
  const Fixture& f = fixture();
  CHECK(su_check(f.Q.q_x) < 1e-15);
  MatrixField bad = f.Q.q_x;
  bad(0, 0, 3, 3) += 1e-3;
  CHECK(su_check(bad) == doctest::Approx(3e-3).epsilon(1e-6));  // 2e-3 Hermitian part + 1e-3 trace
}

TEST_CASE("Lax residual of the forward eigenfunction with its own potential") {
  const Fixture& f = fixture();
  Eigenfunction e = eigenfunction(f.Q, cplx(0.5, 1.0), Side::Upper);
  double own = lax_residual(e.psi, f.Q, cplx(0.5, 1.0));
  CHECK(own < 1e-3);
  // the wrong lambda is detected
  CHECK(lax_residual(e.psi, f.Q, cplx(0.6, 1.0)) > 10 * own);
}
