#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ward/forward.hpp"
#include "ward/rh.hpp"

using namespace ward;

namespace {

PotentialField gaussian_at_gate(const Grid2D& g, double gate, double wx = 1, double wy = 1) {
  PotentialField unit = make_test_potential(gaussian_spec(1.0, 2, wx, wy), g);
  return make_test_potential(gaussian_spec(gate / compute_p1_norm(unit), 2, wx, wy), g);
}

const Grid2D g64 = Grid2D::make(-12, 12, 64, -6, 6, 64);
const Grid2D g128 = Grid2D::make(-12, 12, 128, -6, 6, 128);

}  // namespace

TEST_CASE("zero potential: Psi is the identity and v is 1") {
  PotentialField Z = zero_potential(2, g64);
  Eigenfunction e = eigenfunction(Z, cplx(0.3, 0.7), Side::Upper);
  CHECK((e.psi - MatrixField::identity(2, g64)).sup_norm() == 0);
  ForwardResult r = forward_scattering(Z, Contour::make(20, 64).nodes());
  double d = 0;
  for (size_t l = 0; l < r.data.lambda.size(); ++l)
    for (int iz = 0; iz < r.data.nz(); ++iz) d = std::max(d, frob(r.data.node(int(l), iz) - CMat::Identity(2, 2)));
  CHECK(d == 0);
  CHECK(r.data.validation.all_pass());
}

TEST_CASE("Neumann increments contract at least as fast as P1") {
  PotentialField Q = gaussian_at_gate(g64, 0.5);
  for (cplx lam : {cplx(0.7, 0.5), cplx(-2, 0.1), cplx(0.4, -1.5)}) {
    WHatResult w = solve_w_hat(Q, lam);
    REQUIRE(w.increments.size() >= 3);
    for (size_t k = 1; k < w.increments.size(); ++k)
      if (w.increments[k - 1] > 1e-14) CHECK(w.increments[k] <= 0.5 * w.increments[k - 1] * (1 + 1e-9));
    CHECK(w.increments.back() < 1e-12);
  }
}

TEST_CASE("small-data gate rejects P1 >= 1") {
  PotentialField Q = gaussian_at_gate(g64, 1.2);
  try {
    solve_w_hat(Q, cplx(0.5, 0.5));
    FAIL("expected SmallDataViolation");
  } catch (const WardError& e) {
    CHECK(e.kind() == ErrorKind::SmallDataViolation);
    CHECK(e.value() == doctest::Approx(1.2));
  }
  ForwardOptions o;
  o.allow_split = false;
  CHECK_THROWS_AS(forward_scattering(Q, {0.5}, o), WardError);
}

TEST_CASE("off-axis lambda requires the side overload") {
  PotentialField Q = gaussian_at_gate(g64, 0.5);
  CHECK_THROWS_AS(solve_w_hat(Q, cplx(0.5, 0.0)), WardError);
}

TEST_CASE("det Psi = 1 and reality defects shrink under refinement") {
  const cplx lam(0.6, 0.8);
  double det[2], real[2];
  int k = 0;
  for (const Grid2D& g : {g64, g128}) {
    PotentialField Q = gaussian_at_gate(g, 0.5);
    Eigenfunction p = eigenfunction(Q, lam, Side::Upper);
    Eigenfunction m = eigenfunction(Q, std::conj(lam), Side::Lower);
    det[k] = p.det_defect;
    real[k] = reality_defect(p.psi, m.psi);
    ++k;
  }
  CHECK(det[1] < 1e-8);
  CHECK(real[1] < 1e-7);
  CHECK(det[1] < det[0] / 50);
  CHECK(real[1] < real[0] / 50);
}

TEST_CASE("Psi - 1 on the y = y_min edge decays with the distance to the support") {
  // the kernel decays like 1/|x + lambda y|, so the decay is algebraic
  double near, far;
  {
    PotentialField Q = gaussian_at_gate(Grid2D::make(-12, 12, 64, -3, 3, 32), 0.5);
    near = eigenfunction(Q, cplx(0.5, 1.0), Side::Upper).edge_defect;
  }
  {
    PotentialField Q = gaussian_at_gate(g64, 0.5);
    far = eigenfunction(Q, cplx(0.5, 1.0), Side::Upper).edge_defect;
  }
  CHECK(far < 1e-3);
  CHECK(far < near / 1.5);
}

TEST_CASE("boundary values: ladder extrapolation agrees with the on-axis limits") {
  PotentialField Q = gaussian_at_gate(g64, 0.5);
  BoundaryValues bv = boundary_values(Q, 0.8);
  CHECK((bv.plus.psi - bv.plus_extrap).sup_norm() < 1e-3);
  CHECK((bv.minus.psi - bv.minus_extrap).sup_norm() < 1e-3);
  CHECK(bv.error_ladder.size() >= 2);
  CHECK_THROWS_AS(boundary_values(Q, 0.8, {0.05, 0.1}), WardError);
}

TEST_CASE("jump is a function of x + lambda y") {
  PotentialField Q = gaussian_at_gate(g128, 0.5);
  for (double lam : {-3.0, 0.4, 2.5}) {
    Eigenfunction p = eigenfunction(Q, lam, Side::Upper);
    Eigenfunction m = eigenfunction(Q, lam, Side::Lower);
    double mismatch = -1;
    jump_row(p.psi, m.psi, lam, 0.5, &mismatch);
    CHECK(mismatch >= 0);
    CHECK(mismatch < 1e-5);
  }
}

TEST_CASE("spectral row shift composes and preserves Hermitian symmetry") {
  ScatteringData v = ScatteringData::identity(2, g64, {0.5});
  for (int iz = 0; iz < v.nz(); ++iz) {
    double z = g64.x(iz);
    CMat m(2, 2);
    double a = 0.2 * std::exp(-z * z);
    m << 1 + a, cplx(0, a), cplx(0, -a), 1 + a;
    v.set_node(0, iz, m);
  }
  ScatteringData w = v;
  shift_rows_spectral(g64, 2, w.v.data(), 0.7);
  shift_rows_spectral(g64, 2, w.v.data(), -0.7);
  double back = 0, herm = 0;
  ScatteringData s = v;
  shift_rows_spectral(g64, 2, s.v.data(), 1.3);
  for (int iz = 0; iz < v.nz(); ++iz) {
    back = std::max(back, frob(w.node(0, iz) - v.node(0, iz)));
    CMat n = s.node(0, iz);
    herm = std::max(herm, frob(n - n.adjoint()));
  }
  CHECK(back < 1e-9);  // the Nyquist mode is dropped by each shift
  CHECK(herm < 1e-13);
}

TEST_CASE("forward map: small Gaussian passes the scattering-data checks") {
  PotentialField Q = gaussian_at_gate(g64, 0.5);
  ForwardResult r = forward_scattering(Q, Contour::make(40, 512).nodes());
  CHECK(r.diag.p1 == doctest::Approx(0.5));
  CHECK(r.diag.depth_used == 0);
  CHECK(r.data.validation.all_pass());
  const ValidationCheck* det = r.data.validation.find("det_v");
  REQUIRE(det);
  CHECK(det->value < 1e-8);
  const ValidationCheck* pos = r.data.validation.find("hermitian_positive");
  REQUIRE(pos);
  CHECK(pos->pass);
  CHECK(r.data.hermitian_correction < 1e-5);

  // re-validation of the same data is deterministic
  ValidationRecord again = validate_scattering_data(r.data);
  REQUIRE(again.checks.size() == r.data.validation.checks.size());
  for (size_t k = 0; k < again.checks.size(); ++k) CHECK(again.checks[k].value == r.data.validation.checks[k].value);
}

TEST_CASE("validation flags a corrupted determinant") {
  PotentialField Q = gaussian_at_gate(g64, 0.5);
  ForwardResult r = forward_scattering(Q, Contour::make(20, 64).nodes());
  ScatteringData bad = r.data;
  CMat m = bad.node(10, 20);
  bad.set_node(10, 20, 1.01 * m);
  ValidationRecord rec = validate_scattering_data(bad);
  CHECK_FALSE(rec.all_pass());
  CHECK_FALSE(rec.find("det_v")->pass);
}

TEST_CASE("coarse grids fail the jump self-check instead of returning bad data") {
  Grid2D g = Grid2D::make(-12, 12, 32, -6, 6, 32);
  PotentialField Q = gaussian_at_gate(g, 0.5);
  try {
    forward_scattering(Q, Contour::make(20, 64).nodes());
    FAIL("expected NotAJumpFunction");
  } catch (const WardError& e) {
    CHECK(e.kind() == ErrorKind::NotAJumpFunction);
  }
}

TEST_CASE("large-lambda asymptotics: Psi - (1 - Q/lambda) decays like |lambda|^-2") {
  // On the periodic x axis the 1/lambda coefficient is Q minus its x-mean.
  PotentialField Q = gaussian_at_gate(g64, 0.5);
  MatrixField qc = Q.q;
  for (int e = 0; e < 4; ++e)
    for (int j = 0; j < g64.ny; ++j) {
      cplx m = 0;
      for (int i = 0; i < g64.nx; ++i) m += qc(e / 2, e % 2, i, j);
      for (int i = 0; i < g64.nx; ++i) qc(e / 2, e % 2, i, j) -= m / double(g64.nx);
    }
  std::vector<double> lx, ly;
  for (double r : {10.0, 20.0, 40.0, 80.0}) {
    cplx lam = std::polar(r, kPi / 4);
    Eigenfunction e = eigenfunction(Q, lam, Side::Upper);
    double d = 0;
    for (int j = 0; j < g64.ny; ++j)
      for (int i = 0; i < g64.nx; ++i)
        d = std::max(d, frob(e.psi.node(i, j) - (CMat::Identity(2, 2) - qc.node(i, j) / lam)));
    lx.push_back(std::log(r));
    ly.push_back(std::log(d));
  }
  double mx = 0, my = 0;
  for (size_t k = 0; k < lx.size(); ++k) mx += lx[k] / lx.size(), my += ly[k] / ly.size();
  double sxy = 0, sxx = 0;
  for (size_t k = 0; k < lx.size(); ++k) sxy += (lx[k] - mx) * (ly[k] - my), sxx += (lx[k] - mx) * (lx[k] - mx);
  CHECK(-sxy / sxx == doctest::Approx(2.0).epsilon(0.15));
}
