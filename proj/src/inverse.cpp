#include <algorithm>
#include <chrono>
#include <cmath>

#include <omp.h>

#include "ward/inverse.hpp"

namespace ward {

Contour contour_of(const ScatteringData& v) {
  const int nl = int(v.lambda.size());
  if (nl < 16) throw WardError(ErrorKind::InvalidInput, "scattering data needs at least 16 lambda nodes");
  double h = v.lambda[1] - v.lambda[0];
  double Lambda = 0.5 * nl * h;
  Contour c = Contour::make(Lambda, nl);
  for (int l = 0; l < nl; ++l)
    if (std::abs(c.node(l) - v.lambda[l]) > 1e-9 * Lambda)
      throw WardError(ErrorKind::InvalidInput, "lambda nodes are not a cell-centred uniform contour");
  return c;
}

CVec jump_rows_at(const ScatteringData& v, double y) {
  CVec rows = v.v;
  const int nl = int(v.lambda.size()), n = v.n;
  for (int l = 0; l < nl; ++l)
    if (y != 0) shift_rows_spectral(v.grid, n, rows.data() + v.at(l, 0, 0), v.lambda[l] * y);
  return rows;
}

ContourFunction jump_at_node(const ScatteringData& v, const CVec& rows, int i) {
  const int nl = int(v.lambda.size()), n = v.n;
  ContourFunction J = ContourFunction::zeros(contour_of(v), n, n, 2);
  for (int l = 0; l < nl; ++l)
    for (int e = 0; e < n * n; ++e) J.samples[size_t(e) * nl + l] = rows[v.at(l, e, i)];
  // exact Hermitian symmetry, as stored
  for (int l = 0; l < nl; ++l) {
    CMat m = J.at(l);
    J.set(l, 0.5 * (m + m.adjoint()));
  }
  return J;
}

namespace {

GeneralSolution solve_jump(const ContourFunction& J, const InverseOptions& opt, bool* general) {
  GeneralOptions go;
  go.small = opt.rh;
  double cn = opt.rh.cminus_norm > 0 ? opt.rh.cminus_norm : 1.0;
  double dev = (J - ContourFunction::identity(J.contour, J.rows)).sup_norm();
  if (dev * cn >= 1 && !opt.general_fallback)
    throw WardError(ErrorKind::SmallJumpViolation, "jump exceeds the small-jump gate", dev * cn, "inverse");
  if (general) *general = dev * cn >= 1;
  return solve_rhp_general(J, go);
}

}  // namespace

GeneralSolution solve_point(const ScatteringData& v, double x, double y, const InverseOptions& opt) {
  // shift so that the requested x is the first node of the rows
  CVec rows = v.v;
  const int nl = int(v.lambda.size());
  for (int l = 0; l < nl; ++l)
    shift_rows_spectral(v.grid, v.n, rows.data() + v.at(l, 0, 0), (x - v.grid.x_min) + v.lambda[l] * y);
  return solve_jump(jump_at_node(v, rows, 0), opt, nullptr);
}

double su_check(const MatrixField& q_x) {
  double worst = 0;
  const Grid2D& g = q_x.grid;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      CMat m = q_x.node(i, j);
      worst = std::max(worst, (m + m.adjoint()).norm() + std::abs(m.trace()));
    }
  return worst;
}

double lax_residual(const MatrixField& psi, const PotentialField& q, cplx lambda) {
  const Grid2D& g = psi.grid;
  const int n = psi.n;
  MatrixField px = spectral_dx(psi);
  const double dy = g.dy();
  double worst = 0;
  for (int j = 2; j + 2 < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      CMat py = (psi.node(i, j - 2) - 8.0 * psi.node(i, j - 1) + 8.0 * psi.node(i, j + 1) - psi.node(i, j + 2)) /
                (12 * dy);
      CMat r = py - lambda * px.node(i, j) - q.q_x.node(i, j) * psi.node(i, j);
      worst = std::max(worst, r.norm());
    }
  (void)n;
  return worst;
}

ReconstructionResult reconstruct_potential(const ScatteringData& v, const InverseOptions& opt) {
  auto t0 = std::chrono::steady_clock::now();
  const Grid2D& g = v.grid;
  const int n = v.n, nx = g.nx, ny = g.ny;
  Contour c = contour_of(v);
  ReconstructionResult res;
  res.probe = opt.probe;
  MatrixField Q(n, g), P(n, g);
  std::vector<double> jr(size_t(nx) * ny, 0), eg(size_t(nx) * ny, 0);
  std::vector<int> its(size_t(nx) * ny, 0), gen(size_t(nx) * ny, 0);
  std::vector<std::string> errors(ny);
  std::vector<ErrorKind> kinds(ny, ErrorKind::InvalidInput);
  int threads = opt.threads > 0 ? opt.threads : omp_get_max_threads();
  InverseOptions o = opt;
  if (o.rh.cminus_norm <= 0) o.rh.cminus_norm = 1.0;

  // |lambda| > M: sup_z |v - 1| below half the gate for all nodes beyond M
  {
    const int nl = int(v.lambda.size());
    double M = 0;
    for (int l = 0; l < nl; ++l) {
      double worst = 0;
      for (int iz = 0; iz < nx; ++iz) worst = std::max(worst, (v.node(l, iz) - CMat::Identity(n, n)).norm());
      if (worst * o.rh.cminus_norm >= 0.5) M = std::max(M, std::abs(v.lambda[l]) + 0.5 * c.h());
    }
    res.m_radius = M;
  }

#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (int j = 0; j < ny; ++j) {
    try {
      CVec rows = jump_rows_at(v, g.y(j));
      for (int i = 0; i < nx; ++i) {
        ContourFunction J = jump_at_node(v, rows, i);
        bool general = false;
        GeneralSolution s = solve_jump(J, o, &general);
        CMat q = s.first_moment(J);
        CMat p = s.evaluate(o.probe);
        Q.set_node(i, j, q);
        P.set_node(i, j, p);
        size_t id = size_t(j) * nx + i;
        jr[id] = s.jump_residual;
        its[id] = s.phi.iterations;
        gen[id] = general;
      }
    } catch (const WardError& e) {
      errors[j] = e.what();
      kinds[j] = e.kind();
    }
  }
  for (int j = 0; j < ny; ++j)
    if (!errors[j].empty())
      throw WardError(kinds[j], "reconstruction failed at y = " + std::to_string(g.y(j)) + ": " + errors[j], g.y(j),
                      "inverse");
  for (size_t id = 0; id < jr.size(); ++id) {
    res.jump_residual = std::max(res.jump_residual, jr[id]);
    res.max_iterations = std::max(res.max_iterations, its[id]);
    res.general_points += gen[id];
  }
  res.q = potential_from_samples(Q);
  res.q_anchored = Q;
  for (int e = 0; e < n * n; ++e)
    for (int j = 0; j < ny; ++j) {
      cplx a = Q.data[Q.idx(e / n, e % n, 0, j)];
      for (int i = 0; i < nx; ++i) res.q_anchored.data[Q.idx(e / n, e % n, i, j)] -= a;
    }
  res.psi_probe = P;
  res.su_defect = su_check(res.q.q_x);
  res.residual_lax = lax_residual(P, res.q, o.probe);
  for (int i = 0; i < nx; ++i) {
    res.edge_defect = std::max(res.edge_defect, (P.node(i, 0) - CMat::Identity(n, n)).norm());
    res.edge_max_q = std::max({res.edge_max_q, Q.node(i, 0).norm(), Q.node(i, ny - 1).norm()});
  }
  for (int j = 0; j < ny; ++j) res.edge_max_q = std::max({res.edge_max_q, Q.node(0, j).norm(), Q.node(nx - 1, j).norm()});
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (opt.throw_on_suspect && (res.su_defect > opt.su_tol || res.residual_lax > opt.lax_tol ||
                               !std::isfinite(res.su_defect) || !std::isfinite(res.residual_lax)))
    throw WardError(ErrorKind::ReconstructionSuspect,
                    "reconstruction failed certification (su defect " + std::to_string(res.su_defect) +
                        ", Lax residual " + std::to_string(res.residual_lax) + ")",
                    std::max(res.su_defect, res.residual_lax), "inverse");
  return res;
}

}  // namespace ward
