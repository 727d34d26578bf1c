#include <algorithm>
#include <chrono>
#include <cmath>

#include "ward/evolution.hpp"

namespace ward {

EvolvedData evolve_data(const ScatteringData& v, double t, double max_shift) {
  EvolvedData out;
  out.t = t;
  out.v = v;
  const int nl = int(v.lambda.size()), n = v.n, nz = v.nz();
  double need = 0;
  for (double l : v.lambda) need = std::max(need, l * l * std::abs(t));
  if (need > max_shift)
    throw WardError(ErrorKind::DomainExceeded,
                    "time shift exceeds the z coverage; pad z by " + std::to_string(need - max_shift), need - max_shift,
                    "evolve");
  if (t != 0)
    for (int l = 0; l < nl; ++l)
      if (v.lambda[l] != 0) shift_rows_spectral(v.grid, n, out.v.v.data() + v.at(l, 0, 0), v.lambda[l] * v.lambda[l] * t);
  out.min_eigenvalue = INFINITY;
  for (int l = 0; l < nl; ++l)
    for (int iz = 0; iz < nz; ++iz) {
      CMat m = out.v.node(l, iz);
      out.symmetrization = std::max(out.symmetrization, 0.5 * (m - m.adjoint()).norm());
      CMat h = 0.5 * (m + m.adjoint());
      out.v.set_node(l, iz, h);
      out.det_defect = std::max(out.det_defect, std::abs(h.determinant() - 1.0));
      Eigen::SelfAdjointEigenSolver<CMat> es(h, Eigen::EigenvaluesOnly);
      out.min_eigenvalue = std::min(out.min_eigenvalue, es.eigenvalues().minCoeff());
    }
  out.v.validation = {};
  return out;
}

double default_time_step(const ScatteringData& v) {
  double lmax = 0;
  for (double l : v.lambda) lmax = std::max(lmax, std::abs(l));
  if (lmax == 0) throw WardError(ErrorKind::InvalidInput, "no nonzero lambda nodes");
  return 2 * v.grid.dx() / (lmax * lmax);
}

std::vector<double> centred_times(double dt, int m) {
  std::vector<double> t;
  for (int k = -m; k <= m; ++k) t.push_back(k * dt);
  return t;
}

SpacetimeSolution solve_cauchy(const ScatteringData& v, const std::vector<double>& t_grid, const EvolutionOptions& opt) {
  SpacetimeSolution s;
  s.t_nodes = t_grid;
  s.probe = opt.inverse.probe;
  for (size_t k = 0; k < t_grid.size(); ++k) {
    auto t0 = std::chrono::steady_clock::now();
    try {
      EvolvedData e = evolve_data(v, t_grid[k], opt.max_shift);
      ReconstructionResult r = reconstruct_potential(e.v, opt.inverse);
      SliceReport rep;
      rep.t = t_grid[k];
      rep.su_defect = r.su_defect;
      rep.lax_residual = r.residual_lax;
      rep.jump_residual = r.jump_residual;
      rep.det_defect = e.det_defect;
      rep.min_eigenvalue = e.min_eigenvalue;
      rep.symmetrization = e.symmetrization;
      rep.q_sup = r.q_anchored.sup_norm();
      rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      s.q_slices.push_back(std::move(r.q));
      s.q_anchored.push_back(std::move(r.q_anchored));
      s.psi_probe.push_back(std::move(r.psi_probe));
      s.reports.push_back(rep);
    } catch (const WardError& err) {
      throw WardError(err.kind(), "slice " + std::to_string(k) + " (t = " + std::to_string(t_grid[k]) + "): " + err.what(),
                      err.value(), err.stage());
    }
  }
  return s;
}

SpacetimeSolution solve_cauchy(const PotentialField& q0, const std::vector<double>& lambdas,
                               const std::vector<double>& t_grid, const EvolutionOptions& opt) {
  ForwardResult fr = forward_scattering(q0, lambdas, opt.forward);
  return solve_cauchy(fr.data, t_grid, opt);
}

namespace {

void need_slices(size_t k) {
  if (k < 3) throw WardError(ErrorKind::InsufficientSlices, "need at least 3 time slices", double(k));
}

// Fourth-order central y-derivatives at node (i, j), 2 <= j < ny - 2.
CMat dy4(const MatrixField& f, int i, int j) {
  return (f.node(i, j - 2) - 8.0 * f.node(i, j - 1) + 8.0 * f.node(i, j + 1) - f.node(i, j + 2)) / (12 * f.grid.dy());
}

CMat dyy4(const MatrixField& f, int i, int j) {
  double h = f.grid.dy();
  return (-f.node(i, j - 2) + 16.0 * f.node(i, j - 1) - 30.0 * f.node(i, j) + 16.0 * f.node(i, j + 1) -
          f.node(i, j + 2)) /
         (12 * h * h);
}

}  // namespace

SecondLaxReport second_lax_residual(const std::vector<MatrixField>& psi, const std::vector<PotentialField>& q,
                                    const std::vector<double>& t, cplx lambda) {
  need_slices(std::min({psi.size(), q.size(), t.size()}));
  SecondLaxReport rep;
  for (size_t k = 1; k + 1 < t.size(); ++k) {
    const MatrixField& P = psi[k];
    const Grid2D& g = P.grid;
    MatrixField px = spectral_dx(P);
    const double dt = t[k + 1] - t[k - 1];
    for (int j = 2; j + 2 < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        CMat pt = (psi[k + 1].node(i, j) - psi[k - 1].node(i, j)) / dt;
        CMat py = dy4(P, i, j);
        CMat qy = dy4(q[k].q, i, j);
        CMat p = P.node(i, j), qx = q[k].q_x.node(i, j);
        CMat rm = pt - lambda * py - qy * p;
        CMat r14 = pt - lambda * lambda * px.node(i, j) - (lambda * qx + qy) * p;
        CMat r1 = py - lambda * px.node(i, j) - qx * p;
        rep.m_form = std::max(rep.m_form, rm.norm());
        rep.lax14_form = std::max(rep.lax14_form, r14.norm());
        rep.first_lax = std::max(rep.first_lax, r1.norm());
        rep.agreement = std::max(rep.agreement, (r14 - rm - lambda * r1).norm());
      }
  }
  return rep;
}

PdeResidual ward_pde_residual(const std::vector<PotentialField>& q, const std::vector<double>& t) {
  need_slices(std::min(q.size(), t.size()));
  PdeResidual out;
  for (size_t k = 1; k + 1 < t.size(); ++k) {
    const Grid2D& g = q[k].grid();
    const int n = q[k].n();
    MatrixField qt(n, g);
    const double dt = t[k + 1] - t[k - 1];
    for (size_t p = 0; p < qt.data.size(); ++p) qt.data[p] = (q[k + 1].q.data[p] - q[k - 1].q.data[p]) / dt;
    MatrixField qxt = spectral_dx(qt);
    MatrixField r(n, g);
    for (int j = 2; j + 2 < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        CMat qy = dy4(q[k].q, i, j), qx = q[k].q_x.node(i, j);
        CMat m = qxt.node(i, j) - dyy4(q[k].q, i, j) - (qy * qx - qx * qy);
        r.set_node(i, j, m);
        out.sup = std::max(out.sup, m.norm());
      }
    out.field.push_back(std::move(r));
  }
  return out;
}

PdeResidual ward_pde_residual(const SpacetimeSolution& s) { return ward_pde_residual(s.q_slices, s.t_nodes); }

}  // namespace ward
