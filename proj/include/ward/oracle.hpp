#pragma once

#include "ward/forward.hpp"

namespace ward {

// Slow reference implementations. None of them share transform or
// quadrature code with the fast paths.

struct OracleReport {
  std::string compared_quantity;
  double sup_difference = 0;
  std::string grids;
  double tolerance = 0;
  bool verdict = false;
  std::string note;
};

std::string to_json(const std::vector<OracleReport>& reports);

struct VolterraOracleResult {
  MatrixField w_hat;
  int iterations = 0;
  std::vector<double> increments;
  double contraction_ratio = 0;  // max ratio of successive increments
};

// Neumann series of the W-equation with direct O(N^2) Fourier sums and the
// y-integrals done exactly on the trigonometric interpolant of the forcing.
VolterraOracleResult dense_volterra_oracle(const PotentialField& Q, cplx lambda, const NeumannOptions& opt = {});

// 1 + G_lambda((d_x Q) psi_trial) with the x-periodic kernel
// -(sgn Im lambda / 2 pi i)(pi/L) cot(pi (x + lambda y)/L) + 1/(2L);
// the cell containing the singularity is integrated analytically. The source
// is interpolated onto a grid `refine` times finer before the direct sum.
MatrixField greens_solve(const PotentialField& Q, const MatrixField& psi_trial, cplx lambda, int refine = 4);
// G_lambda phi alone (no identity, no potential).
MatrixField greens_apply(const MatrixField& phi, cplx lambda, int refine = 4);

struct TransportResult {
  CMat holonomy;
  int clipped_steps = 0;  // steps whose x = z - lambda y left the grid
};

// RK4 for dM/dy = d_xQ(z - lambda y, y) M from y_min to y_max, M(y_min) = 1.
// Uses the potential's analytic evaluator when present, grid interpolation otherwise.
TransportResult characteristic_transport(const PotentialField& Q, double lambda, double z, int steps = 4096);

enum class Axis { X, Y };
// Centred differences of order 2 or 4, one-sided at the edges.
MatrixField finite_difference(const MatrixField& f, Axis axis, int order);

// Canonical corpus: every oracle against its fast path at the stated
// tolerances (small Gaussian, P1 = 1/2).
std::vector<OracleReport> run_oracle_suite();

}  // namespace ward
