#pragma once

#include <limits>

#include "ward/inverse.hpp"

namespace ward {

struct EvolvedData {
  double t = 0;
  ScatteringData v;                 // v(z + lambda^2 t, lambda)
  double symmetrization = 0;        // max |v - v*|/2 removed after the shift
  double det_defect = 0;            // max |det v_t - 1|
  double min_eigenvalue = 0;
};

// Shift every lambda column by lambda^2 t on the periodic z axis. A shift
// longer than max_shift raises DomainExceeded with the missing length.
EvolvedData evolve_data(const ScatteringData& v, double t,
                        double max_shift = std::numeric_limits<double>::infinity());

// Time step from lambda^2 dt <= 2 dz at the largest contour |lambda|.
double default_time_step(const ScatteringData& v);
// 2m+1 uniform nodes centred on 0.
std::vector<double> centred_times(double dt, int m);

struct SliceReport {
  double t = 0;
  double su_defect = 0;
  double lax_residual = 0;
  double jump_residual = 0;
  double det_defect = 0;
  double min_eigenvalue = 0;
  double symmetrization = 0;
  double q_sup = 0;
  double seconds = 0;
};

struct SpacetimeSolution {
  std::vector<double> t_nodes;
  std::vector<PotentialField> q_slices;  // raw reconstruction per slice
  std::vector<MatrixField> q_anchored;
  std::vector<MatrixField> psi_probe;
  cplx probe;
  std::vector<SliceReport> reports;
};

struct EvolutionOptions {
  ForwardOptions forward;
  InverseOptions inverse;
  double max_shift = std::numeric_limits<double>::infinity();
};

SpacetimeSolution solve_cauchy(const ScatteringData& v, const std::vector<double>& t_grid,
                               const EvolutionOptions& opt = {});
SpacetimeSolution solve_cauchy(const PotentialField& q0, const std::vector<double>& lambdas,
                               const std::vector<double>& t_grid, const EvolutionOptions& opt = {});

struct SecondLaxReport {
  double m_form = 0;      // |(d_t - lambda d_y) Psi - (d_y Q) Psi|
  double lax14_form = 0;  // |(d_t - lambda^2 d_x) Psi - (lambda d_x Q + d_y Q) Psi|
  double first_lax = 0;   // |(d_y - lambda d_x) Psi - (d_x Q) Psi| on the same nodes
  double agreement = 0;   // |R14 - R_M - lambda R_first|: zero up to rounding
};

// Central differences in t over interior slices, fourth-order in y on
// interior rows, spectral in x.
SecondLaxReport second_lax_residual(const std::vector<MatrixField>& psi, const std::vector<PotentialField>& q,
                                    const std::vector<double>& t, cplx lambda);

struct PdeResidual {
  std::vector<MatrixField> field;  // one per interior slice
  double sup = 0;
};

// d_x d_t Q - d_y^2 Q - [d_y Q, d_x Q] on interior slices.
PdeResidual ward_pde_residual(const std::vector<PotentialField>& q, const std::vector<double>& t);
PdeResidual ward_pde_residual(const SpacetimeSolution& s);

}  // namespace ward
