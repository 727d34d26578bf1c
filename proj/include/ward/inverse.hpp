#pragma once

#include "ward/forward.hpp"
#include "ward/rh.hpp"

namespace ward {

struct InverseOptions {
  RhpOptions rh{SolveMethod::Gmres};
  bool general_fallback = true;  // points failing the small-jump gate use the general path
  cplx probe{0.5, 1.0};          // Psi(x, y, probe) is kept for the Lax certificate
  double su_tol = 1e-6;
  double lax_tol = 1e-4;
  bool throw_on_suspect = true;
  int threads = 0;
};

struct ReconstructionResult {
  PotentialField q;          // Q from the 1/lambda coefficient; q_x spectral
  MatrixField q_anchored;    // Q - Q(x_min, y): the x -> -infinity normalisation
  MatrixField psi_probe;     // Psi(x, y, probe)
  cplx probe;
  double residual_lax = 0;
  double su_defect = 0;
  double jump_residual = 0;  // worst over grid points
  double edge_defect = 0;    // max |Psi(probe) - 1| on the y = y_min edge
  double edge_max_q = 0;     // max |Q| on the grid boundary
  double m_radius = 0;       // smallest radius beyond which |v - 1| < gate/2
  int general_points = 0;    // points that needed the general path
  int max_iterations = 0;
  double seconds = 0;
};

// The jump v(x + zeta y, zeta) seen at grid row y_j, for every x node.
// Layout as ScatteringData::v.
CVec jump_rows_at(const ScatteringData& v, double y);
ContourFunction jump_at_node(const ScatteringData& v, const CVec& rows, int i);
Contour contour_of(const ScatteringData& v);

// Solve the RHP at one spatial point; returns the full solution.
GeneralSolution solve_point(const ScatteringData& v, double x, double y, const InverseOptions& opt = {});

ReconstructionResult reconstruct_potential(const ScatteringData& v, const InverseOptions& opt = {});

// |(d_y - lambda d_x) Psi - (d_x Q) Psi|_inf: spectral in x, fourth-order
// central differences in y on interior rows.
double lax_residual(const MatrixField& psi, const PotentialField& q, cplx lambda);

// max over nodes of |q_x + q_x^*| + |tr q_x|.
double su_check(const MatrixField& q_x);

}  // namespace ward
