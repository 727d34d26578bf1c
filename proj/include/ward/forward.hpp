#pragma once

#include <optional>

#include "ward/core.hpp"

namespace ward {

// Which half-plane limit a real spectral node refers to (lambda +/- i0).
enum class Side { Upper, Lower };

inline Side side_of(cplx lambda) { return lambda.imag() >= 0 ? Side::Upper : Side::Lower; }

struct NeumannOptions {
  double tol = 1e-12;       // sup_y |dW^|_{L1(dxi)} stopping threshold
  int max_iter = 200;
  bool enforce_gate = true;  // reject P1 >= 1 with SmallDataViolation
  bool throw_on_limit = true;
};

struct WHatResult {
  MatrixField w_hat;  // (xi, y), FFT ordering in x slot
  int iterations = 0;
  std::vector<double> increments;  // per-iteration sup_y L1(dxi) of the update
  double residual = 0;
};

// Fixed point of W^ = K_lambda W^ + forcing. For real lambda pass the side
// to select the boundary-value case table.
WHatResult solve_w_hat(const PotentialField& Q, cplx lambda, const NeumannOptions& opt = {});
WHatResult solve_w_hat(const PotentialField& Q, cplx lambda, Side side, const NeumannOptions& opt);

struct Eigenfunction {
  MatrixField psi;
  cplx lambda;
  Side side = Side::Upper;
  double det_defect = 0;   // max |det Psi - 1|
  double edge_defect = 0;  // max |Psi - 1| on the y = y_min edge
};

Eigenfunction assemble_eigenfunction(const MatrixField& w_hat, const PotentialField& Q, cplx lambda,
                                     Side side);
Eigenfunction assemble_eigenfunction(const MatrixField& w_hat, const PotentialField& Q, cplx lambda);

// Convenience: solve + assemble for an off-axis or boundary lambda.
Eigenfunction eigenfunction(const PotentialField& Q, cplx lambda, Side side,
                            const NeumannOptions& opt = {});

double det_defect(const MatrixField& psi);
// max |Psi(lambda) Psi(conj lambda)^* - 1| over the grid.
double reality_defect(const MatrixField& psi, const MatrixField& psi_conj);

struct BoundaryValues {
  Eigenfunction plus, minus;             // direct on-axis limits
  MatrixField plus_extrap, minus_extrap;  // Richardson limits along the ladder
  double extrap_error = 0;                // last Richardson increment
  std::vector<double> error_ladder;       // increments per ladder level
};

// Boundary limits at a real node. The limits themselves are computed on
// the axis with the half-plane case tables; the epsilon ladder with
// Richardson extrapolation is run alongside as an error estimate.
BoundaryValues boundary_values(const PotentialField& Q, double lambda,
                               const std::vector<double>& ladder = {0.1, 0.05, 0.025, 0.0125},
                               const NeumannOptions& opt = {});

// ---------------------------------------------------------------------------

struct ValidationCheck {
  std::string name;
  bool pass = true;
  bool checked = true;
  double value = 0;
  std::string note;
};

struct ValidationRecord {
  std::vector<ValidationCheck> checks;
  bool all_pass() const {
    for (const auto& c : checks)
      if (c.checked && !c.pass) return false;
    return true;
  }
  const ValidationCheck* find(const std::string& prefix) const {
    for (const auto& c : checks)
      if (c.name.rfind(prefix, 0) == 0) return &c;
    return nullptr;
  }
};

// v(z, lambda) on the periodic z axis (the grid's x axis) times the lambda
// nodes. Layout: v[(l*n*n + e)*nz + iz].
struct ScatteringData {
  int n = 2;
  Grid2D grid;
  std::vector<double> lambda;
  CVec v;
  ValidationRecord validation;
  double hermitian_correction = 0;  // max |v - v*|/2 removed by symmetrisation
  double shift_mismatch = -1;       // z-shift self check (negative: not run)

  static ScatteringData identity(int n, const Grid2D& g, const std::vector<double>& lambda);
  int nz() const { return grid.nx; }
  size_t at(int l, int e, int iz) const { return (size_t(l) * n * n + e) * nz() + iz; }
  CMat node(int l, int iz) const;
  void set_node(int l, int iz, const CMat& m);
};

// Jump v = Psi_-^{-1} Psi_+ on the y = 0 row, returned as n*n*nz samples
// (entry-planar). `shift_check` (if non-null) receives the mismatch between
// the y = y1 row and the y = 0 row shifted by lambda*y1.
CVec jump_row(const MatrixField& psi_plus, const MatrixField& psi_minus, double lambda,
              double y_check, double* shift_check);

// Single-lambda form of the extraction: builds ScatteringData with one node.
ScatteringData scattering_data(const Eigenfunction& psi_plus, const Eigenfunction& psi_minus,
                               double y_check = 0.5, double shift_tol = 1e-5);

ValidationRecord validate_scattering_data(const ScatteringData& v, int k = 7);

// Shift every column of v along z by s(lambda): v(z + s, lambda), spectrally
// on the periodic z axis, preserving Hermitian symmetry.
void shift_rows_spectral(const Grid2D& g, int n, cplx* row_planes, double shift);

// ---------------------------------------------------------------------------

struct ForwardOptions {
  NeumannOptions neumann;
  int depth = 0;              // 0: direct small-data path; >= 1: y-splitting
  bool allow_split = true;    // if false, a gate failure is SmallDataViolation
  double y_check = 0.5;       // z-shift self-check row
  double shift_tol = 1e-5;
  int ladder_stride = 0;      // run the epsilon ladder every k-th node (0: never)
  std::vector<double> epsilon_ladder = {0.1, 0.05, 0.025, 0.0125};
  int threads = 0;            // 0: runtime default
  int validate_k = 7;
};

struct ForwardDiagnostics {
  double p1 = 0;
  double max_det_defect = 0;      // det Psi_+/- over all nodes
  double max_reality_defect = 0;  // Psi_+ Psi_-^* - 1
  double max_v_det_defect = 0;    // before symmetrisation
  double max_extrap_error = 0;
  double seconds = 0;
  int depth_used = 0;
  int total_iterations = 0;
};

struct ForwardResult {
  ScatteringData data;
  ForwardDiagnostics diag;
};

// Potential -> scattering data on the given lambda nodes.
ForwardResult forward_scattering(const PotentialField& Q, const std::vector<double>& lambdas,
                                 const ForwardOptions& opt = {});

// ---- non-small data ------------------------------------------------------

struct SplitInfo {
  double y0 = 0;  // split row (a grid node)
  int j0 = 0;
  double p1_minus = 0, p1_plus = 0;
};

SplitInfo choose_split(const PotentialField& Q);
std::pair<PotentialField, PotentialField> split_potential(const PotentialField& Q, const SplitInfo& s);

// Eigenfunction at lambda (off-axis, or a real node with side) through
// `depth` levels of y-splitting and a periodic z-variable RHP per level.
Eigenfunction eigenfunction_split(const PotentialField& Q, cplx lambda, Side side, int depth,
                                  const NeumannOptions& opt = {});

struct NonsmallResult {
  ForwardResult forward;
  SplitInfo split;
};

NonsmallResult forward_nonsmall(const PotentialField& Q, int depth, const std::vector<double>& lambdas,
                                ForwardOptions opt = {});

}  // namespace ward
