#pragma once

#include <complex>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace ward {

using cplx = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = std::vector<cplx>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr cplx kI{0.0, 1.0};

enum class ErrorKind {
  InvalidInput,
  SmallDataViolation,
  IterationLimit,
  BoundaryLimitUnstable,
  NotAJumpFunction,
  SuspectedPole,
  NearContour,
  TailError,
  SmallJumpViolation,
  ZeroOnContour,
  WindingObstruction,
  MinorSingular,
  NotPositive,
  ResidueSystemSingular,
  ReconstructionSuspect,
  DomainExceeded,
  InsufficientSlices,
  Io,
  Config,
};

const char* to_string(ErrorKind k);

// Every failure mode carries a kind, an optional measured value and an
// optional stage tag so callers (and the CLI exit-code map) can dispatch.
class WardError : public std::runtime_error {
 public:
  WardError(ErrorKind kind, const std::string& what, double value = 0.0,
            std::string stage = {})
      : std::runtime_error(what), kind_(kind), value_(value), stage_(std::move(stage)) {}
  ErrorKind kind() const { return kind_; }
  double value() const { return value_; }
  const std::string& stage() const { return stage_; }
  WardError with_stage(const std::string& s) const {
    return WardError(kind_, s + ": " + what(), value_, s);
  }

 private:
  ErrorKind kind_;
  double value_;
  std::string stage_;
};

// Uniform periodic-style grid: x_i = x_min + i*dx, dx = (x_max-x_min)/n_x,
// and the same convention in y. Both axes must contain 0 as a node.
struct Grid2D {
  double x_min = -12, x_max = 12;
  int nx = 64;
  double y_min = -6, y_max = 6;
  int ny = 64;

  static Grid2D make(double x_min, double x_max, int nx, double y_min, double y_max, int ny);

  double dx() const { return (x_max - x_min) / nx; }
  double dy() const { return (y_max - y_min) / ny; }
  double x(int i) const { return x_min + i * dx(); }
  double y(int j) const { return y_min + j * dy(); }
  double length_x() const { return x_max - x_min; }
  int x_zero_index() const;
  int y_zero_index() const;
  // Angular frequency of FFT mode k (FFT ordering), Nyquist mapped to -pi/dx.
  double xi(int k) const;
  bool operator==(const Grid2D& o) const = default;
};

struct SpectralAxis {
  std::vector<double> xi_nodes;
  std::vector<double> lambda_nodes;
  std::vector<double> epsilon_ladder;

  // Cell-centred lambda nodes on [-Lambda, Lambda]; xi nodes are the
  // symmetric (Nyquist-free) Fourier dual of the grid's x axis.
  static SpectralAxis make(const Grid2D& g, double Lambda, int n_lambda,
                           std::vector<double> ladder = {0.1, 0.05, 0.025, 0.0125});
  double lambda_step() const;
};

// n x n complex matrix per grid node. Storage is entry-planar:
// data[((a*n + b)*ny + j)*nx + i] holds entry (a,b) at node (i,j), so each
// entry row along x is contiguous for batched FFTs.
struct MatrixField {
  int n = 2;
  Grid2D grid;
  CVec data;

  MatrixField() = default;
  MatrixField(int n_, const Grid2D& g) : n(n_), grid(g), data(size_t(n_) * n_ * g.nx * g.ny) {}
  static MatrixField identity(int n, const Grid2D& g);

  size_t plane() const { return size_t(grid.nx) * grid.ny; }
  size_t idx(int a, int b, int i, int j) const {
    return (size_t(a * n + b) * grid.ny + j) * grid.nx + i;
  }
  cplx& operator()(int a, int b, int i, int j) { return data[idx(a, b, i, j)]; }
  const cplx& operator()(int a, int b, int i, int j) const { return data[idx(a, b, i, j)]; }
  CMat node(int i, int j) const;
  void set_node(int i, int j, const CMat& m);
  double sup_norm() const;  // max over nodes of the Frobenius norm
  bool all_finite() const;
};

MatrixField operator-(const MatrixField& a, const MatrixField& b);

struct NormEntry {
  std::string name;
  double value = 0;
  bool checked = true;
};

struct DecayClass {
  std::vector<NormEntry> norms;
  bool p1_member = false;
  bool pinf_member = false;
  double p1_value = 0;
};

// Analytic evaluator of q_x at arbitrary (x, y); optional, used by the
// characteristic-transport oracle. Returns an n x n matrix.
using PointEvaluator = std::function<CMat(double, double)>;

struct PotentialField {
  MatrixField q;
  MatrixField q_x;
  DecayClass decay_class;
  PointEvaluator q_at;
  PointEvaluator q_x_at;
  int n() const { return q.n; }
  const Grid2D& grid() const { return q.grid; }
};

// ---- spectral transforms along x --------------------------------------
// Continuum convention f^(xi) = int f e^{-i xi x} dx, discretised as
// dx * sum; modes are stored in FFT order in the x slot of the field.
MatrixField fourier_x(const MatrixField& f);
MatrixField inverse_fourier_x(const MatrixField& fh);
MatrixField spectral_dx(const MatrixField& f);

// ---- potentials and norms ---------------------------------------------
double compute_p1_norm(const PotentialField& Q);

struct GaussianComponent {
  double amplitude = 0;
  double x0 = 0, y0 = 0;
  double wx = 1, wy = 1;  // envelope exp(-((x-x0)/wx)^2 - ((y-y0)/wy)^2)
  CMat direction;         // anti-Hermitian, traceless
};

struct PotentialSpec {
  int n = 2;
  std::vector<GaussianComponent> components;
};

// Canonical su(2) direction i*diag(1,-1)/sqrt(2) (unit Frobenius norm).
CMat canonical_direction(int n = 2);
// Off-diagonal su(2) direction (i*sigma_x)/sqrt(2), used for non-abelian cases.
CMat offdiag_direction(int n = 2);
PotentialSpec gaussian_spec(double amplitude, int n = 2, double wx = 1, double wy = 1);
PotentialField make_test_potential(const PotentialSpec& spec, const Grid2D& g);
PotentialField zero_potential(int n, const Grid2D& g);
// Build a PotentialField from sampled Q; q_x by spectral differentiation.
PotentialField potential_from_samples(const MatrixField& q);

DecayClass norm_report(const PotentialField& Q, int k);

double frob(const CMat& m);
double antihermitian_defect(const CMat& m);

}  // namespace ward
