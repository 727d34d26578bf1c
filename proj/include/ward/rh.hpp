#pragma once

#include <memory>

#include "ward/core.hpp"

namespace ward {

// Uniform cell-centred nodes on [-Lambda, Lambda]: zeta_j = -Lambda + (j + 1/2) h.
struct Contour {
  double Lambda = 40;
  int N = 512;

  static Contour make(double Lambda, int N);
  double h() const { return 2 * Lambda / N; }
  double node(int j) const { return -Lambda + (j + 0.5) * h(); }
  std::vector<double> nodes() const;
  bool operator==(const Contour& o) const = default;
};

// Matrix samples on a contour, entry-planar: samples[e*N + j], e = a*cols + b.
struct ContourFunction {
  Contour contour;
  int rows = 1, cols = 1;
  CVec samples;
  int decay_tail = 2;  // asserted algebraic decay rate of the tails

  static ContourFunction zeros(const Contour& c, int rows, int cols, int decay = 2);
  static ContourFunction identity(const Contour& c, int n);
  static ContourFunction sample(const Contour& c, int rows, int cols,
                                const std::function<CMat(double)>& f, int decay = 2);
  int N() const { return contour.N; }
  int entries() const { return rows * cols; }
  cplx* entry(int e) { return samples.data() + size_t(e) * N(); }
  const cplx* entry(int e) const { return samples.data() + size_t(e) * N(); }
  CMat at(int j) const;
  void set(int j, const CMat& m);
  double sup_norm() const;  // max over nodes of the Frobenius norm
  bool all_finite() const;
};

ContourFunction operator-(const ContourFunction& a, const ContourFunction& b);

// Discrete Cauchy operators on one contour. The principal value uses the
// odd-offset (sinc) rule (2/pi) sum_{k-j odd} f_k/(k-j), applied as a
// Toeplitz product by FFT on the contour extended with fitted tail values;
// the remaining far tails are integrated analytically.
class CauchyOperator {
 public:
  CauchyOperator(const Contour& c, int decay_tail);

  const Contour& contour() const { return c_; }
  int decay_tail() const { return decay_; }

  // (1/pi) PV int f(zeta)/(zeta - zeta_j) d zeta at every node.
  void hilbert(const cplx* f, cplx* out) const;
  // C_+ f = f/2 + H f/(2i), C_- f = -f/2 + H f/(2i).
  void plus(const cplx* f, cplx* out) const;
  void minus(const cplx* f, cplx* out) const;
  // (1/2 pi i) int f/(zeta - lambda) and its lambda-derivative, off the axis.
  cplx transform(const cplx* f, cplx lambda) const;
  cplx transform_derivative(const cplx* f, cplx lambda) const;
  // Coefficients c_k of the tail model f ~ sum c_k (Lambda/|zeta|)^k on each end.
  void tail_fit(const cplx* f, cplx left[4], cplx right[4]) const;
  // Estimated |int_{|zeta|>Lambda} f| from the tail model.
  double tail_mass(const cplx* f) const;

 private:
  Contour c_;
  int decay_;
  int pad_;        // virtual nodes added on each side
  int fft_len_;
  CVec kernel_hat_;                  // FFT of the odd-offset kernel
  Eigen::MatrixXd fit_left_, fit_right_;  // 4 x window least-squares maps
  int window_;
  // Analytic far-tail weights per node and basis power, for both parities.
  std::vector<cplx> far_right_, far_left_;  // [j*4 + k]
  void extend(const cplx* f, CVec& ext, cplx left[4], cplx right[4]) const;
};

// Shared, cached operator for a contour and decay rate.
std::shared_ptr<const CauchyOperator> cauchy_operator(const Contour& c, int decay_tail);

// ---- spec-level operations ------------------------------------------------

CMat cauchy_transform(const ContourFunction& f, cplx lambda);
std::pair<ContourFunction, ContourFunction> cauchy_boundary(const ContourFunction& f);
// Independent O(N^2) principal value by subtraction of a Gaussian-weighted
// singular part; used to cross-check the sinc rule.
CVec hilbert_reference(const Contour& c, const cplx* f);

// Spectral radius of the discrete C_- (power iteration from a Gaussian).
double calibrate_cminus_norm(const Contour& c, int decay_tail = 2);

enum class SolveMethod { Auto, Dense, Gmres };

struct RhpOptions {
  SolveMethod method = SolveMethod::Auto;
  double cminus_norm = 0;  // 0: calibrate on first use
  bool enforce_gate = true;
  double gmres_tol = 1e-13;
  int gmres_max_iter = 400;
};

// A solved matrix RHP Psi_+ = Psi_- v with Psi -> 1. Off the contour
// Psi = 1 + C(density) with density = Psi_- (v - 1).
struct RhpSolution {
  ContourFunction psi_minus, psi_plus, density;
  std::shared_ptr<const CauchyOperator> op;
  int iterations = 0;
  double jump_residual = 0;  // interior sup |Psi_+ - Psi_- v|, 5 edge nodes excluded
  double gate_value = 0;     // |v - 1|_inf * |C_-|
  CMat evaluate(cplx lambda) const;
  CMat derivative(cplx lambda) const;
  // (1/2 pi i) int density d zeta: the 1/lambda coefficient with sign flipped.
  CMat first_moment() const;
};

RhpSolution solve_rhp_small(const ContourFunction& v, const RhpOptions& opt = {});

// Interior jump residual (edge nodes excluded).
double jump_residual(const ContourFunction& plus, const ContourFunction& minus,
                     const ContourFunction& v, int edge = 5);

struct WindingResult {
  int winding = 0;
  double rounding_defect = 0;
};
WindingResult winding_number(const ContourFunction& delta, int entry = 0, double tol = 1e-12);

// Diagonal RHP Delta_+ = Delta_- delta, Delta = exp(C log delta) entrywise.
struct DiagonalSolution {
  ContourFunction plus, minus;  // diagonal matrices on the contour
  ContourFunction log_delta;    // unwrapped logs, one entry per diagonal slot
  std::shared_ptr<const CauchyOperator> op;
  CMat evaluate(cplx lambda) const;
  CMat derivative(cplx lambda) const;
};
DiagonalSolution solve_scalar_rhp(const ContourFunction& delta);

struct LDU {
  CMat C, S, B;  // unit lower, diagonal, unit upper
  std::vector<cplx> minors;  // d+_k, k = 1..n
};
LDU ldu_factorize(const CMat& A, double tol = 1e-12);

// v = (1 + h_l)^{-1} chi (1 + h_u) nodewise.
struct TriangularFactorization {
  ContourFunction chi, h_u, h_l;
  double reconstruction_error = 0;
};
TriangularFactorization triangular_split(const ContourFunction& v, double positivity_tol = 1e-10);

// Sum of simple poles: R(lambda) = sum_k residues[k] / (lambda - poles[k]).
struct RationalCorrection {
  std::vector<cplx> poles;
  std::vector<CMat> residues;
  std::vector<int> side_tag;  // +1 pole in C+, -1 pole in C-
  int n = 2;
  double approx_error = 0;    // sup |g - R| on the contour
  CMat evaluate(cplx lambda) const;
  // Value with pole k removed (regular part at that pole).
  CMat evaluate_without(cplx lambda, size_t k) const;
};

// P_eps(t) = 1/(t - i eps) - 1/(t + i eps).
inline cplx poisson_kernel(cplx t, double eps) { return 1.0 / (t - kI * eps) - 1.0 / (t + kI * eps); }

// Sampled Poisson smoothing of a strictly triangular g on the lattice of
// contour nodes with spacing 1/N_res (a multiple of the node spacing):
// H(z) = (1/(2 pi i N_res)) sum_j g(s_j) P_eps(z - s_j).
RationalCorrection poisson_rational_approx(const ContourFunction& g, double eps, double N_res);

struct PoleData {
  cplx lambda;
  CMat alpha, beta, h, nmat;
};

struct ResidueSolution {
  RationalCorrection u;          // u = 1 + sum a_k/(lambda - lambda_k)
  double bcd1_residual = 0;      // max |a_j alpha_j h_j|
  double bcd2_residual = 0;
};
ResidueSolution residue_linear_system(const std::vector<PoleData>& poles, int n);

struct GeneralOptions {
  RhpOptions small;
  bool force_general = false;     // skip the direct small path
  std::vector<int> strides = {8, 4, 2, 1};  // Poisson lattice ladder, coarse to fine
  double eps_factor = 4;  // eps = eps_factor * lattice spacing, at least 5 node spacings
};

struct GeneralSolution {
  bool direct = false;           // solved by the small path alone
  RhpSolution phi;               // small solve (direct, or the conjugated phi_s)
  DiagonalSolution xi;
  RationalCorrection H_u, H_l, u;
  ContourFunction psi_minus, psi_plus;
  double jump_residual = 0;
  double bcd1_residual = 0;
  int stride_used = 0;
  CMat evaluate(cplx lambda) const;
  CMat first_moment(const ContourFunction& v) const;  // (1/2 pi i) int Psi_-(v - 1)
};

GeneralSolution solve_rhp_general(const ContourFunction& v, const GeneralOptions& opt = {});

}  // namespace ward
