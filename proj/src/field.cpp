#include <algorithm>
#include <cmath>
#include <sstream>

#include "ward/core.hpp"
#include "ward/fft.hpp"

namespace ward {

const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::InvalidInput: return "InvalidInput";
    case ErrorKind::SmallDataViolation: return "SmallDataViolation";
    case ErrorKind::IterationLimit: return "IterationLimit";
    case ErrorKind::BoundaryLimitUnstable: return "BoundaryLimitUnstable";
    case ErrorKind::NotAJumpFunction: return "NotAJumpFunction";
    case ErrorKind::SuspectedPole: return "SuspectedPole";
    case ErrorKind::NearContour: return "NearContour";
    case ErrorKind::TailError: return "TailError";
    case ErrorKind::SmallJumpViolation: return "SmallJumpViolation";
    case ErrorKind::ZeroOnContour: return "ZeroOnContour";
    case ErrorKind::WindingObstruction: return "WindingObstruction";
    case ErrorKind::MinorSingular: return "MinorSingular";
    case ErrorKind::NotPositive: return "NotPositive";
    case ErrorKind::ResidueSystemSingular: return "ResidueSystemSingular";
    case ErrorKind::ReconstructionSuspect: return "ReconstructionSuspect";
    case ErrorKind::DomainExceeded: return "DomainExceeded";
    case ErrorKind::InsufficientSlices: return "InsufficientSlices";
    case ErrorKind::Io: return "Io";
    case ErrorKind::Config: return "Config";
  }
  return "Unknown";
}

namespace {

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

int zero_index(double lo, double h, int n) {
  double r = -lo / h;
  int k = int(std::lround(r));
  if (k < 0 || k >= n || std::abs(r - k) > 1e-9) return -1;
  return k;
}

}  // namespace

Grid2D Grid2D::make(double x_min, double x_max, int nx, double y_min, double y_max, int ny) {
  Grid2D g{x_min, x_max, nx, y_min, y_max, ny};
  if (nx < 8 || ny < 8) throw WardError(ErrorKind::InvalidInput, "grid needs at least 8 nodes per axis");
  if (!is_pow2(nx)) throw WardError(ErrorKind::InvalidInput, "n_x must be a power of two");
  if (!(x_max > x_min) || !(y_max > y_min))
    throw WardError(ErrorKind::InvalidInput, "grid extents must be increasing");
  if (g.x_zero_index() < 0 || g.y_zero_index() < 0)
    throw WardError(ErrorKind::InvalidInput, "both axes must contain 0 as a node");
  return g;
}

int Grid2D::x_zero_index() const { return zero_index(x_min, dx(), nx); }
int Grid2D::y_zero_index() const { return zero_index(y_min, dy(), ny); }

double Grid2D::xi(int k) const {
  int kk = k < nx / 2 ? k : k - nx;
  return 2 * kPi * kk / length_x();
}

SpectralAxis SpectralAxis::make(const Grid2D& g, double Lambda, int n_lambda,
                                std::vector<double> ladder) {
  if (!(Lambda > 0) || n_lambda < 2)
    throw WardError(ErrorKind::InvalidInput, "spectral axis needs Lambda > 0 and n_lambda >= 2");
  SpectralAxis s;
  for (int k = -g.nx / 2 + 1; k < g.nx / 2; ++k) s.xi_nodes.push_back(2 * kPi * k / g.length_x());
  double h = 2 * Lambda / n_lambda;
  for (int j = 0; j < n_lambda; ++j) s.lambda_nodes.push_back(-Lambda + (j + 0.5) * h);
  for (double e : ladder)
    if (!(e > 0)) throw WardError(ErrorKind::InvalidInput, "epsilon ladder entries must be positive");
  s.epsilon_ladder = std::move(ladder);
  return s;
}

double SpectralAxis::lambda_step() const {
  return lambda_nodes.size() > 1 ? lambda_nodes[1] - lambda_nodes[0] : 0.0;
}

MatrixField MatrixField::identity(int n, const Grid2D& g) {
  MatrixField f(n, g);
  for (int a = 0; a < n; ++a)
    std::fill(f.data.begin() + f.idx(a, a, 0, 0), f.data.begin() + f.idx(a, a, 0, 0) + f.plane(), cplx(1));
  return f;
}

CMat MatrixField::node(int i, int j) const {
  CMat m(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) m(a, b) = (*this)(a, b, i, j);
  return m;
}

void MatrixField::set_node(int i, int j, const CMat& m) {
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) (*this)(a, b, i, j) = m(a, b);
}

double MatrixField::sup_norm() const {
  double best = 0;
  size_t P = plane();
  for (size_t p = 0; p < P; ++p) {
    double s = 0;
    for (int e = 0; e < n * n; ++e) s += std::norm(data[e * P + p]);
    best = std::max(best, s);
  }
  return std::sqrt(best);
}

bool MatrixField::all_finite() const {
  return std::all_of(data.begin(), data.end(),
                     [](const cplx& z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); });
}

MatrixField operator-(const MatrixField& a, const MatrixField& b) {
  if (a.n != b.n || !(a.grid == b.grid)) throw WardError(ErrorKind::InvalidInput, "field shape mismatch");
  MatrixField r = a;
  for (size_t k = 0; k < r.data.size(); ++k) r.data[k] -= b.data[k];
  return r;
}

double frob(const CMat& m) { return m.norm(); }

double antihermitian_defect(const CMat& m) {
  return (m + m.adjoint()).norm() + std::abs(m.trace());
}

// ---------------------------------------------------------------------------

MatrixField fourier_x(const MatrixField& f) {
  if (!f.all_finite()) throw WardError(ErrorKind::InvalidInput, "non-finite input to fourier_x");
  const Grid2D& g = f.grid;
  MatrixField out = f;
  int rows = f.n * f.n * g.ny;
  fft::rows(out.data.data(), g.nx, rows, -1);
  CVec phase(g.nx);
  for (int k = 0; k < g.nx; ++k) phase[k] = g.dx() * std::exp(-kI * g.xi(k) * g.x_min);
  for (int r = 0; r < rows; ++r)
    for (int k = 0; k < g.nx; ++k) out.data[size_t(r) * g.nx + k] *= phase[k];
  return out;
}

MatrixField inverse_fourier_x(const MatrixField& fh) {
  const Grid2D& g = fh.grid;
  MatrixField out = fh;
  int rows = fh.n * fh.n * g.ny;
  CVec phase(g.nx);
  for (int k = 0; k < g.nx; ++k) phase[k] = std::exp(kI * g.xi(k) * g.x_min) / g.length_x();
  for (int r = 0; r < rows; ++r)
    for (int k = 0; k < g.nx; ++k) out.data[size_t(r) * g.nx + k] *= phase[k];
  fft::rows(out.data.data(), g.nx, rows, +1);
  return out;
}

MatrixField spectral_dx(const MatrixField& f) {
  const Grid2D& g = f.grid;
  MatrixField out = f;
  int rows = f.n * f.n * g.ny;
  fft::rows(out.data.data(), g.nx, rows, -1);
  for (int r = 0; r < rows; ++r)
    for (int k = 0; k < g.nx; ++k) {
      cplx m = (k == g.nx / 2) ? cplx(0) : kI * g.xi(k) / double(g.nx);
      out.data[size_t(r) * g.nx + k] *= m;
    }
  fft::rows(out.data.data(), g.nx, rows, +1);
  return out;
}

// ---------------------------------------------------------------------------

// |xi| has a kink at xi = 0, which caps the plain trapezoid rule at O(dxi^2).
// The samples are zero-padded to refine the xi grid, and the leading
// Euler-Maclaurin term of each half line, (dxi^2/12)|q^(0, y)|, is restored.
double compute_p1_norm(const PotentialField& Q) {
  const Grid2D& g = Q.grid();
  const int n2 = Q.n() * Q.n(), pad = 4, N = g.nx * pad;
  const double dxi = 2 * kPi / (g.length_x() * pad);
  CVec row(size_t(n2) * N);
  double total = 0;
  for (int j = 0; j < g.ny; ++j) {
    std::fill(row.begin(), row.end(), cplx(0));
    for (int e = 0; e < n2; ++e)
      for (int i = 0; i < g.nx; ++i) row[size_t(e) * N + i] = Q.q.data[(size_t(e) * g.ny + j) * g.nx + i];
    fft::rows(row.data(), N, n2, -1);
    double s_row = 0, zero = 0;
    for (int k = 0; k < N; ++k) {
      if (k == N / 2) continue;
      double s = 0;
      for (int e = 0; e < n2; ++e) s += std::norm(row[size_t(e) * N + k]);
      double xi = (k < N / 2 ? k : k - N) * dxi;
      s_row += std::abs(xi) * std::sqrt(s);
      if (k == 0) zero = std::sqrt(s);
    }
    total += (s_row * dxi + dxi * dxi / 6 * zero) * g.dx();
  }
  return total * g.dy();
}

CMat canonical_direction(int n) {
  if (n < 2) throw WardError(ErrorKind::InvalidInput, "su(1) is trivial; n must be >= 2");
  CMat m = CMat::Zero(n, n);
  m(0, 0) = kI / std::sqrt(2.0);
  m(1, 1) = -kI / std::sqrt(2.0);
  return m;
}

CMat offdiag_direction(int n) {
  if (n < 2) throw WardError(ErrorKind::InvalidInput, "su(1) is trivial; n must be >= 2");
  CMat m = CMat::Zero(n, n);
  m(0, 1) = kI / std::sqrt(2.0);
  m(1, 0) = kI / std::sqrt(2.0);
  return m;
}

PotentialSpec gaussian_spec(double amplitude, int n, double wx, double wy) {
  PotentialSpec s;
  s.n = n;
  s.components.push_back({amplitude, 0, 0, wx, wy, canonical_direction(n)});
  return s;
}

PotentialField make_test_potential(const PotentialSpec& spec, const Grid2D& g) {
  if (spec.n < 2) throw WardError(ErrorKind::InvalidInput, "su(1) is trivial; n must be >= 2");
  for (const auto& c : spec.components) {
    if (c.direction.rows() != spec.n || c.direction.cols() != spec.n)
      throw WardError(ErrorKind::InvalidInput, "direction matrix has wrong size");
    if (antihermitian_defect(c.direction) > 1e-12)
      throw WardError(ErrorKind::InvalidInput, "direction matrix must be anti-Hermitian and traceless");
    if (!(c.wx > 0) || !(c.wy > 0)) throw WardError(ErrorKind::InvalidInput, "widths must be positive");
  }
  auto comps = spec.components;
  int n = spec.n;
  PointEvaluator q_at = [comps, n](double x, double y) {
    CMat m = CMat::Zero(n, n);
    for (const auto& c : comps) {
      double u = (x - c.x0) / c.wx, v = (y - c.y0) / c.wy;
      m += c.amplitude * std::exp(-u * u - v * v) * c.direction;
    }
    return m;
  };
  PointEvaluator qx_at = [comps, n](double x, double y) {
    CMat m = CMat::Zero(n, n);
    for (const auto& c : comps) {
      double u = (x - c.x0) / c.wx, v = (y - c.y0) / c.wy;
      m += c.amplitude * (-2 * u / c.wx) * std::exp(-u * u - v * v) * c.direction;
    }
    return m;
  };
  PotentialField P;
  P.q = MatrixField(n, g);
  P.q_x = MatrixField(n, g);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      P.q.set_node(i, j, q_at(g.x(i), g.y(j)));
      P.q_x.set_node(i, j, qx_at(g.x(i), g.y(j)));
    }
  P.q_at = q_at;
  P.q_x_at = qx_at;
  P.decay_class.p1_value = compute_p1_norm(P);
  P.decay_class.p1_member = P.decay_class.p1_value < 1;
  return P;
}

PotentialField zero_potential(int n, const Grid2D& g) {
  PotentialSpec s;
  s.n = n;
  return make_test_potential(s, g);
}

PotentialField potential_from_samples(const MatrixField& q) {
  PotentialField P;
  P.q = q;
  P.q_x = spectral_dx(q);
  P.decay_class.p1_value = compute_p1_norm(P);
  P.decay_class.p1_member = P.decay_class.p1_value < 1;
  return P;
}

// ---------------------------------------------------------------------------

namespace {

// Spectral derivative along y treating the (edge-vanishing) field as periodic.
MatrixField spectral_dy(const MatrixField& f) {
  const Grid2D& g = f.grid;
  MatrixField out = f;
  CVec col(g.ny);
  double Ly = g.y_max - g.y_min;
  for (int e = 0; e < f.n * f.n; ++e)
    for (int i = 0; i < g.nx; ++i) {
      for (int j = 0; j < g.ny; ++j) col[j] = f.data[(size_t(e) * g.ny + j) * g.nx + i];
      fft::forward(col);
      for (int k = 0; k < g.ny; ++k) {
        int kk = k < g.ny / 2 ? k : k - g.ny;
        cplx m = (2 * k == g.ny) ? cplx(0) : kI * (2 * kPi * kk / Ly) / double(g.ny);
        col[k] *= m;
      }
      fft::backward(col);
      for (int j = 0; j < g.ny; ++j) out.data[(size_t(e) * g.ny + j) * g.nx + i] = col[j];
    }
  return out;
}

// Fraction of the spectral mass of `f` (along x) living in the top third of
// the frequency band. Large values mean derivatives are not resolved.
double x_tail_fraction(const MatrixField& f) {
  MatrixField fh = fourier_x(f);
  const Grid2D& g = f.grid;
  double tot = 0, tail = 0;
  for (size_t r = 0; r < fh.data.size(); ++r) {
    int k = int(r % g.nx);
    double a = std::abs(fh.data[r]);
    tot += a;
    if (std::abs(g.xi(k)) > (2.0 / 3.0) * kPi / g.dx()) tail += a;
  }
  return tot > 0 ? tail / tot : 0.0;
}

double field_abs(const MatrixField& f, int i, int j) {
  double s = 0;
  for (int e = 0; e < f.n * f.n; ++e) s += std::norm(f.data[(size_t(e) * f.grid.ny + j) * f.grid.nx + i]);
  return std::sqrt(s);
}

}  // namespace

DecayClass norm_report(const PotentialField& Q, int k) {
  const Grid2D& g = Q.grid();
  DecayClass dc;
  int kmax = std::max(5, k);
  MatrixField qh = fourier_x(Q.q);
  double dxi = 2 * kPi / g.length_x();
  const double resolve_tol = 1e-8;
  double tail = x_tail_fraction(Q.q);

  // |xi^i y^s q^|_{L1(dxi dy)}
  for (int s = 0; s <= 1; ++s)
    for (int i = 1; i <= kmax; ++i) {
      double tot = 0, tl = 0;
      for (int j = 0; j < g.ny; ++j)
        for (int kk = 0; kk < g.nx; ++kk) {
          if (kk == g.nx / 2) continue;
          double xi = g.xi(kk);
          double a = std::pow(std::abs(xi), i) * std::pow(std::abs(g.y(j)), s) * field_abs(qh, kk, j);
          tot += a;
          if (std::abs(xi) > (2.0 / 3.0) * kPi / g.dx()) tl += a;
        }
      NormEntry e{"L1(xi^" + std::to_string(i) + " y^" + std::to_string(s) + " qhat)", tot * dxi * g.dy(),
                  tot == 0 || tl / tot < resolve_tol};
      dc.norms.push_back(e);
    }
  // || |xi^h q^|_{L1(dy)} ||_{L2(dxi)}: inner L1 in y, outer L2 in xi
  for (int h = 1; h <= k; ++h) {
    double tot = 0;
    for (int kk = 0; kk < g.nx; ++kk) {
      if (kk == g.nx / 2) continue;
      double inner = 0;
      for (int j = 0; j < g.ny; ++j) inner += field_abs(qh, kk, j) * g.dy();
      inner *= std::pow(std::abs(g.xi(kk)), h);
      tot += inner * inner * dxi;
    }
    dc.norms.push_back({"L2(xi)L1(y)(xi^" + std::to_string(h) + " qhat)", std::sqrt(tot), tail < resolve_tol});
  }
  // derivative norms of q
  MatrixField dxj = Q.q;
  for (int jx = 0; jx <= kmax; ++jx) {
    MatrixField d = dxj;
    for (int l = 0; l <= kmax; ++l) {
      double sup = 0, supy_l1x = 0, l1 = 0;
      for (int j = 0; j < g.ny; ++j) {
        double row = 0;
        for (int i = 0; i < g.nx; ++i) {
          double a = field_abs(d, i, j);
          sup = std::max(sup, a);
          row += a * g.dx();
        }
        supy_l1x = std::max(supy_l1x, row);
        l1 += row * g.dy();
      }
      bool ok = tail < resolve_tol || (jx + l) == 0;
      std::string tag = "d_x^" + std::to_string(jx) + " d_y^" + std::to_string(l) + " q";
      dc.norms.push_back({"Linf(" + tag + ")", sup, ok});
      dc.norms.push_back({"sup_y L1(dx)(" + tag + ")", supy_l1x, ok});
      dc.norms.push_back({"L1(dxdy)(" + tag + ")", l1, ok});
      if (l < kmax) d = spectral_dy(d);
    }
    if (jx < kmax) dxj = spectral_dx(dxj);
  }
  // edge decay diagnostic
  double edge = 0;
  for (int i = 0; i < g.nx; ++i) edge = std::max({edge, field_abs(Q.q, i, 0), field_abs(Q.q, i, g.ny - 1)});
  for (int j = 0; j < g.ny; ++j) edge = std::max({edge, field_abs(Q.q, 0, j), field_abs(Q.q, g.nx - 1, j)});
  dc.norms.push_back({"edge_max(q)", edge, true});

  dc.p1_value = compute_p1_norm(Q);
  dc.p1_member = dc.p1_value < 1;
  bool finite = true;
  for (const auto& e : dc.norms)
    if (e.checked && !std::isfinite(e.value)) finite = false;
  dc.pinf_member = finite;
  return dc;
}

}  // namespace ward
