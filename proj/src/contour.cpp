#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

#include "ward/fft.hpp"
#include "ward/linalg.hpp"
#include "ward/rh.hpp"

namespace ward {

Contour Contour::make(double Lambda, int N) {
  if (!(Lambda > 0) || N < 16 || (N & (N - 1)) != 0)
    throw WardError(ErrorKind::InvalidInput, "contour needs Lambda > 0 and a power-of-two N >= 16");
  return Contour{Lambda, N};
}

std::vector<double> Contour::nodes() const {
  std::vector<double> z(N);
  for (int j = 0; j < N; ++j) z[j] = node(j);
  return z;
}

ContourFunction ContourFunction::zeros(const Contour& c, int rows, int cols, int decay) {
  ContourFunction f;
  f.contour = c;
  f.rows = rows;
  f.cols = cols;
  f.decay_tail = decay;
  f.samples.assign(size_t(rows) * cols * c.N, cplx(0));
  return f;
}

ContourFunction ContourFunction::identity(const Contour& c, int n) {
  ContourFunction f = zeros(c, n, n);
  for (int a = 0; a < n; ++a) std::fill_n(f.entry(a * n + a), c.N, cplx(1));
  return f;
}

ContourFunction ContourFunction::sample(const Contour& c, int rows, int cols,
                                        const std::function<CMat(double)>& fn, int decay) {
  ContourFunction f = zeros(c, rows, cols, decay);
  for (int j = 0; j < c.N; ++j) f.set(j, fn(c.node(j)));
  return f;
}

CMat ContourFunction::at(int j) const {
  CMat m(rows, cols);
  for (int a = 0; a < rows; ++a)
    for (int b = 0; b < cols; ++b) m(a, b) = samples[size_t(a * cols + b) * N() + j];
  return m;
}

void ContourFunction::set(int j, const CMat& m) {
  for (int a = 0; a < rows; ++a)
    for (int b = 0; b < cols; ++b) samples[size_t(a * cols + b) * N() + j] = m(a, b);
}

double ContourFunction::sup_norm() const {
  double best = 0;
  for (int j = 0; j < N(); ++j) {
    double s = 0;
    for (int e = 0; e < entries(); ++e) s += std::norm(samples[size_t(e) * N() + j]);
    best = std::max(best, std::sqrt(s));
  }
  return best;
}

bool ContourFunction::all_finite() const {
  for (const auto& z : samples)
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  return true;
}

ContourFunction operator-(const ContourFunction& a, const ContourFunction& b) {
  ContourFunction r = a;
  for (size_t p = 0; p < r.samples.size(); ++p) r.samples[p] -= b.samples[p];
  return r;
}

// ---------------------------------------------------------------------------

namespace {

constexpr int kTailTerms = 4;

// int_R^inf zeta^{-p} / (zeta - lambda) d zeta and its lambda-derivative.
void tail_integrals(cplx lambda, double R, int p0, cplx I[kTailTerms], cplx dI[kTailTerms]) {
  if (std::abs(lambda) < 0.5 * R) {
    for (int k = 0; k < kTailTerms; ++k) {
      int p = p0 + k;
      cplx s = 0, ds = 0, lm = 1;
      double rp = std::pow(R, -p);
      for (int m = 0; m < 80; ++m) {
        s += lm * rp / double(p + m);
        if (m + 1 < 80) ds += double(m + 1) * lm * (rp / R) / double(p + m + 1);
        lm *= lambda;
        rp /= R;
      }
      I[k] = s;
      dI[k] = ds;
    }
    return;
  }
  // Upward recursion I_p = (I_{p-1} - R^{1-p}/(p-1)) / lambda from I_1.
  cplx lg = std::log(1.0 - lambda / R);
  cplx Ip = -lg / lambda;
  cplx dIp = -Ip / lambda + 1.0 / (lambda * (R - lambda));
  int p = 1;
  for (; p < p0; ++p) {
    cplx nI = (Ip - std::pow(R, -p) / double(p)) / lambda;
    dIp = (dIp - nI) / lambda;
    Ip = nI;
  }
  for (int k = 0; k < kTailTerms; ++k) {
    if (k > 0) {
      cplx nI = (Ip - std::pow(R, -(p)) / double(p)) / lambda;
      dIp = (dIp - nI) / lambda;
      Ip = nI;
      ++p;
    }
    I[k] = Ip;
    dI[k] = dIp;
  }
}

}  // namespace

CauchyOperator::CauchyOperator(const Contour& c, int decay_tail) : c_(c), decay_(decay_tail) {
  if (decay_tail < 1) throw WardError(ErrorKind::TailError, "decay_tail must be >= 1", decay_tail);
  const int N = c.N;
  pad_ = N / 2;
  const int M = N + 2 * pad_;
  fft_len_ = 1;
  while (fft_len_ < 2 * M) fft_len_ *= 2;
  CVec g(fft_len_, 0.0);
  for (int d = 1; d < M; ++d)
    if (d % 2) {
      g[d] = -2.0 / (kPi * d);
      g[fft_len_ - d] = 2.0 / (kPi * d);
    }
  fft::rows(g.data(), fft_len_, 1, -1);
  kernel_hat_ = g;

  window_ = std::max(8, N / 8);
  const double h = c.h();
  auto fit_map = [&](bool right) {
    Eigen::MatrixXd A(window_, kTailTerms);
    for (int w = 0; w < window_; ++w) {
      int j = right ? N - 1 - w : w;
      double t = c.Lambda / std::abs(c.node(j));
      for (int k = 0; k < kTailTerms; ++k) A(w, k) = std::pow(t, decay_tail + k);
    }
    return Eigen::MatrixXd(A.completeOrthogonalDecomposition().pseudoInverse());
  };
  fit_right_ = fit_map(true);
  fit_left_ = fit_map(false);

  far_right_.assign(size_t(N) * kTailTerms, 0.0);
  far_left_.assign(size_t(N) * kTailTerms, 0.0);
  const int last = N - 1 + pad_;  // extended index of the last virtual node
  const double z_last = c.node(last), z_first = c.node(-pad_);
  for (int j = 0; j < N; ++j) {
    double Rr = ((last - j) % 2) ? z_last + h : z_last;
    double Rl = ((j + pad_) % 2) ? -(z_first - h) : -z_first;
    cplx I[kTailTerms], dI[kTailTerms];
    tail_integrals(c.node(j), Rr, decay_tail, I, dI);
    for (int k = 0; k < kTailTerms; ++k)
      far_right_[size_t(j) * kTailTerms + k] = std::pow(c.Lambda, decay_tail + k) * I[k] / kPi;
    tail_integrals(-c.node(j), Rl, decay_tail, I, dI);
    for (int k = 0; k < kTailTerms; ++k)
      far_left_[size_t(j) * kTailTerms + k] = -std::pow(c.Lambda, decay_tail + k) * I[k] / kPi;
  }
}

void CauchyOperator::tail_fit(const cplx* f, cplx left[4], cplx right[4]) const {
  const int N = c_.N;
  for (int k = 0; k < kTailTerms; ++k) {
    cplx sl = 0, sr = 0;
    for (int w = 0; w < window_; ++w) {
      sr += fit_right_(k, w) * f[N - 1 - w];
      sl += fit_left_(k, w) * f[w];
    }
    left[k] = sl;
    right[k] = sr;
  }
}

double CauchyOperator::tail_mass(const cplx* f) const {
  cplx l[4], r[4];
  tail_fit(f, l, r);
  cplx s = 0;
  for (int k = 0; k < kTailTerms; ++k) {
    int p = decay_ + k;
    if (p <= 1) return std::abs(l[k]) + std::abs(r[k]) > 0 ? INFINITY : 0.0;
    s += (l[k] + r[k]) * c_.Lambda / double(p - 1);
  }
  return std::abs(s);
}

void CauchyOperator::extend(const cplx* f, CVec& ext, cplx left[4], cplx right[4]) const {
  const int N = c_.N;
  tail_fit(f, left, right);
  ext.assign(fft_len_, cplx(0));
  for (int j = 0; j < N; ++j) ext[pad_ + j] = f[j];
  for (int v = 1; v <= pad_; ++v) {
    double tr = c_.Lambda / c_.node(N - 1 + v);
    double tl = c_.Lambda / -c_.node(-v);
    cplx sr = 0, sl = 0;
    for (int k = 0; k < kTailTerms; ++k) {
      sr += right[k] * std::pow(tr, decay_ + k);
      sl += left[k] * std::pow(tl, decay_ + k);
    }
    ext[pad_ + N - 1 + v] = sr;
    ext[pad_ - v] = sl;
  }
}

void CauchyOperator::hilbert(const cplx* f, cplx* out) const {
  const int N = c_.N;
  CVec ext;
  cplx l[4], r[4];
  extend(f, ext, l, r);
  fft::rows(ext.data(), fft_len_, 1, -1);
  for (int k = 0; k < fft_len_; ++k) ext[k] *= kernel_hat_[k] / double(fft_len_);
  fft::rows(ext.data(), fft_len_, 1, +1);
  for (int j = 0; j < N; ++j) {
    cplx s = ext[pad_ + j];
    for (int k = 0; k < kTailTerms; ++k)
      s += r[k] * far_right_[size_t(j) * kTailTerms + k] + l[k] * far_left_[size_t(j) * kTailTerms + k];
    out[j] = s;
  }
}

void CauchyOperator::plus(const cplx* f, cplx* out) const {
  hilbert(f, out);
  for (int j = 0; j < c_.N; ++j) out[j] = 0.5 * f[j] + out[j] / (2.0 * kI);
}

void CauchyOperator::minus(const cplx* f, cplx* out) const {
  hilbert(f, out);
  for (int j = 0; j < c_.N; ++j) out[j] = -0.5 * f[j] + out[j] / (2.0 * kI);
}

namespace {

void check_off_contour(const Contour& c, cplx lambda) {
  if (std::abs(lambda.imag()) < 0.5 * c.h() && std::abs(lambda.real()) <= c.Lambda + c.h())
    throw WardError(ErrorKind::NearContour, "evaluation point within half a node spacing of the contour",
                    lambda.imag());
}

}  // namespace

cplx CauchyOperator::transform(const cplx* f, cplx lambda) const {
  check_off_contour(c_, lambda);
  const int N = c_.N;
  const double h = c_.h(), L = c_.Lambda;
  cplx s = 0;
  for (int j = 0; j < N; ++j) s += f[j] / (c_.node(j) - lambda);
  s *= h;
  cplx l[4], r[4], I[4], dI[4];
  tail_fit(f, l, r);
  tail_integrals(lambda, L, decay_, I, dI);
  for (int k = 0; k < kTailTerms; ++k) s += r[k] * std::pow(L, decay_ + k) * I[k];
  tail_integrals(-lambda, L, decay_, I, dI);
  for (int k = 0; k < kTailTerms; ++k) s -= l[k] * std::pow(L, decay_ + k) * I[k];
  // Euler-Maclaurin end term of the midpoint rule, from the tail model.
  cplx fr = 0, dfr = 0, fl = 0, dfl = 0;
  for (int k = 0; k < kTailTerms; ++k) {
    int p = decay_ + k;
    fr += r[k];
    dfr += -double(p) / L * r[k];
    fl += l[k];
    dfl += double(p) / L * l[k];
  }
  auto gprime = [&](double z, cplx fv, cplx dfv) { return dfv / (z - lambda) - fv / ((z - lambda) * (z - lambda)); };
  s += h * h / 24.0 * (gprime(L, fr, dfr) - gprime(-L, fl, dfl));
  return s / (2.0 * kPi * kI);
}

cplx CauchyOperator::transform_derivative(const cplx* f, cplx lambda) const {
  check_off_contour(c_, lambda);
  const int N = c_.N;
  const double h = c_.h(), L = c_.Lambda;
  cplx s = 0;
  for (int j = 0; j < N; ++j) {
    cplx d = c_.node(j) - lambda;
    s += f[j] / (d * d);
  }
  s *= h;
  cplx l[4], r[4], I[4], dI[4];
  tail_fit(f, l, r);
  tail_integrals(lambda, L, decay_, I, dI);
  for (int k = 0; k < kTailTerms; ++k) s += r[k] * std::pow(L, decay_ + k) * dI[k];
  tail_integrals(-lambda, L, decay_, I, dI);
  for (int k = 0; k < kTailTerms; ++k) s += l[k] * std::pow(L, decay_ + k) * dI[k];
  cplx fr = 0, dfr = 0, fl = 0, dfl = 0;
  for (int k = 0; k < kTailTerms; ++k) {
    int p = decay_ + k;
    fr += r[k];
    dfr += -double(p) / L * r[k];
    fl += l[k];
    dfl += double(p) / L * l[k];
  }
  auto gprime = [&](double z, cplx fv, cplx dfv) {
    cplx d = z - lambda;
    return dfv / (d * d) - 2.0 * fv / (d * d * d);
  };
  s += h * h / 24.0 * (gprime(L, fr, dfr) - gprime(-L, fl, dfl));
  return s / (2.0 * kPi * kI);
}

std::shared_ptr<const CauchyOperator> cauchy_operator(const Contour& c, int decay_tail) {
  static std::mutex mu;
  static std::map<std::tuple<double, int, int>, std::shared_ptr<const CauchyOperator>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_tuple(c.Lambda, c.N, decay_tail);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  auto op = std::make_shared<const CauchyOperator>(c, decay_tail);
  cache.emplace(key, op);
  return op;
}

// ---------------------------------------------------------------------------

namespace {

void check_tails(const ContourFunction& f, const CauchyOperator& op) {
  const int N = f.N();
  double sup = 0;
  for (const auto& z : f.samples) sup = std::max(sup, std::abs(z));
  if (sup == 0) return;
  for (int e = 0; e < f.entries(); ++e) {
    const cplx* p = f.entry(e);
    cplx l[4], r[4];
    op.tail_fit(p, l, r);
    // Residual of the tail model on the outermost nodes.
    double worst = 0;
    for (int w = 0; w < std::max(8, N / 8); ++w) {
      double tr = f.contour.Lambda / std::abs(f.contour.node(N - 1 - w));
      double tl = f.contour.Lambda / std::abs(f.contour.node(w));
      cplx mr = 0, ml = 0;
      for (int k = 0; k < 4; ++k) {
        mr += r[k] * std::pow(tr, f.decay_tail + k);
        ml += l[k] * std::pow(tl, f.decay_tail + k);
      }
      worst = std::max({worst, std::abs(mr - p[N - 1 - w]), std::abs(ml - p[w])});
    }
    if (worst > 1e-6 * sup)
      throw WardError(ErrorKind::TailError,
                      "density does not decay as asserted (tail model residual " + std::to_string(worst) +
                          ", tail mass " + std::to_string(op.tail_mass(p)) + ")",
                      op.tail_mass(p));
  }
}

}  // namespace

CMat cauchy_transform(const ContourFunction& f, cplx lambda) {
  auto op = cauchy_operator(f.contour, f.decay_tail);
  CMat m(f.rows, f.cols);
  for (int e = 0; e < f.entries(); ++e) m(e / f.cols, e % f.cols) = op->transform(f.entry(e), lambda);
  return m;
}

std::pair<ContourFunction, ContourFunction> cauchy_boundary(const ContourFunction& f) {
  auto op = cauchy_operator(f.contour, f.decay_tail);
  check_tails(f, *op);
  ContourFunction p = f, m = f;
  for (int e = 0; e < f.entries(); ++e) {
    op->plus(f.entry(e), p.entry(e));
    op->minus(f.entry(e), m.entry(e));
  }
  return {p, m};
}

CVec hilbert_reference(const Contour& c, const cplx* f) {
  const int N = c.N;
  const double h = c.h();
  // sixth-order central differences for f' at the node itself
  static const double w6[3] = {3.0 / 4, -3.0 / 20, 1.0 / 60};
  CVec out(N);
  for (int j = 0; j < N; ++j) {
    cplx d = 0;
    for (int s = 1; s <= 3; ++s) {
      cplx fp = j + s < N ? f[j + s] : 0.0, fm = j - s >= 0 ? f[j - s] : 0.0;
      d += w6[s - 1] * (fp - fm);
    }
    d /= h;
    cplx sum = h * d;
    for (int k = 0; k < N; ++k) {
      if (k == j) continue;
      double t = c.node(k) - c.node(j);
      sum += h * (f[k] - f[j] * std::exp(-t * t)) / t;
    }
    out[j] = sum / kPi;
  }
  return out;
}

double calibrate_cminus_norm(const Contour& c, int decay_tail) {
  auto op = cauchy_operator(c, decay_tail);
  const int N = c.N;
  CVec x(N), y(N);
  for (int j = 0; j < N; ++j) {
    double z = c.node(j) / (0.1 * c.Lambda);
    x[j] = std::exp(-z * z) * cplx(1, 0.3 * z);
  }
  double est = 0;
  for (int it = 0; it < 200; ++it) {
    double nx = 0;
    for (auto& v : x) nx += std::norm(v);
    nx = std::sqrt(nx);
    for (auto& v : x) v /= nx;
    op->minus(x.data(), y.data());
    double ny = 0;
    for (auto& v : y) ny += std::norm(v);
    est = std::sqrt(ny);
    x = y;
  }
  return est;
}

// ---------------------------------------------------------------------------

CMat RhpSolution::evaluate(cplx lambda) const {
  const int n = density.rows;
  CMat m = CMat::Identity(n, n);
  for (int e = 0; e < n * n; ++e) m(e / n, e % n) += op->transform(density.entry(e), lambda);
  return m;
}

CMat RhpSolution::derivative(cplx lambda) const {
  const int n = density.rows;
  CMat m(n, n);
  for (int e = 0; e < n * n; ++e) m(e / n, e % n) = op->transform_derivative(density.entry(e), lambda);
  return m;
}

namespace {

// (1/2 pi i) int f over the whole line: midpoint sum plus modelled tails.
cplx line_integral(const CauchyOperator& op, const cplx* f) {
  const Contour& c = op.contour();
  cplx s = 0;
  for (int j = 0; j < c.N; ++j) s += f[j];
  s *= c.h();
  cplx l[4], r[4];
  op.tail_fit(f, l, r);
  cplx dfr = 0, dfl = 0;
  for (int k = 0; k < 4; ++k) {
    int p = op.decay_tail() + k;
    if (p > 1) s += (l[k] + r[k]) * c.Lambda / double(p - 1);
    dfr += -double(p) / c.Lambda * r[k];
    dfl += double(p) / c.Lambda * l[k];
  }
  s += c.h() * c.h() / 24.0 * (dfr - dfl);
  return s / (2.0 * kPi * kI);
}

}  // namespace

CMat RhpSolution::first_moment() const {
  const int n = density.rows;
  CMat m(n, n);
  for (int e = 0; e < n * n; ++e) m(e / n, e % n) = line_integral(*op, density.entry(e));
  return m;
}

double jump_residual(const ContourFunction& plus, const ContourFunction& minus, const ContourFunction& v,
                     int edge) {
  double worst = 0;
  for (int j = edge; j < v.N() - edge; ++j)
    worst = std::max(worst, (plus.at(j) - minus.at(j) * v.at(j)).norm());
  return worst;
}

RhpSolution solve_rhp_small(const ContourFunction& v, const RhpOptions& opt) {
  if (v.rows != v.cols) throw WardError(ErrorKind::InvalidInput, "jump must be square");
  if (!v.all_finite()) throw WardError(ErrorKind::InvalidInput, "non-finite jump samples");
  const int n = v.rows, N = v.N();
  ContourFunction w = v - ContourFunction::identity(v.contour, n);
  w.decay_tail = v.decay_tail;
  RhpSolution sol;
  sol.op = cauchy_operator(v.contour, v.decay_tail);
  double cn = opt.cminus_norm > 0 ? opt.cminus_norm : 1.0;
  sol.gate_value = w.sup_norm() * cn;
  if (opt.enforce_gate && sol.gate_value >= 1)
    throw WardError(ErrorKind::SmallJumpViolation,
                    "|v - 1| |C_-| = " + std::to_string(sol.gate_value) + " is not below 1", sol.gate_value);
  const CauchyOperator& op = *sol.op;

  // Unknown m = mu - 1, rows decoupled: m - C_-(m w) = C_-(e_r w).
  auto mult_w = [&](const cplx* x, cplx* out) {  // (x w)_b = sum_c x_c w_cb
    for (int b = 0; b < n; ++b)
      for (int j = 0; j < N; ++j) {
        cplx s = 0;
        for (int c = 0; c < n; ++c) s += x[size_t(c) * N + j] * w.samples[size_t(c * n + b) * N + j];
        out[size_t(b) * N + j] = s;
      }
  };
  ContourFunction mu = ContourFunction::identity(v.contour, n);
  mu.decay_tail = v.decay_tail;
  bool dense = opt.method == SolveMethod::Dense || (opt.method == SolveMethod::Auto && n * N <= 2048);
  std::vector<CVec> rhs(n, CVec(size_t(n) * N));
  CVec tmp(size_t(n) * N), er(size_t(n) * N);
  for (int r = 0; r < n; ++r) {
    std::fill(er.begin(), er.end(), cplx(0));
    std::fill_n(er.begin() + size_t(r) * N, N, cplx(1));
    mult_w(er.data(), tmp.data());
    for (int b = 0; b < n; ++b) op.minus(tmp.data() + size_t(b) * N, rhs[r].data() + size_t(b) * N);
  }
  if (dense) {
    CMat Cm(N, N);
    CVec unit(N, 0.0), col(N);
    for (int k = 0; k < N; ++k) {
      unit[k] = 1;
      op.minus(unit.data(), col.data());
      for (int j = 0; j < N; ++j) Cm(j, k) = col[j];
      unit[k] = 0;
    }
    CMat A = CMat::Identity(size_t(n) * N, size_t(n) * N);
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int k = 0; k < N; ++k) {
          cplx wk = w.samples[size_t(c * n + b) * N + k];
          if (wk == cplx(0)) continue;
          for (int j = 0; j < N; ++j) A(size_t(b) * N + j, size_t(c) * N + k) -= Cm(j, k) * wk;
        }
    Eigen::PartialPivLU<CMat> lu(A);
    for (int r = 0; r < n; ++r) {
      Eigen::Map<const Eigen::VectorXcd> bvec(rhs[r].data(), size_t(n) * N);
      Eigen::VectorXcd x = lu.solve(bvec);
      if (!x.allFinite()) throw WardError(ErrorKind::SmallJumpViolation, "singular small-jump system");
      for (int c = 0; c < n; ++c)
        for (int j = 0; j < N; ++j) mu.samples[size_t(r * n + c) * N + j] += x[size_t(c) * N + j];
    }
    sol.iterations = 1;
  } else {
    auto apply = [&](const CVec& x, CVec& out) {
      mult_w(x.data(), tmp.data());
      out.resize(x.size());
      for (int b = 0; b < n; ++b) op.minus(tmp.data() + size_t(b) * N, out.data() + size_t(b) * N);
      for (size_t p = 0; p < x.size(); ++p) out[p] = x[p] - out[p];
    };
    for (int r = 0; r < n; ++r) {
      GmresResult gr = gmres(apply, rhs[r], opt.gmres_tol, opt.gmres_max_iter, 60);
      if (!gr.converged)
        throw WardError(ErrorKind::SmallJumpViolation,
                        "small-jump GMRES stalled (residual " + std::to_string(gr.residual) + ")", gr.residual);
      sol.iterations = std::max(sol.iterations, gr.iterations);
      for (int c = 0; c < n; ++c)
        for (int j = 0; j < N; ++j) mu.samples[size_t(r * n + c) * N + j] += gr.x[size_t(c) * N + j];
    }
  }
  sol.psi_minus = mu;
  sol.density = ContourFunction::zeros(v.contour, n, n, v.decay_tail);
  for (int r = 0; r < n; ++r) mult_w(mu.samples.data() + size_t(r) * n * N, sol.density.samples.data() + size_t(r) * n * N);
  sol.psi_plus = ContourFunction::identity(v.contour, n);
  sol.psi_plus.decay_tail = v.decay_tail;
  CVec cp(N);
  for (int e = 0; e < n * n; ++e) {
    op.plus(sol.density.entry(e), cp.data());
    for (int j = 0; j < N; ++j) sol.psi_plus.entry(e)[j] += cp[j];
  }
  sol.jump_residual = jump_residual(sol.psi_plus, sol.psi_minus, v);
  return sol;
}

// ---------------------------------------------------------------------------

WindingResult winding_number(const ContourFunction& delta, int entry, double tol) {
  const int N = delta.N();
  const cplx* d = delta.entry(entry);
  double mn = INFINITY;
  for (int j = 0; j < N; ++j) mn = std::min(mn, std::abs(d[j]));
  if (mn <= tol) throw WardError(ErrorKind::ZeroOnContour, "entry vanishes on the contour", mn);
  double theta = std::arg(d[0]);
  for (int j = 1; j < N; ++j) {
    double step = std::arg(d[j] / d[j - 1]);
    theta += step;
  }
  // tails: arg -> 0 at both infinities, the left one is already included
  double total = theta - std::arg(d[N - 1]);
  double w = -total / (2 * kPi);
  WindingResult r;
  r.winding = int(std::lround(w));
  r.rounding_defect = std::abs(w - r.winding);
  return r;
}

CMat DiagonalSolution::evaluate(cplx lambda) const {
  const int n = plus.rows;
  CMat m = CMat::Zero(n, n);
  for (int a = 0; a < n; ++a) m(a, a) = std::exp(op->transform(log_delta.entry(a), lambda));
  return m;
}

CMat DiagonalSolution::derivative(cplx lambda) const {
  const int n = plus.rows;
  CMat m = CMat::Zero(n, n);
  for (int a = 0; a < n; ++a)
    m(a, a) = std::exp(op->transform(log_delta.entry(a), lambda)) *
              op->transform_derivative(log_delta.entry(a), lambda);
  return m;
}

DiagonalSolution solve_scalar_rhp(const ContourFunction& delta) {
  if (delta.rows != delta.cols) throw WardError(ErrorKind::InvalidInput, "diagonal jump must be square");
  const int n = delta.rows, N = delta.N();
  DiagonalSolution s;
  s.op = cauchy_operator(delta.contour, delta.decay_tail);
  s.log_delta = ContourFunction::zeros(delta.contour, n, 1, delta.decay_tail);
  s.plus = ContourFunction::zeros(delta.contour, n, n, delta.decay_tail);
  s.minus = s.plus;
  CVec cp(N), cm(N);
  for (int a = 0; a < n; ++a) {
    const int e = a * n + a;
    WindingResult wr = winding_number(delta, e);
    if (wr.winding != 0)
      throw WardError(ErrorKind::WindingObstruction,
                      "diagonal entry " + std::to_string(a) + " has winding number " + std::to_string(wr.winding),
                      wr.winding);
    const cplx* d = delta.entry(e);
    cplx* L = s.log_delta.entry(a);
    double theta = std::arg(d[0]);
    L[0] = cplx(std::log(std::abs(d[0])), theta);
    for (int j = 1; j < N; ++j) {
      theta += std::arg(d[j] / d[j - 1]);
      L[j] = cplx(std::log(std::abs(d[j])), theta);
    }
    s.op->plus(L, cp.data());
    s.op->minus(L, cm.data());
    for (int j = 0; j < N; ++j) {
      s.plus.entry(e)[j] = std::exp(cp[j]);
      s.minus.entry(e)[j] = std::exp(cm[j]);
    }
  }
  return s;
}

// ---------------------------------------------------------------------------

namespace {

cplx minor_det(const CMat& A, const std::vector<int>& rows, const std::vector<int>& cols) {
  CMat m(rows.size(), cols.size());
  for (size_t a = 0; a < rows.size(); ++a)
    for (size_t b = 0; b < cols.size(); ++b) m(a, b) = A(rows[a], cols[b]);
  return m.determinant();
}

}  // namespace

LDU ldu_factorize(const CMat& A, double tol) {
  const int n = int(A.rows());
  if (A.cols() != n) throw WardError(ErrorKind::InvalidInput, "ldu_factorize needs a square matrix");
  LDU r;
  r.C = CMat::Identity(n, n);
  r.B = CMat::Identity(n, n);
  r.S = CMat::Zero(n, n);
  double scale = std::max(A.cwiseAbs().maxCoeff(), 1e-300);
  std::vector<int> lead;
  for (int i = 0; i < n; ++i) {
    lead.push_back(i);
    cplx d = minor_det(A, lead, lead);
    if (std::abs(d) <= tol * std::pow(scale, i + 1))
      throw WardError(ErrorKind::MinorSingular, "principal minor " + std::to_string(i + 1) + " vanishes",
                      i + 1);
    r.minors.push_back(d);
  }
  for (int i = 0; i < n; ++i) {
    r.S(i, i) = i == 0 ? r.minors[0] : r.minors[i] / r.minors[i - 1];
    std::vector<int> base(lead.begin(), lead.begin() + i);  // 0..i-1
    for (int k = i + 1; k < n; ++k) {
      auto rows = base;
      rows.push_back(k);
      auto cols = base;
      cols.push_back(i);
      r.C(k, i) = minor_det(A, rows, cols) / r.minors[i];  // gamma_ki / gamma_ii
      rows = base;
      rows.push_back(i);
      cols = base;
      cols.push_back(k);
      r.B(i, k) = minor_det(A, rows, cols) / r.minors[i];  // beta_ik / beta_ii
    }
  }
  return r;
}

TriangularFactorization triangular_split(const ContourFunction& v, double positivity_tol) {
  const int n = v.rows, N = v.N();
  TriangularFactorization t;
  t.chi = ContourFunction::zeros(v.contour, n, n, v.decay_tail);
  t.h_u = t.chi;
  t.h_l = t.chi;
  CMat I = CMat::Identity(n, n);
  for (int j = 0; j < N; ++j) {
    CMat A = v.at(j);
    double herm = (A - A.adjoint()).norm();
    if (herm > positivity_tol * std::max(1.0, A.norm()))
      throw WardError(ErrorKind::NotPositive, "jump is not Hermitian at node " + std::to_string(j), herm);
    Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (A + A.adjoint()));
    if (es.eigenvalues().minCoeff() <= 0)
      throw WardError(ErrorKind::NotPositive, "jump is not positive definite at node " + std::to_string(j),
                      es.eigenvalues().minCoeff());
    LDU f = ldu_factorize(A);
    CMat hl = CMat(f.C.inverse()) - I;
    hl = hl.triangularView<Eigen::StrictlyLower>();
    CMat hu = f.B - I;
    t.chi.set(j, f.S);
    t.h_u.set(j, hu);
    t.h_l.set(j, hl);
    CMat rec = (I + hl).inverse() * f.S * (I + hu);
    t.reconstruction_error = std::max(t.reconstruction_error, (rec - A).norm() / std::max(1.0, A.norm()));
  }
  return t;
}

}  // namespace ward
