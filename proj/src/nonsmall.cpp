#include <algorithm>
#include <cmath>

#include "ward/fft.hpp"
#include "ward/forward.hpp"
#include "ward/linalg.hpp"

namespace ward {

namespace {

double smoothstep(double t) {
  if (t <= 0) return 0;
  if (t >= 1) return 1;
  return t * t * t * (10 - 15 * t + 6 * t * t);
}

std::vector<double> row_masses(const PotentialField& Q) {
  const Grid2D& g = Q.grid();
  MatrixField qh = fourier_x(Q.q_x);
  double dxi = 2 * kPi / g.length_x();
  std::vector<double> m(g.ny, 0.0);
  const size_t P = qh.plane();
  for (int j = 0; j < g.ny; ++j)
    for (int k = 0; k < g.nx; ++k) {
      if (k == g.nx / 2) continue;
      double s = 0;
      for (int e = 0; e < Q.n() * Q.n(); ++e) s += std::norm(qh.data[e * P + size_t(j) * g.nx + k]);
      m[j] += std::sqrt(s) * dxi * g.dy();
    }
  return m;
}

PotentialField scaled(const PotentialField& Q, const std::function<double(double)>& chi) {
  PotentialField R = Q;
  const Grid2D& g = Q.grid();
  const size_t P = R.q.plane();
  for (int e = 0; e < Q.n() * Q.n(); ++e)
    for (int j = 0; j < g.ny; ++j) {
      double c = chi(g.y(j));
      for (int i = 0; i < g.nx; ++i) {
        R.q.data[e * P + size_t(j) * g.nx + i] *= c;
        R.q_x.data[e * P + size_t(j) * g.nx + i] *= c;
      }
    }
  if (Q.q_at) {
    auto f = Q.q_at;
    R.q_at = [f, chi](double x, double y) -> CMat { return chi(y) * f(x, y); };
  }
  if (Q.q_x_at) {
    auto f = Q.q_x_at;
    R.q_x_at = [f, chi](double x, double y) -> CMat { return chi(y) * f(x, y); };
  }
  R.decay_class = DecayClass{};
  R.decay_class.p1_value = compute_p1_norm(R);
  R.decay_class.p1_member = R.decay_class.p1_value < 1;
  return R;
}

// Evaluate sum_k c_k e^{i xi_k (x_i + delta)} for all x nodes, c in FFT order.
void evaluate_shifted(const Grid2D& g, int n, const CVec& coef, cplx delta, CVec& out) {
  out = coef;
  for (int e = 0; e < n * n; ++e)
    for (int k = 0; k < g.nx; ++k) {
      cplx c = out[size_t(e) * g.nx + k];
      if (c != cplx(0)) out[size_t(e) * g.nx + k] = c * std::exp(kI * g.xi(k) * delta);
    }
  fft::rows(out.data(), g.nx, n * n, +1);
}

}  // namespace

SplitInfo choose_split(const PotentialField& Q) {
  const Grid2D& g = Q.grid();
  auto m = row_masses(Q);
  std::vector<double> cum(g.ny + 1, 0.0);
  for (int j = 0; j < g.ny; ++j) cum[j + 1] = cum[j] + m[j];
  double half = cum[g.ny] / 2;
  // cumulative mass as a continuous piecewise-linear function of y;
  // bisection for the equal-halves point
  auto mass_below = [&](double y) {
    double t = (y - (g.y_min - 0.5 * g.dy())) / g.dy();
    if (t <= 0) return 0.0;
    if (t >= g.ny) return cum[g.ny];
    int j = int(t);
    return cum[j] + (t - j) * m[j];
  };
  double lo = g.y_min - g.dy(), hi = g.y(g.ny - 1) + g.dy();
  for (int it = 0; it < 100; ++it) {
    double mid = 0.5 * (lo + hi);
    if (mass_below(mid) < half)
      lo = mid;
    else
      hi = mid;
  }
  SplitInfo s;
  s.j0 = std::clamp(int(std::lround((0.5 * (lo + hi) - g.y_min) / g.dy())), 2, g.ny - 3);
  s.y0 = g.y(s.j0);
  auto [qm, qp] = split_potential(Q, s);
  s.p1_minus = qm.decay_class.p1_value;
  s.p1_plus = qp.decay_class.p1_value;
  return s;
}

std::pair<PotentialField, PotentialField> split_potential(const PotentialField& Q, const SplitInfo& s) {
  double y0 = s.y0;
  auto chi_minus = [y0](double y) { return 1.0 - smoothstep(y - y0); };
  auto chi_plus = [y0](double y) { return smoothstep(y - (y0 - 1.0)); };
  return {scaled(Q, chi_minus), scaled(Q, chi_plus)};
}

Eigenfunction eigenfunction_split(const PotentialField& Q, cplx lambda, Side side, int depth,
                                  const NeumannOptions& opt) {
  if (depth <= 0) return eigenfunction(Q, lambda, side, opt);
  const Grid2D& g = Q.grid();
  const int n = Q.n(), nx = g.nx;
  SplitInfo s = choose_split(Q);
  auto [Qm, Qp] = split_potential(Q, s);
  Eigenfunction Em = eigenfunction_split(Qm, lambda, side, depth - 1, opt);
  Eigenfunction Ep = eigenfunction_split(Qp, lambda, side, depth - 1, opt);
  const int j0 = s.j0;
  int sgn = lambda.imag() > 0 ? 1 : (lambda.imag() < 0 ? -1 : (side == Side::Upper ? 1 : -1));

  // Jump on the periodic w-line (w = x + lambda (y - y0) real at y = y0).
  std::vector<CMat> J(nx);
  for (int i = 0; i < nx; ++i) {
    CMat F = Em.psi.node(i, j0).inverse() * Ep.psi.node(i, j0);
    J[i] = sgn > 0 ? F : CMat(F.inverse());
  }
  // Upper/lower Fourier mode sets. The constant mode sits on the side whose
  // normalisation is free (upper for sgn > 0, lower for sgn < 0).
  std::vector<char> upper(nx, 0);
  for (int k = 0; k < nx; ++k) {
    if (k == nx / 2) continue;
    double xi = g.xi(k);
    upper[k] = (xi > 0) || (xi == 0 && sgn > 0);
  }
  // Row-decoupled system u + P_L(u (J - 1)) = e_r for the lower boundary values.
  CVec work(size_t(n) * nx);
  auto apply = [&](const CVec& u, CVec& out) {
    for (int b = 0; b < n; ++b)
      for (int i = 0; i < nx; ++i) {
        cplx s2 = 0;
        for (int c = 0; c < n; ++c) s2 += u[size_t(c) * nx + i] * (J[i](c, b) - (c == b ? 1.0 : 0.0));
        work[size_t(b) * nx + i] = s2;
      }
    fft::rows(work.data(), nx, n, -1);
    for (int b = 0; b < n; ++b)
      for (int k = 0; k < nx; ++k) work[size_t(b) * nx + k] *= upper[k] ? 0.0 : 1.0 / nx;
    fft::rows(work.data(), nx, n, +1);
    out.resize(u.size());
    for (size_t p = 0; p < u.size(); ++p) out[p] = u[p] + work[p];
  };
  std::vector<CMat> fm(nx, CMat::Zero(n, n)), fp(nx);
  for (int r = 0; r < n; ++r) {
    CVec b(size_t(n) * nx, 0.0);
    for (int i = 0; i < nx; ++i) b[size_t(r) * nx + i] = 1.0;
    GmresResult gr = gmres(apply, b, 1e-14, 600, 80);
    if (!gr.converged || !std::isfinite(gr.residual))
      throw WardError(ErrorKind::SuspectedPole,
                      "z-variable RHP solve failed near lambda = " + std::to_string(lambda.real()) + "+" +
                          std::to_string(lambda.imag()) + "i (residual " + std::to_string(gr.residual) + ")",
                      lambda.real());
    for (int c = 0; c < n; ++c)
      for (int i = 0; i < nx; ++i) fm[i](r, c) = gr.x[size_t(c) * nx + i];
  }
  for (int i = 0; i < nx; ++i) {
    fp[i] = fm[i] * J[i];
    if (std::abs(fm[i].determinant()) < 1e-8)
      throw WardError(ErrorKind::SuspectedPole, "z-variable RHP solution degenerates (det ~ 0)", lambda.real());
  }
  // Fourier coefficients of the sectional pieces.
  CVec cu(size_t(n) * n * nx), cl(size_t(n) * n * nx);
  for (int e = 0; e < n * n; ++e)
    for (int i = 0; i < nx; ++i) {
      cu[size_t(e) * nx + i] = fp[i](e / n, e % n);
      cl[size_t(e) * nx + i] = fm[i](e / n, e % n);
    }
  fft::rows(cu.data(), nx, n * n, -1);
  fft::rows(cl.data(), nx, n * n, -1);
  for (int e = 0; e < n * n; ++e)
    for (int k = 0; k < nx; ++k) {
      bool keep_u = upper[k] || k == 0;
      bool keep_l = !upper[k] || k == 0;
      cu[size_t(e) * nx + k] = keep_u ? cu[size_t(e) * nx + k] / double(nx) : 0.0;
      cl[size_t(e) * nx + k] = keep_l ? cl[size_t(e) * nx + k] / double(nx) : 0.0;
    }
  // Glue: Psi = Psi^+ a^+ above the split row, Psi^- a^- below, a = f^{-1}.
  Eigenfunction out;
  out.lambda = lambda;
  out.side = side;
  out.psi = MatrixField(n, g);
  CVec vals;
  for (int j = 0; j < g.ny; ++j) {
    bool above = j >= j0;
    bool use_upper = (sgn > 0) == above;
    cplx delta = lambda * (g.y(j) - s.y0);
    evaluate_shifted(g, n, use_upper ? cu : cl, delta, vals);
    const MatrixField& base = above ? Ep.psi : Em.psi;
    for (int i = 0; i < nx; ++i) {
      CMat f(n, n);
      for (int e = 0; e < n * n; ++e) f(e / n, e % n) = vals[size_t(e) * nx + i];
      out.psi.set_node(i, j, base.node(i, j) * f.inverse());
    }
  }
  out.det_defect = det_defect(out.psi);
  for (int i = 0; i < nx; ++i)
    out.edge_defect = std::max(out.edge_defect, (out.psi.node(i, 0) - CMat::Identity(n, n)).norm());
  return out;
}

NonsmallResult forward_nonsmall(const PotentialField& Q, int depth, const std::vector<double>& lambdas,
                                ForwardOptions opt) {
  if (depth < 1 || depth > 2) throw WardError(ErrorKind::InvalidInput, "splitting depth must be 1 or 2");
  double p1 = compute_p1_norm(Q);
  if (p1 >= std::pow(1.5, depth))
    throw WardError(ErrorKind::SmallDataViolation, "P1 exceeds (3/2)^depth", p1);
  NonsmallResult r;
  r.split = choose_split(Q);
  opt.depth = depth;
  r.forward = forward_scattering(Q, lambdas, opt);
  return r;
}

}  // namespace ward
