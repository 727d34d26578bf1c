#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "ward/oracle.hpp"

namespace ward {

std::string to_json(const std::vector<OracleReport>& reports) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : reports)
    arr.push_back({{"compared_quantity", r.compared_quantity},
                   {"sup_difference", r.sup_difference},
                   {"grids", r.grids},
                   {"tolerance", r.tolerance},
                   {"verdict", r.verdict ? "pass" : "fail"},
                   {"note", r.note}});
  return nlohmann::json{{"schema_version", 1}, {"reports", arr}}.dump(2);
}

// ---- dense Volterra --------------------------------------------------------

namespace {

// (e^z - 1)/z
cplx phi1(cplx z) {
  if (std::abs(z) < 1e-3) return 1.0 + z / 2.0 + z * z / 6.0 + z * z * z / 24.0;
  return (std::exp(z) - 1.0) / z;
}

struct DenseDft {
  int nx;
  double dx, L;
  std::vector<double> xi;
  CVec fwd, inv;  // fwd[k*nx + i] = dx e^{-i xi_k x_i}, inv[i*nx + k] = e^{i xi_k x_i}/L
  explicit DenseDft(const Grid2D& g) : nx(g.nx), dx(g.dx()), L(g.length_x()), xi(nx), fwd(size_t(nx) * nx), inv(fwd.size()) {
    for (int k = 0; k < nx; ++k) {
      int m = k < nx / 2 ? k : k - nx;
      xi[k] = 2 * kPi * m / L;
    }
    for (int k = 0; k < nx; ++k)
      for (int i = 0; i < nx; ++i) {
        double ph = xi[k] * g.x(i);
        fwd[size_t(k) * nx + i] = dx * std::polar(1.0, -ph);
        inv[size_t(i) * nx + k] = k == nx / 2 ? cplx(0) : std::polar(1.0, ph) / L;
      }
  }
};

}  // namespace

VolterraOracleResult dense_volterra_oracle(const PotentialField& Q, cplx lambda, const NeumannOptions& opt) {
  const Grid2D& g = Q.grid();
  const int nx = g.nx, ny = g.ny, n = Q.n();
  if (nx > 64 || ny > 64) throw WardError(ErrorKind::InvalidInput, "dense oracle is limited to 64 x 64 grids");
  if (lambda.imag() == 0) throw WardError(ErrorKind::InvalidInput, "dense oracle needs Im lambda != 0");
  if (opt.enforce_gate) {
    double p1 = compute_p1_norm(Q);
    if (p1 >= 1) throw WardError(ErrorKind::SmallDataViolation, "small-data gate failed", p1);
  }
  DenseDft dft(g);
  const int sgn = lambda.imag() > 0 ? 1 : -1;
  const double Ly = g.y_max - g.y_min, dy = g.dy();
  // y-kernel per mode: Y[(k*ny + j)*ny + m] maps interpolation coefficient m to the value at y_j.
  CVec Y(size_t(nx) * ny * ny);
  for (int k = 0; k < nx; ++k) {
    if (k == nx / 2) continue;
    cplx mu = kI * lambda * dft.xi[k];
    bool below = dft.xi[k] == 0 || dft.xi[k] * sgn > 0;
    for (int j = 0; j < ny; ++j) {
      double s = j * dy;
      for (int m = 0; m < ny; ++m) {
        int mm = m < ny / 2 ? m : m - ny;
        cplx a = kI * (2 * kPi * mm / Ly);
        cplx d = a - mu, val;
        if (below) {
          // int_0^s e^{mu (s-u)} e^{a u} du
          val = std::abs(d * s) < 1e-3 ? std::exp(mu * s) * s * phi1(d * s) : (std::exp(a * s) - std::exp(mu * s)) / d;
        } else {
          // -int_s^Ly e^{mu (s-u)} e^{a u} du
          double r = Ly - s;
          val = std::abs(d * r) < 1e-3 ? -std::exp(a * s) * r * phi1(d * r)
                                       : -(std::exp(a * Ly) * std::exp(mu * (s - Ly)) - std::exp(a * s)) / d;
        }
        if (mm == -ny / 2) {
          // Nyquist: split evenly between +/- the top frequency
          cplx a2 = -a, d2 = a2 - mu, v2;
          if (below)
            v2 = std::abs(d2 * s) < 1e-3 ? std::exp(mu * s) * s * phi1(d2 * s) : (std::exp(a2 * s) - std::exp(mu * s)) / d2;
          else {
            double r = Ly - s;
            v2 = std::abs(d2 * r) < 1e-3 ? -std::exp(a2 * s) * r * phi1(d2 * r)
                                         : -(std::exp(a2 * Ly) * std::exp(mu * (s - Ly)) - std::exp(a2 * s)) / d2;
          }
          val = 0.5 * (val + v2);
        }
        Y[(size_t(k) * ny + j) * ny + m] = val;
      }
    }
  }
  // y-interpolation coefficients c_m = (1/ny) sum_j F_j e^{-i eta_m s_j}
  CVec cy(size_t(ny) * ny);
  for (int m = 0; m < ny; ++m)
    for (int j = 0; j < ny; ++j) cy[size_t(m) * ny + j] = std::polar(1.0 / ny, -2 * kPi * double(m) * j / ny);

  auto integrate = [&](const MatrixField& Fh, MatrixField& out) {
    CVec col(ny), coef(ny);
    for (int e = 0; e < n * n; ++e)
      for (int k = 0; k < nx; ++k) {
        for (int j = 0; j < ny; ++j) col[j] = Fh.data[Fh.idx(e / n, e % n, k, j)];
        for (int m = 0; m < ny; ++m) {
          cplx acc = 0;
          for (int j = 0; j < ny; ++j) acc += cy[size_t(m) * ny + j] * col[j];
          coef[m] = acc;
        }
        for (int j = 0; j < ny; ++j) {
          cplx acc = 0;
          if (k != nx / 2)
            for (int m = 0; m < ny; ++m) acc += Y[(size_t(k) * ny + j) * ny + m] * coef[m];
          out.data[out.idx(e / n, e % n, k, j)] = acc;
        }
      }
  };
  auto forward_dft = [&](const MatrixField& f) {
    MatrixField h(n, g);
    for (int e = 0; e < n * n; ++e)
      for (int j = 0; j < ny; ++j)
        for (int k = 0; k < nx; ++k) {
          cplx acc = 0;
          for (int i = 0; i < nx; ++i) acc += dft.fwd[size_t(k) * nx + i] * f.data[f.idx(e / n, e % n, i, j)];
          h.data[h.idx(e / n, e % n, k, j)] = acc;
        }
    return h;
  };
  auto inverse_dft = [&](const MatrixField& h) {
    MatrixField f(n, g);
    for (int e = 0; e < n * n; ++e)
      for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
          cplx acc = 0;
          for (int k = 0; k < nx; ++k) acc += dft.inv[size_t(i) * nx + k] * h.data[h.idx(e / n, e % n, k, j)];
          f.data[f.idx(e / n, e % n, i, j)] = acc;
        }
    return f;
  };
  auto sup_l1 = [&](const MatrixField& d) {
    double best = 0;
    for (int j = 0; j < ny; ++j) {
      double s = 0;
      for (int k = 0; k < nx; ++k) s += d.node(k, j).norm();
      best = std::max(best, s * 2 * kPi / dft.L);
    }
    return best;
  };

  VolterraOracleResult res;
  res.w_hat = MatrixField(n, g);
  MatrixField qxh = forward_dft(Q.q_x);
  MatrixField next(n, g);
  for (int it = 1; it <= opt.max_iter; ++it) {
    MatrixField Fh;
    if (it == 1) {
      Fh = qxh;
    } else {
      MatrixField W = inverse_dft(res.w_hat), F(n, g);
      for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
          CMat q = Q.q_x.node(i, j);
          F.set_node(i, j, q + q * W.node(i, j));
        }
      Fh = forward_dft(F);
    }
    integrate(Fh, next);
    double inc = sup_l1(next - res.w_hat);
    if (!res.increments.empty() && res.increments.back() > 0)
      res.contraction_ratio = std::max(res.contraction_ratio, inc / res.increments.back());
    res.increments.push_back(inc);
    res.w_hat = next;
    res.iterations = it;
    if (inc < opt.tol) return res;
  }
  if (opt.throw_on_limit)
    throw WardError(ErrorKind::IterationLimit, "dense oracle did not converge", res.increments.back());
  return res;
}

// ---- Green's function ------------------------------------------------------

namespace {

cplx cot_stable(cplx z) {
  if (z.imag() >= 0) {
    cplx w = std::exp(2.0 * kI * z);
    return kI * (w + 1.0) / (w - 1.0);
  }
  cplx w = std::exp(-2.0 * kI * z);
  return kI * (1.0 + w) / (1.0 - w);
}

// Antiderivative in y of log(A + lambda y); `sign` picks the side of the cut at y = 0.
cplx log_antiderivative(double A, double y, cplx lambda, double sign) {
  cplx z = y == 0 ? cplx(A, std::copysign(0.0, sign)) : cplx(A) + lambda * y;
  return z * (std::log(z) - 1.0) / lambda;
}

}  // namespace

namespace {

// Trigonometric interpolation of n periodic samples onto n*r points (direct sums).
CVec upsample(const cplx* f, int n, int stride, int r) {
  CVec c(n), out(size_t(n) * r);
  for (int m = 0; m < n; ++m) {
    cplx acc = 0;
    for (int j = 0; j < n; ++j) acc += f[size_t(j) * stride] * std::polar(1.0, -2 * kPi * double(m) * j / n);
    c[m] = acc / double(n);
  }
  for (int p = 0; p < n * r; ++p) {
    double t = double(p) / r;
    cplx acc = 0;
    for (int m = 0; m < n; ++m) {
      int mm = m < n / 2 ? m : m - n;
      if (mm == -n / 2)
        acc += c[m] * std::cos(kPi * t);
      else
        acc += c[m] * std::polar(1.0, 2 * kPi * mm * t / n);
    }
    out[p] = acc;
  }
  return out;
}

}  // namespace

MatrixField greens_apply(const MatrixField& phi, cplx lambda, int refine) {
  if (lambda.imag() == 0) throw WardError(ErrorKind::InvalidInput, "Green's kernel needs Im lambda != 0");
  if (refine < 1) throw WardError(ErrorKind::InvalidInput, "refinement factor must be positive");
  const Grid2D& g = phi.grid;
  const int n = phi.n, r = refine;
  const int nx = g.nx * r, ny = g.ny * r;  // source grid
  const double dx = g.dx() / r, dy = g.dy() / r, L = g.length_x(), area = dx * dy;
  const double sb = lambda.imag() > 0 ? 1.0 : -1.0;
  const cplx c = -sb / (2 * kPi * kI);
  // kernel weights W[(dj + ny - 1)*nx + di] on the source grid
  CVec W(size_t(2 * ny - 1) * nx);
  for (int dj = -(ny - 1); dj < ny; ++dj)
    for (int di = 0; di < nx; ++di) {
      cplx w;
      if (di == 0 && dj == 0) {
        double a = dx / 2, b = dy / 2;
        cplx up = (log_antiderivative(a, b, lambda, sb) - log_antiderivative(a, 0, lambda, sb)) -
                  (log_antiderivative(-a, b, lambda, sb) - log_antiderivative(-a, 0, lambda, sb));
        cplx lo = (log_antiderivative(a, 0, lambda, -sb) - log_antiderivative(a, -b, lambda, -sb)) -
                  (log_antiderivative(-a, 0, lambda, -sb) - log_antiderivative(-a, -b, lambda, -sb));
        // the regular part of the periodised kernel vanishes at the origin
        w = c * (up + lo) + area / (2 * L);
      } else {
        double X = (di <= nx / 2 ? di : di - nx) * dx;
        cplx z = kPi * (X + lambda * (dj * dy)) / L;
        w = area * (c * (kPi / L) * cot_stable(z) + 1.0 / (2 * L));
      }
      W[size_t(dj + ny - 1) * nx + di] = w;
    }
  MatrixField out(n, g);
  for (int e = 0; e < n * n; ++e) {
    const cplx* f0 = phi.data.data() + size_t(e) * phi.plane();
    // refine along x then y; the source vanishes at the y edges, so the
    // periodic interpolant is accurate there too
    CVec fx(size_t(nx) * g.ny), f(size_t(nx) * ny);
    for (int j = 0; j < g.ny; ++j) {
      CVec row = r > 1 ? upsample(f0 + size_t(j) * g.nx, g.nx, 1, r) : CVec(f0 + size_t(j) * g.nx, f0 + size_t(j + 1) * g.nx);
      std::copy(row.begin(), row.end(), fx.begin() + size_t(j) * nx);
    }
    for (int i = 0; i < nx; ++i) {
      CVec col = r > 1 ? upsample(fx.data() + i, g.ny, nx, r) : CVec();
      for (int j = 0; j < ny; ++j) f[size_t(j) * nx + i] = r > 1 ? col[j] : fx[size_t(j) * nx + i];
    }
    cplx* o = out.data.data() + size_t(e) * out.plane();
    for (int jt = 0; jt < g.ny; ++jt)
      for (int it = 0; it < g.nx; ++it) {
        const int j = jt * r, i = it * r;
        cplx acc = 0;
        for (int jp = 0; jp < ny; ++jp) {
          const cplx* wrow = W.data() + size_t(j - jp + ny - 1) * nx;
          const cplx* frow = f.data() + size_t(jp) * nx;
          for (int ip = 0; ip < nx; ++ip) acc += wrow[(i - ip + nx) % nx] * frow[ip];
        }
        o[size_t(jt) * g.nx + it] = acc;
      }
  }
  return out;
}

MatrixField greens_solve(const PotentialField& Q, const MatrixField& psi_trial, cplx lambda, int refine) {
  const Grid2D& g = Q.grid();
  const int n = Q.n();
  MatrixField phi(n, g);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) phi.set_node(i, j, Q.q_x.node(i, j) * psi_trial.node(i, j));
  MatrixField out = greens_apply(phi, lambda, refine);
  for (int a = 0; a < n; ++a)
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) out(a, a, i, j) += 1.0;
  return out;
}

// ---- characteristic transport ----------------------------------------------

namespace {

// q_x at an arbitrary point by trigonometric interpolation in x on the four
// nearest rows and cubic Lagrange interpolation in y.
CMat interpolate_qx(const MatrixField& f, double x, double y) {
  const Grid2D& g = f.grid;
  const int nx = g.nx, ny = g.ny, n = f.n;
  double s = (y - g.y_min) / g.dy();
  int j0 = std::clamp(int(std::floor(s)) - 1, 0, ny - 4);
  CMat out = CMat::Zero(n, n);
  for (int r = 0; r < 4; ++r) {
    int j = j0 + r;
    double wy = 1;
    for (int q = 0; q < 4; ++q)
      if (q != r) wy *= (s - (j0 + q)) / double(r - q);
    if (wy == 0) continue;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        cplx acc = 0;
        for (int k = 0; k < nx; ++k) {
          if (k == nx / 2) continue;
          int m = k < nx / 2 ? k : k - nx;
          double xi = 2 * kPi * m / g.length_x();
          cplx coef = 0;
          for (int i = 0; i < nx; ++i) coef += f(a, b, i, j) * std::polar(1.0, -xi * g.x(i));
          acc += coef * std::polar(1.0, xi * x);
        }
        out(a, b) += wy * acc / double(nx);
      }
  }
  return out;
}

}  // namespace

TransportResult characteristic_transport(const PotentialField& Q, double lambda, double z, int steps) {
  const Grid2D& g = Q.grid();
  const int n = Q.n();
  if (steps < 1) throw WardError(ErrorKind::InvalidInput, "transport needs at least one step");
  TransportResult res;
  auto rhs = [&](double y, const CMat& M) -> CMat {
    double x = z - lambda * y;
    if (x < g.x_min || x > g.x_max) {
      ++res.clipped_steps;
      return CMat::Zero(n, n);
    }
    CMat q = Q.q_x_at ? Q.q_x_at(x, y) : interpolate_qx(Q.q_x, x, y);
    return q * M;
  };
  const double h = (g.y_max - g.y_min) / steps;
  CMat M = CMat::Identity(n, n);
  for (int s = 0; s < steps; ++s) {
    double y = g.y_min + s * h;
    CMat k1 = rhs(y, M);
    CMat k2 = rhs(y + h / 2, M + (h / 2) * k1);
    CMat k3 = rhs(y + h / 2, M + (h / 2) * k2);
    CMat k4 = rhs(y + h, M + h * k3);
    M += (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  res.holonomy = M;
  return res;
}

// ---- finite differences ----------------------------------------------------

MatrixField finite_difference(const MatrixField& f, Axis axis, int order) {
  if (order != 2 && order != 4) throw WardError(ErrorKind::InvalidInput, "finite difference order must be 2 or 4");
  const Grid2D& g = f.grid;
  const int len = axis == Axis::X ? g.nx : g.ny;
  if (len < order + 1) throw WardError(ErrorKind::InvalidInput, "grid too small for the stencil");
  const double h = axis == Axis::X ? g.dx() : g.dy();
  MatrixField out(f.n, g);
  for (int e = 0; e < f.n * f.n; ++e) {
    const int a = e / f.n, b = e % f.n;
    const int lines = axis == Axis::X ? g.ny : g.nx;
    for (int l = 0; l < lines; ++l) {
      auto at = [&](int p) { return axis == Axis::X ? f(a, b, p, l) : f(a, b, l, p); };
      for (int p = 0; p < len; ++p) {
        cplx d;
        if (order == 2) {
          if (p == 0)
            d = (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2 * h);
          else if (p == len - 1)
            d = (3.0 * at(len - 1) - 4.0 * at(len - 2) + at(len - 3)) / (2 * h);
          else
            d = (at(p + 1) - at(p - 1)) / (2 * h);
        } else {
          if (p == 0)
            d = (-25.0 * at(0) + 48.0 * at(1) - 36.0 * at(2) + 16.0 * at(3) - 3.0 * at(4)) / (12 * h);
          else if (p == 1)
            d = (-3.0 * at(0) - 10.0 * at(1) + 18.0 * at(2) - 6.0 * at(3) + at(4)) / (12 * h);
          else if (p == len - 2)
            d = (3.0 * at(len - 1) + 10.0 * at(len - 2) - 18.0 * at(len - 3) + 6.0 * at(len - 4) - at(len - 5)) / (12 * h);
          else if (p == len - 1)
            d = (25.0 * at(len - 1) - 48.0 * at(len - 2) + 36.0 * at(len - 3) - 16.0 * at(len - 4) + 3.0 * at(len - 5)) /
                (12 * h);
          else
            d = (at(p - 2) - 8.0 * at(p - 1) + 8.0 * at(p + 1) - at(p + 2)) / (12 * h);
        }
        if (axis == Axis::X)
          out(a, b, p, l) = d;
        else
          out(a, b, l, p) = d;
      }
    }
  }
  return out;
}

// ---- canonical suite -------------------------------------------------------

std::vector<OracleReport> run_oracle_suite() {
  std::vector<OracleReport> out;
  auto add = [&](std::string what, double diff, std::string grids, double tol, std::string note = {}) {
    out.push_back({std::move(what), diff, std::move(grids), tol, std::isfinite(diff) && diff <= tol, std::move(note)});
  };
  const cplx lam(0.7, 0.5);
  {
    Grid2D g = Grid2D::make(-8, 8, 32, -3.5, 3.5, 32);
    PotentialField Q = make_test_potential(gaussian_spec(1.0 / (8 * kPi)), g);
    NeumannOptions opt;
    WHatResult fast = solve_w_hat(Q, lam, opt);
    VolterraOracleResult slow = dense_volterra_oracle(Q, lam, opt);
    double p1 = compute_p1_norm(Q);
    add("W-hat: FFT path vs dense Volterra", (fast.w_hat - slow.w_hat).sup_norm(), "32x32 on [-8,8]x[-3.5,3.5]", 1e-6);
    add("Neumann contraction ratio (bound: measured P1)", slow.contraction_ratio, "32x32", p1);
    add("dense iteration count (bound: log tol / log P1 + 2)", slow.iterations, "32x32",
        std::log(opt.tol) / std::log(p1) + 2);
  }
  {
    Grid2D g = Grid2D::make(-12, 12, 64, -6, 6, 64);
    PotentialField Q = make_test_potential(gaussian_spec(1.0 / (8 * kPi)), g);
    for (cplx l : {lam, std::conj(lam)}) {
      Eigenfunction e = eigenfunction(Q, l, side_of(l));
      add("Green's fixed point at lambda = " + std::to_string(l.real()) + (l.imag() > 0 ? "+" : "") +
              std::to_string(l.imag()) + "i",
          (greens_solve(Q, e.psi, l) - e.psi).sup_norm(), "64x64 on [-12,12]x[-6,6]", 1e-4);
    }
    // |G phi| <= (C/|lambda|)(sup_y |d_y phi|_L1(dx) + sup_y |phi|_L1(dx) + |phi|_L1): C stable in |lambda|
    const MatrixField& phi = Q.q_x;
    MatrixField py = finite_difference(phi, Axis::Y, 4);
    double s1 = 0, s2 = 0, s3 = 0;
    for (int j = 0; j < g.ny; ++j) {
      double a = 0, b = 0;
      for (int i = 0; i < g.nx; ++i) {
        a += py.node(i, j).norm() * g.dx();
        b += phi.node(i, j).norm() * g.dx();
      }
      s1 = std::max(s1, a);
      s2 = std::max(s2, b);
      s3 += b * g.dy();
    }
    std::vector<double> C;
    for (double r : {4.0, 8.0, 16.0}) {
      cplx l = std::polar(r, kPi / 4);
      C.push_back(r * greens_apply(phi, l).sup_norm() / (s1 + s2 + s3));
    }
    double spread = *std::max_element(C.begin(), C.end()) / *std::min_element(C.begin(), C.end());
    add("Green's estimate constant spread over |lambda| = 4, 8, 16", spread, "64x64", 2.0,
        "C = " + std::to_string(C[0]) + ", " + std::to_string(C[1]) + ", " + std::to_string(C[2]));
  }
  {
    Grid2D g = Grid2D::make(-12, 12, 64, -6, 6, 64);
    PotentialField Q = make_test_potential(gaussian_spec(1.0 / (8 * kPi)), g);
    const double l = 0.5, z = 0.3;
    TransportResult t = characteristic_transport(Q, l, z);
    // abelian closed form: exp of the line integral (composite Gauss-Legendre)
    CMat S = CMat::Zero(2, 2);
    const int K = 4000;
    const double h = (g.y_max - g.y_min) / K, gx[3] = {-std::sqrt(0.6), 0, std::sqrt(0.6)},
                 gw[3] = {5.0 / 9, 8.0 / 9, 5.0 / 9};
    for (int k = 0; k < K; ++k)
      for (int q = 0; q < 3; ++q) {
        double y = g.y_min + (k + 0.5) * h + 0.5 * h * gx[q];
        S += 0.5 * h * gw[q] * Q.q_x_at(z - l * y, y);
      }
    CMat ex = CMat::Identity(2, 2);
    for (int a = 0; a < 2; ++a) ex(a, a) = std::exp(S(a, a));  // diagonal generator
    add("characteristic transport vs matrix exponential", (t.holonomy - ex).norm(), "64x64, 4096 RK4 steps", 1e-10);
    add("transport holonomy determinant", std::abs(t.holonomy.determinant() - 1.0), "64x64", 1e-10);
  }
  {
    Grid2D g = Grid2D::make(-12, 12, 512, -6, 6, 8);
    PotentialField Q = make_test_potential(gaussian_spec(1.0 / (8 * kPi)), g);
    MatrixField fd = finite_difference(Q.q, Axis::X, 4), sp = spectral_dx(Q.q);
    double d = 0;
    for (int j = 0; j < g.ny; ++j)
      for (int i = 2; i + 2 < g.nx; ++i) d = std::max(d, (fd.node(i, j) - sp.node(i, j)).norm());
    add("fourth-order differences vs spectral derivative", d, "512x8 interior", 1e-6);
  }
  return out;
}

}  // namespace ward
