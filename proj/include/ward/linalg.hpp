#pragma once

#include <cmath>
#include <functional>

#include "ward/core.hpp"

namespace ward {

struct GmresResult {
  CVec x;
  int iterations = 0;
  double residual = 0;  // relative to |b|
  bool converged = false;
};

// Restarted GMRES with Givens rotations for a matrix-free complex operator.
inline GmresResult gmres(const std::function<void(const CVec&, CVec&)>& apply, const CVec& b,
                         double tol = 1e-13, int max_iter = 400, int restart = 60) {
  const size_t N = b.size();
  auto dot = [](const CVec& u, const CVec& v) {
    cplx s = 0;
    for (size_t i = 0; i < u.size(); ++i) s += std::conj(u[i]) * v[i];
    return s;
  };
  auto nrm = [&](const CVec& u) { return std::sqrt(std::abs(dot(u, u))); };
  GmresResult res;
  res.x.assign(N, cplx(0));
  double bn = nrm(b);
  if (bn == 0) {
    res.converged = true;
    return res;
  }
  CVec r(N), w(N);
  int total = 0;
  while (total < max_iter) {
    apply(res.x, w);
    for (size_t i = 0; i < N; ++i) r[i] = b[i] - w[i];
    double beta = nrm(r);
    res.residual = beta / bn;
    if (res.residual < tol) {
      res.converged = true;
      break;
    }
    int m = restart;
    std::vector<CVec> V(m + 1, CVec(N));
    std::vector<std::vector<cplx>> H(m + 1, std::vector<cplx>(m, 0));
    std::vector<cplx> cs(m), sn(m), g(m + 1, 0);
    for (size_t i = 0; i < N; ++i) V[0][i] = r[i] / beta;
    g[0] = beta;
    int k = 0;
    for (; k < m && total < max_iter; ++k, ++total) {
      apply(V[k], w);
      for (int i = 0; i <= k; ++i) {  // modified Gram-Schmidt
        H[i][k] = dot(V[i], w);
        for (size_t t = 0; t < N; ++t) w[t] -= H[i][k] * V[i][t];
      }
      double hn = nrm(w);
      H[k + 1][k] = hn;
      if (hn > 0)
        for (size_t t = 0; t < N; ++t) V[k + 1][t] = w[t] / hn;
      for (int i = 0; i < k; ++i) {
        cplx tmp = std::conj(cs[i]) * H[i][k] + std::conj(sn[i]) * H[i + 1][k];
        H[i + 1][k] = -sn[i] * H[i][k] + cs[i] * H[i + 1][k];
        H[i][k] = tmp;
      }
      double den = std::sqrt(std::norm(H[k][k]) + std::norm(H[k + 1][k]));
      if (den == 0) {
        cs[k] = 1;
        sn[k] = 0;
      } else {
        cs[k] = H[k][k] / den;
        sn[k] = H[k + 1][k] / den;
      }
      H[k][k] = den;
      H[k + 1][k] = 0;
      g[k + 1] = -sn[k] * g[k];
      g[k] = std::conj(cs[k]) * g[k];
      if (std::abs(g[k + 1]) / bn < tol || hn == 0) {
        ++k;
        ++total;
        break;
      }
    }
    std::vector<cplx> yv(k);
    for (int i = k - 1; i >= 0; --i) {
      cplx s = g[i];
      for (int j = i + 1; j < k; ++j) s -= H[i][j] * yv[j];
      yv[i] = s / H[i][i];
    }
    for (int i = 0; i < k; ++i)
      for (size_t t = 0; t < N; ++t) res.x[t] += yv[i] * V[i][t];
  }
  apply(res.x, w);
  for (size_t i = 0; i < N; ++i) r[i] = b[i] - w[i];
  res.residual = nrm(r) / bn;
  res.converged = res.residual < std::max(tol, 1e-12) * 10;
  res.iterations = total;
  return res;
}

}  // namespace ward
