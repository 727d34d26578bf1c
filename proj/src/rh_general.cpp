#include <algorithm>
#include <cmath>

#include "ward/rh.hpp"

namespace ward {

CMat RationalCorrection::evaluate(cplx lambda) const {
  CMat m = CMat::Zero(n, n);
  for (size_t k = 0; k < poles.size(); ++k) m += residues[k] / (lambda - poles[k]);
  return m;
}

CMat RationalCorrection::evaluate_without(cplx lambda, size_t skip) const {
  CMat m = CMat::Zero(n, n);
  for (size_t k = 0; k < poles.size(); ++k)
    if (k != skip) m += residues[k] / (lambda - poles[k]);
  return m;
}

RationalCorrection poisson_rational_approx(const ContourFunction& g, double eps, double N_res) {
  const int n = g.rows, N = g.N();
  const Contour& c = g.contour;
  RationalCorrection H;
  H.n = n;
  if (!(eps > 0) || !(N_res > 0)) throw WardError(ErrorKind::InvalidInput, "Poisson approximation needs eps, N > 0");
  const double s = 1.0 / N_res;
  const int m = std::max(1, int(std::lround(s / c.h())));
  double gmax = 0;
  for (const auto& z : g.samples) gmax = std::max(gmax, std::abs(z));
  if (gmax == 0) return H;
  // Distinct pole heights per entry keep every residue a single-entry matrix.
  int slot = 0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      const cplx* ge = g.entry(a * n + b);
      bool any = false;
      for (int j = 0; j < N; ++j) any = any || std::abs(ge[j]) > 0;
      if (!any) continue;
      if (a == b) throw WardError(ErrorKind::InvalidInput, "Poisson approximation expects a strictly triangular g");
      const double eps_e = eps * (1.0 + 0.05 * slot++);
      for (int j = m / 2; j < N; j += m) {
        if (std::abs(ge[j]) <= 1e-15 * gmax) continue;
        cplx w = ge[j] * (m * c.h()) / (2.0 * kPi * kI);
        CMat E = CMat::Zero(n, n);
        E(a, b) = w;
        H.poles.push_back(cplx(c.node(j), eps_e));
        H.residues.push_back(E);
        H.side_tag.push_back(+1);
        H.poles.push_back(cplx(c.node(j), -eps_e));
        H.residues.push_back(-E);
        H.side_tag.push_back(-1);
      }
    }
  for (int j = 0; j < N; ++j) H.approx_error = std::max(H.approx_error, (g.at(j) - H.evaluate(c.node(j))).norm());
  return H;
}

ResidueSolution residue_linear_system(const std::vector<PoleData>& poles, int n) {
  ResidueSolution out;
  out.u.n = n;
  const int p = int(poles.size());
  if (p == 0) return out;
  std::vector<CMat> A(p), M(p);
  for (int j = 0; j < p; ++j) {
    A[j] = poles[j].alpha * poles[j].h;
    M[j] = poles[j].beta * poles[j].h + poles[j].alpha * poles[j].nmat;
  }
  // Row vector x = (a_1, ..., a_p) per row of u; x * T = rhs with
  // T(k, j) = A_j/(lambda_j - lambda_k) for k != j and M_j on the diagonal.
  const int dim = p * n;
  CMat T = CMat::Zero(dim, dim);
  for (int k = 0; k < p; ++k)
    for (int j = 0; j < p; ++j) {
      CMat blk = k == j ? M[j] : CMat(A[j] / (poles[j].lambda - poles[k].lambda));
      T.block(k * n, j * n, n, n) = blk;
    }
  CMat rhs(n, dim);
  for (int j = 0; j < p; ++j) rhs.block(0, j * n, n, n) = -A[j];
  Eigen::PartialPivLU<CMat> lu(T.transpose());
  CMat X = lu.solve(rhs.transpose()).transpose();
  double res = (X * T - rhs).norm() / std::max(1.0, rhs.norm());
  if (!X.allFinite() || res > 1e-8)
    throw WardError(ErrorKind::ResidueSystemSingular, "residue system is singular (residual " + std::to_string(res) + ")",
                    res);
  for (int j = 0; j < p; ++j) {
    out.u.poles.push_back(poles[j].lambda);
    out.u.residues.push_back(X.block(0, j * n, n, n));
    out.u.side_tag.push_back(poles[j].lambda.imag() > 0 ? 1 : -1);
  }
  for (int j = 0; j < p; ++j) {
    const CMat& a = out.u.residues[j];
    CMat b = CMat::Identity(n, n) + out.u.evaluate_without(poles[j].lambda, j);
    out.bcd1_residual = std::max(out.bcd1_residual, (a * A[j]).norm());
    out.bcd2_residual = std::max(out.bcd2_residual, (b * A[j] + a * M[j]).norm());
  }
  return out;
}

// ---------------------------------------------------------------------------

CMat GeneralSolution::evaluate(cplx lambda) const {
  if (direct) return phi.evaluate(lambda);
  const int n = phi.density.rows;
  CMat I = CMat::Identity(n, n);
  const RationalCorrection& H = lambda.imag() > 0 ? H_u : H_l;
  return (I + u.evaluate(lambda)) * phi.evaluate(lambda) * xi.evaluate(lambda) * (I + H.evaluate(lambda));
}

CMat GeneralSolution::first_moment(const ContourFunction& v) const {
  if (direct) return phi.first_moment();
  const int n = v.rows, N = v.N();
  ContourFunction d = ContourFunction::zeros(v.contour, n, n, v.decay_tail);
  CMat I = CMat::Identity(n, n);
  for (int j = 0; j < N; ++j) d.set(j, psi_minus.at(j) * (v.at(j) - I));
  RhpSolution tmp;
  tmp.density = d;
  tmp.op = cauchy_operator(v.contour, v.decay_tail);
  return tmp.first_moment();
}

GeneralSolution solve_rhp_general(const ContourFunction& v, const GeneralOptions& opt) {
  const int n = v.rows, N = v.N();
  const Contour& c = v.contour;
  CMat I = CMat::Identity(n, n);
  GeneralSolution sol;
  double cn = opt.small.cminus_norm > 0 ? opt.small.cminus_norm : 1.0;
  double dev = (v - ContourFunction::identity(c, n)).sup_norm();
  if (!opt.force_general && dev * cn < 1) {
    try {
      sol.phi = solve_rhp_small(v, opt.small);
    } catch (const WardError& e) {
      throw e.with_stage("small");
    }
    sol.direct = true;
    sol.psi_minus = sol.phi.psi_minus;
    sol.psi_plus = sol.phi.psi_plus;
    sol.jump_residual = sol.phi.jump_residual;
    return sol;
  }

  TriangularFactorization tf;
  try {
    tf = triangular_split(v);
  } catch (const WardError& e) {
    throw e.with_stage("triangular_split");
  }
  try {
    sol.xi = solve_scalar_rhp(tf.chi);
  } catch (const WardError& e) {
    throw e.with_stage("scalar");
  }

  // Poisson ladder: cheapest lattice whose conjugated jump passes the gate.
  ContourFunction J;
  bool ok = false;
  double last_gate = INFINITY;
  for (int m : opt.strides) {
    // Poles closer than five node spacings are not resolved by the contour.
    double s = m * c.h(), eps = std::max(opt.eps_factor * s, 5 * c.h());
    RationalCorrection Hu = poisson_rational_approx(tf.h_u, eps, 1.0 / s);
    RationalCorrection Hl = poisson_rational_approx(tf.h_l, eps, 1.0 / s);
    ContourFunction Jm = ContourFunction::zeros(c, n, n, v.decay_tail);
    for (int j = 0; j < N; ++j) {
      double z = c.node(j);
      CMat Jj = sol.xi.minus.at(j) * (I + Hl.evaluate(z)) * v.at(j) * (I + Hu.evaluate(z)).inverse() *
                sol.xi.plus.at(j).inverse();
      Jm.set(j, Jj);
    }
    double gate = (Jm - ContourFunction::identity(c, n)).sup_norm() * cn;
    last_gate = gate;
    if (gate < 1) {
      sol.H_u = Hu;
      sol.H_l = Hl;
      sol.stride_used = m;
      J = Jm;
      ok = true;
      break;
    }
  }
  if (!ok)
    throw WardError(ErrorKind::SmallJumpViolation, "conjugated jump stays above the small-jump gate", last_gate,
                    "poisson");
  try {
    sol.phi = solve_rhp_small(J, opt.small);
  } catch (const WardError& e) {
    throw e.with_stage("small");
  }

  // Residue system at the poles of H_u in C+ and H_l in C-.
  std::vector<PoleData> pd;
  auto collect = [&](const RationalCorrection& H, int side) {
    for (size_t k = 0; k < H.poles.size(); ++k) {
      if (H.side_tag[k] != side) continue;
      cplx lam = H.poles[k];
      PoleData p;
      p.lambda = lam;
      p.h = H.residues[k];
      p.nmat = I + H.evaluate_without(lam, k);
      CMat ph = sol.phi.evaluate(lam), dph = sol.phi.derivative(lam);
      CMat x = sol.xi.evaluate(lam), dx = sol.xi.derivative(lam);
      p.alpha = ph * x;
      p.beta = dph * x + ph * dx;
      pd.push_back(p);
    }
  };
  collect(sol.H_u, +1);
  collect(sol.H_l, -1);
  try {
    ResidueSolution rs = residue_linear_system(pd, n);
    sol.u = rs.u;
    sol.bcd1_residual = rs.bcd1_residual;
  } catch (const WardError& e) {
    throw e.with_stage("residue");
  }

  sol.psi_minus = ContourFunction::zeros(c, n, n, v.decay_tail);
  sol.psi_plus = sol.psi_minus;
  for (int j = 0; j < N; ++j) {
    double z = c.node(j);
    CMat U = I + sol.u.evaluate(z);
    sol.psi_minus.set(j, U * sol.phi.psi_minus.at(j) * sol.xi.minus.at(j) * (I + sol.H_l.evaluate(z)));
    sol.psi_plus.set(j, U * sol.phi.psi_plus.at(j) * sol.xi.plus.at(j) * (I + sol.H_u.evaluate(z)));
  }
  sol.jump_residual = jump_residual(sol.psi_plus, sol.psi_minus, v);
  return sol;
}

}  // namespace ward
