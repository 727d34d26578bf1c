// Python bindings: fields cross the boundary as complex arrays of shape
// (ny, nx, n, n) and scattering data as (n_lambda, nz, n, n).

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ward/evolution.hpp"
#include "ward/oracle.hpp"

namespace py = pybind11;
using namespace ward;

namespace {

using Array = py::array_t<cplx, py::array::c_style | py::array::forcecast>;

Array to_array(const MatrixField& f) {
  const Grid2D& g = f.grid;
  Array a({g.ny, g.nx, f.n, f.n});
  auto r = a.mutable_unchecked<4>();
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      for (int p = 0; p < f.n; ++p)
        for (int q = 0; q < f.n; ++q) r(j, i, p, q) = f(p, q, i, j);
  return a;
}

MatrixField from_array(const Array& a, const Grid2D& g) {
  if (a.ndim() != 4 || a.shape(0) != g.ny || a.shape(1) != g.nx || a.shape(2) != a.shape(3))
    throw WardError(ErrorKind::InvalidInput, "field must have shape (ny, nx, n, n) matching the grid");
  MatrixField f(int(a.shape(2)), g);
  auto r = a.unchecked<4>();
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      for (int p = 0; p < f.n; ++p)
        for (int q = 0; q < f.n; ++q) f(p, q, i, j) = r(j, i, p, q);
  return f;
}

Array data_to_array(const ScatteringData& v) {
  const int nl = int(v.lambda.size()), nz = v.nz();
  Array a({nl, nz, v.n, v.n});
  auto r = a.mutable_unchecked<4>();
  for (int l = 0; l < nl; ++l)
    for (int iz = 0; iz < nz; ++iz)
      for (int e = 0; e < v.n * v.n; ++e) r(l, iz, e / v.n, e % v.n) = v.v[v.at(l, e, iz)];
  return a;
}

ScatteringData data_from_array(const Array& a, const Grid2D& g, const std::vector<double>& lambda) {
  if (a.ndim() != 4 || a.shape(0) != py::ssize_t(lambda.size()) || a.shape(1) != g.nx || a.shape(2) != a.shape(3))
    throw WardError(ErrorKind::InvalidInput, "data must have shape (n_lambda, nz, n, n)");
  ScatteringData v = ScatteringData::identity(int(a.shape(2)), g, lambda);
  auto r = a.unchecked<4>();
  for (size_t l = 0; l < lambda.size(); ++l)
    for (int iz = 0; iz < g.nx; ++iz)
      for (int e = 0; e < v.n * v.n; ++e) v.v[v.at(int(l), e, iz)] = r(l, iz, e / v.n, e % v.n);
  return v;
}

py::dict validation_dict(const ValidationRecord& rec) {
  py::dict d;
  for (const auto& c : rec.checks)
    d[py::str(c.name)] = py::dict(py::arg("pass") = c.pass, py::arg("checked") = c.checked,
                                  py::arg("value") = c.value, py::arg("note") = c.note);
  return d;
}

}  // namespace

PYBIND11_MODULE(_ward, m) {
  m.doc() = "Inverse scattering toolkit for the Ward equation";

  py::register_exception<WardError>(m, "WardError", PyExc_RuntimeError);

  py::class_<Grid2D>(m, "Grid")
      .def(py::init(&Grid2D::make), py::arg("x_min"), py::arg("x_max"), py::arg("nx"), py::arg("y_min"),
           py::arg("y_max"), py::arg("ny"))
      .def_readonly("x_min", &Grid2D::x_min)
      .def_readonly("x_max", &Grid2D::x_max)
      .def_readonly("nx", &Grid2D::nx)
      .def_readonly("y_min", &Grid2D::y_min)
      .def_readonly("y_max", &Grid2D::y_max)
      .def_readonly("ny", &Grid2D::ny)
      .def_property_readonly("dx", &Grid2D::dx)
      .def_property_readonly("dy", &Grid2D::dy)
      .def("x", [](const Grid2D& g) {
        std::vector<double> x(g.nx);
        for (int i = 0; i < g.nx; ++i) x[i] = g.x(i);
        return x;
      })
      .def("y", [](const Grid2D& g) {
        std::vector<double> y(g.ny);
        for (int j = 0; j < g.ny; ++j) y[j] = g.y(j);
        return y;
      });

  m.def("contour_nodes", [](double Lambda, int n) { return Contour::make(Lambda, n).nodes(); }, py::arg("Lambda"),
        py::arg("n"));

  m.def(
      "gaussian_potential",
      [](const Grid2D& g, double gate, double wx, double wy) {
        PotentialField unit = make_test_potential(gaussian_spec(1.0, 2, wx, wy), g);
        return to_array(make_test_potential(gaussian_spec(gate / compute_p1_norm(unit), 2, wx, wy), g).q);
      },
      py::arg("grid"), py::arg("gate") = 0.5, py::arg("wx") = 1.0, py::arg("wy") = 1.0,
      "su(2) Gaussian scaled so its P1 norm equals `gate`.");

  m.def(
      "p1_norm", [](const Array& q, const Grid2D& g) { return compute_p1_norm(potential_from_samples(from_array(q, g))); },
      py::arg("q"), py::arg("grid"));

  m.def(
      "eigenfunction",
      [](const Array& q, const Grid2D& g, cplx lambda) {
        PotentialField Q = potential_from_samples(from_array(q, g));
        return to_array(eigenfunction(Q, lambda, side_of(lambda)).psi);
      },
      py::arg("q"), py::arg("grid"), py::arg("lam"));

  m.def(
      "forward",
      [](const Array& q, const Grid2D& g, double Lambda, int n_lambda, int depth, bool allow_split) {
        PotentialField Q = potential_from_samples(from_array(q, g));
        ForwardOptions o;
        o.depth = depth;
        o.allow_split = allow_split;
        ForwardResult r;
        {
          py::gil_scoped_release release;
          r = forward_scattering(Q, Contour::make(Lambda, n_lambda).nodes(), o);
        }
        py::dict out;
        out["v"] = data_to_array(r.data);
        out["lambda"] = r.data.lambda;
        out["validation"] = validation_dict(r.data.validation);
        out["p1"] = r.diag.p1;
        out["depth"] = r.diag.depth_used;
        out["det_defect"] = r.diag.max_det_defect;
        out["reality_defect"] = r.diag.max_reality_defect;
        return out;
      },
      py::arg("q"), py::arg("grid"), py::arg("Lambda") = 40.0, py::arg("n_lambda") = 512, py::arg("depth") = 0,
      py::arg("allow_split") = true, "Potential to scattering data v(z, lambda).");

  m.def(
      "validate",
      [](const Array& v, const Grid2D& g, const std::vector<double>& lambda) {
        return validation_dict(validate_scattering_data(data_from_array(v, g, lambda)));
      },
      py::arg("v"), py::arg("grid"), py::arg("lam"));

  m.def(
      "reconstruct",
      [](const Array& v, const Grid2D& g, const std::vector<double>& lambda) {
        ScatteringData d = data_from_array(v, g, lambda);
        InverseOptions o;
        o.throw_on_suspect = false;
        ReconstructionResult r;
        {
          py::gil_scoped_release release;
          r = reconstruct_potential(d, o);
        }
        py::dict out;
        out["q"] = to_array(r.q.q);
        out["q_anchored"] = to_array(r.q_anchored);
        out["lax_residual"] = r.residual_lax;
        out["su_defect"] = r.su_defect;
        out["jump_residual"] = r.jump_residual;
        return out;
      },
      py::arg("v"), py::arg("grid"), py::arg("lam"),
      "Scattering data to Q; q_anchored is normalised to 0 at x_min.");

  m.def(
      "evolve_data",
      [](const Array& v, const Grid2D& g, const std::vector<double>& lambda, double t) {
        EvolvedData e = evolve_data(data_from_array(v, g, lambda), t);
        return py::make_tuple(data_to_array(e.v), e.det_defect, e.min_eigenvalue);
      },
      py::arg("v"), py::arg("grid"), py::arg("lam"), py::arg("t"));

  m.def(
      "ward_pde_residual",
      [](const std::vector<Array>& qs, const Grid2D& g, const std::vector<double>& t) {
        std::vector<PotentialField> q;
        for (const auto& a : qs) q.push_back(potential_from_samples(from_array(a, g)));
        return ward_pde_residual(q, t).sup;
      },
      py::arg("q_slices"), py::arg("grid"), py::arg("t"));

  m.def(
      "ldu",
      [](const CMat& A) {
        LDU f = ldu_factorize(A);
        return py::make_tuple(f.C, f.S, f.B);
      },
      py::arg("A"), "A = C S B with C unit lower, S diagonal, B unit upper.");

  m.def(
      "oracle_suite",
      [] {
        std::vector<OracleReport> reps;
        {
          py::gil_scoped_release release;
          reps = run_oracle_suite();
        }
        py::list out;
        for (const auto& r : reps)
          out.append(py::dict(py::arg("quantity") = r.compared_quantity, py::arg("difference") = r.sup_difference,
                              py::arg("tolerance") = r.tolerance, py::arg("pass") = r.verdict));
        return out;
      });
}
