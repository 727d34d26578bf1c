#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ward/io.hpp"

namespace ward {

using nlohmann::json;

namespace {

std::string fmt(double v) {
  char buf[32];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

double to_double(const std::string& key, const std::string& s) {
  double v = 0;
  auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size())
    throw WardError(ErrorKind::Config, "config key " + key + ": not a number: '" + s + "'");
  return v;
}

int to_int(const std::string& key, const std::string& s) {
  double v = to_double(key, s);
  if (v != std::floor(v)) throw WardError(ErrorKind::Config, "config key " + key + ": not an integer");
  return int(v);
}

bool to_bool(const std::string& key, const std::string& s) {
  if (s == "on" || s == "true" || s == "1" || s == "yes") return true;
  if (s == "off" || s == "false" || s == "0" || s == "no") return false;
  throw WardError(ErrorKind::Config, "config key " + key + ": not a boolean: '" + s + "'");
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw WardError(ErrorKind::Io, "cannot write " + path);
  return f;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

std::string entry_header(int n) {
  std::string h;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) h += ",re_" + std::to_string(a) + std::to_string(b) + ",im_" + std::to_string(a) + std::to_string(b);
  return h;
}

}  // namespace

// ---- config ----------------------------------------------------------------

RunConfig load_config(const std::string& path) {
  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigINI().from_file(path);
  } catch (const CLI::Error& e) {
    throw WardError(ErrorKind::Config, "cannot read config " + path + ": " + e.what());
  }
  RunConfig c;
  double x_min = c.grid.x_min, x_max = c.grid.x_max, y_min = c.grid.y_min, y_max = c.grid.y_max;
  int nx = c.grid.nx, ny = c.grid.ny;
  for (const auto& it : items) {
    if (it.name == "++" || it.name == "--") continue;
    const std::string key = it.fullname();
    std::string val;
    for (size_t k = 0; k < it.inputs.size(); ++k) val += (k ? "," : "") + it.inputs[k];
    if (key == "potential.kind") c.potential.kind = val;
    else if (key == "potential.gate") c.potential.gate = to_double(key, val);
    else if (key == "potential.amplitude") c.potential.amplitude = to_double(key, val);
    else if (key == "potential.wx") c.potential.wx = to_double(key, val);
    else if (key == "potential.wy") c.potential.wy = to_double(key, val);
    else if (key == "potential.direction") c.potential.direction = val;
    else if (key == "potential.n") c.potential.n = to_int(key, val);
    else if (key == "potential.path") c.potential.path = val;
    else if (key == "grid.x_min") x_min = to_double(key, val);
    else if (key == "grid.x_max") x_max = to_double(key, val);
    else if (key == "grid.nx") nx = to_int(key, val);
    else if (key == "grid.y_min") y_min = to_double(key, val);
    else if (key == "grid.y_max") y_max = to_double(key, val);
    else if (key == "grid.ny") ny = to_int(key, val);
    else if (key == "spectral.lambda_max") c.Lambda = to_double(key, val);
    else if (key == "spectral.n_lambda") c.n_lambda = to_int(key, val);
    else if (key == "spectral.epsilon_ladder") {
      c.epsilon_ladder.clear();
      for (const auto& s : it.inputs)
        for (const auto& t : split_csv_line(s)) c.epsilon_ladder.push_back(to_double(key, t));
    } else if (key == "spectral.ladder_stride") c.ladder_stride = to_int(key, val);
    else if (key == "forward.depth") c.depth = val == "auto" ? -1 : to_int(key, val);
    else if (key == "forward.allow_split") c.allow_split = to_bool(key, val);
    else if (key == "tolerances.neumann") c.neumann_tol = to_double(key, val);
    else if (key == "tolerances.shift") c.shift_tol = to_double(key, val);
    else if (key == "tolerances.roundtrip") c.roundtrip_tol = to_double(key, val);
    else if (key == "tolerances.su") c.su_tol = to_double(key, val);
    else if (key == "tolerances.lax") c.lax_tol = to_double(key, val);
    else if (key == "tolerances.cminus_norm") c.cminus_norm = to_double(key, val);
    else if (key == "evolution.slices") c.slices = to_int(key, val);
    else if (key == "evolution.dt") c.dt = to_double(key, val);
    else if (key == "run.threads") c.threads = to_int(key, val);
    else if (key == "run.oracle") c.oracle = to_bool(key, val);
    else if (key == "run.out") c.out = val;
    else if (key == "run.data") c.data_path = val;
    else throw WardError(ErrorKind::Config, "unknown config key '" + key + "'");
  }
  try {
    c.grid = Grid2D::make(x_min, x_max, nx, y_min, y_max, ny);
  } catch (const WardError& e) {
    throw WardError(ErrorKind::Config, std::string("grid: ") + e.what());
  }
  auto in_unit = [](double t) { return t > 0 && t < 1; };
  if (!(c.Lambda > 0)) throw WardError(ErrorKind::Config, "spectral.lambda_max must be positive");
  if (c.n_lambda < 16) throw WardError(ErrorKind::Config, "spectral.n_lambda must be at least 16");
  if (c.slices < 1) throw WardError(ErrorKind::Config, "evolution.slices must be positive");
  for (double t : {c.neumann_tol, c.shift_tol, c.roundtrip_tol, c.su_tol, c.lax_tol})
    if (!in_unit(t)) throw WardError(ErrorKind::Config, "tolerances must lie in (0, 1)");
  for (size_t k = 0; k < c.epsilon_ladder.size(); ++k)
    if (!(c.epsilon_ladder[k] > 0) || (k && c.epsilon_ladder[k] >= c.epsilon_ladder[k - 1]))
      throw WardError(ErrorKind::Config, "spectral.epsilon_ladder must be positive and decreasing");
  if (c.potential.kind != "gaussian" && c.potential.kind != "zero" && c.potential.kind != "file")
    throw WardError(ErrorKind::Config, "potential.kind must be gaussian, zero or file");
  return c;
}

std::string config_to_json(const RunConfig& c) {
  json j = {
      {"potential",
       {{"kind", c.potential.kind},
        {"gate", c.potential.gate},
        {"amplitude", c.potential.amplitude},
        {"wx", c.potential.wx},
        {"wy", c.potential.wy},
        {"direction", c.potential.direction},
        {"n", c.potential.n},
        {"path", c.potential.path}}},
      {"grid", json::parse(grid_json(c.grid))},
      {"spectral",
       {{"lambda_max", c.Lambda},
        {"n_lambda", c.n_lambda},
        {"epsilon_ladder", c.epsilon_ladder},
        {"ladder_stride", c.ladder_stride}}},
      {"forward", {{"depth", c.depth}, {"allow_split", c.allow_split}}},
      {"tolerances",
       {{"neumann", c.neumann_tol},
        {"shift", c.shift_tol},
        {"roundtrip", c.roundtrip_tol},
        {"su", c.su_tol},
        {"lax", c.lax_tol},
        {"cminus_norm", c.cminus_norm}}},
      {"evolution", {{"slices", c.slices}, {"dt", c.dt}}},
      {"run", {{"threads", c.threads}, {"oracle", c.oracle}}},
  };
  return j.dump(2);
}

PotentialField build_potential(const RunConfig& c) {
  const auto& p = c.potential;
  if (p.kind == "zero") return zero_potential(p.n, c.grid);
  if (p.kind == "file") {
    if (p.path.empty()) throw WardError(ErrorKind::Config, "potential.path is required for kind = file");
    return potential_from_samples(read_field_csv(p.path, c.grid, p.n));
  }
  PotentialSpec spec = gaussian_spec(1.0, p.n, p.wx, p.wy);
  if (p.direction == "offdiag")
    spec.components[0].direction = offdiag_direction(p.n);
  else if (p.direction != "diag")
    throw WardError(ErrorKind::Config, "potential.direction must be diag or offdiag");
  double amp = p.amplitude;
  if (amp <= 0) {
    // P1 is homogeneous of degree one in the amplitude
    double unit = compute_p1_norm(make_test_potential(spec, c.grid));
    amp = p.gate / unit;
  }
  spec.components[0].amplitude = amp;
  return make_test_potential(spec, c.grid);
}

// ---- fields ----------------------------------------------------------------

void write_field_csv(const std::string& path, const MatrixField& f) {
  auto out = open_out(path);
  const Grid2D& g = f.grid;
  out << "x,y" << entry_header(f.n) << "\n";
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      out << fmt(g.x(i)) << ',' << fmt(g.y(j));
      for (int a = 0; a < f.n; ++a)
        for (int b = 0; b < f.n; ++b) {
          cplx v = f(a, b, i, j);
          out << ',' << fmt(v.real()) << ',' << fmt(v.imag());
        }
      out << '\n';
    }
}

MatrixField read_field_csv(const std::string& path, const Grid2D& g, int n) {
  std::ifstream in(path);
  if (!in) throw WardError(ErrorKind::Io, "cannot read " + path);
  std::string line;
  std::getline(in, line);
  if (line != "x,y" + entry_header(n)) throw WardError(ErrorKind::Io, path + ": unexpected header");
  MatrixField f(n, g);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      if (!std::getline(in, line)) throw WardError(ErrorKind::Io, path + ": too few rows");
      auto cells = split_csv_line(line);
      if (int(cells.size()) != 2 + 2 * n * n) throw WardError(ErrorKind::Io, path + ": wrong column count");
      for (int e = 0; e < n * n; ++e)
        f.data[f.idx(e / n, e % n, i, j)] =
            cplx(to_double("re", cells[2 + 2 * e]), to_double("im", cells[3 + 2 * e]));
    }
  return f;
}

std::string grid_json(const Grid2D& g) {
  return json{{"x_min", g.x_min}, {"x_max", g.x_max}, {"nx", g.nx},
              {"y_min", g.y_min}, {"y_max", g.y_max}, {"ny", g.ny}}
      .dump();
}

std::string validation_json(const ValidationRecord& r) {
  json arr = json::array();
  for (const auto& c : r.checks)
    arr.push_back({{"name", c.name}, {"pass", c.pass}, {"checked", c.checked}, {"value", c.value}, {"note", c.note}});
  return json{{"schema_version", kSchemaVersion}, {"all_pass", r.all_pass()}, {"checks", arr}}.dump(2);
}

std::string norm_report_json(const DecayClass& d) {
  json arr = json::array();
  for (const auto& e : d.norms) arr.push_back({{"name", e.name}, {"value", e.value}, {"checked", e.checked}});
  return json{{"p1_value", d.p1_value}, {"p1_member", d.p1_member}, {"pinf_member", d.pinf_member}, {"norms", arr}}
      .dump(2);
}

// ---- scattering data -------------------------------------------------------

void write_scattering(const std::string& csv_path, const std::string& json_path, const ScatteringData& v) {
  auto out = open_out(csv_path);
  const int n = v.n;
  out << "z,lambda" << entry_header(n) << "\n";
  for (size_t l = 0; l < v.lambda.size(); ++l)
    for (int iz = 0; iz < v.nz(); ++iz) {
      out << fmt(v.grid.x(iz)) << ',' << fmt(v.lambda[l]);
      for (int e = 0; e < n * n; ++e) {
        cplx a = v.v[v.at(int(l), e, iz)];
        out << ',' << fmt(a.real()) << ',' << fmt(a.imag());
      }
      out << '\n';
    }
  json j = {{"schema_version", kSchemaVersion},
            {"n", n},
            {"grid", json::parse(grid_json(v.grid))},
            {"lambda", v.lambda},
            {"hermitian_correction", v.hermitian_correction},
            {"shift_mismatch", v.shift_mismatch},
            {"validation", json::parse(validation_json(v.validation))}};
  write_text(json_path, j.dump(2));
}

ScatteringData read_scattering(const std::string& csv_path, const std::string& json_path) {
  std::ifstream js(json_path);
  if (!js) throw WardError(ErrorKind::Io, "cannot read " + json_path);
  json j;
  try {
    j = json::parse(js);
  } catch (const json::exception& e) {
    throw WardError(ErrorKind::Io, json_path + ": " + e.what());
  }
  if (j.value("schema_version", 0) != kSchemaVersion) throw WardError(ErrorKind::Io, json_path + ": unsupported schema");
  const auto& gj = j.at("grid");
  Grid2D g = Grid2D::make(gj.at("x_min"), gj.at("x_max"), gj.at("nx"), gj.at("y_min"), gj.at("y_max"), gj.at("ny"));
  std::vector<double> lam = j.at("lambda").get<std::vector<double>>();
  const int n = j.at("n");
  ScatteringData v = ScatteringData::identity(n, g, lam);
  v.hermitian_correction = j.value("hermitian_correction", 0.0);
  v.shift_mismatch = j.value("shift_mismatch", -1.0);
  std::ifstream in(csv_path);
  if (!in) throw WardError(ErrorKind::Io, "cannot read " + csv_path);
  std::string line;
  std::getline(in, line);
  if (line != "z,lambda" + entry_header(n)) throw WardError(ErrorKind::Io, csv_path + ": unexpected header");
  for (size_t l = 0; l < lam.size(); ++l)
    for (int iz = 0; iz < g.nx; ++iz) {
      if (!std::getline(in, line)) throw WardError(ErrorKind::Io, csv_path + ": too few rows");
      auto cells = split_csv_line(line);
      if (int(cells.size()) != 2 + 2 * n * n) throw WardError(ErrorKind::Io, csv_path + ": wrong column count");
      for (int e = 0; e < n * n; ++e)
        v.v[v.at(int(l), e, iz)] = cplx(to_double("re", cells[2 + 2 * e]), to_double("im", cells[3 + 2 * e]));
    }
  return v;
}

void write_text(const std::string& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
  if (!text.empty() && text.back() != '\n') out << '\n';
}

}  // namespace ward
