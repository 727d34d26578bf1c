#pragma once

#include <string>

#include "ward/evolution.hpp"
#include "ward/oracle.hpp"

namespace ward {

inline constexpr int kSchemaVersion = 1;

// ---- run configuration -----------------------------------------------------

struct PotentialConfig {
  std::string kind = "gaussian";  // gaussian | zero | file
  double gate = 0.5;              // target P1 value; sets the amplitude
  double amplitude = 0;           // used instead of gate when > 0
  double wx = 1, wy = 1;
  std::string direction = "diag";  // diag | offdiag
  int n = 2;
  std::string path;                // CSV field for kind = file
};

struct RunConfig {
  PotentialConfig potential;
  Grid2D grid = Grid2D::make(-12, 12, 128, -6, 6, 128);
  double Lambda = 40;
  int n_lambda = 512;
  std::vector<double> epsilon_ladder = {0.1, 0.05, 0.025, 0.0125};
  int ladder_stride = 0;
  int depth = -1;  // -1: choose from the gate value
  bool allow_split = true;
  double neumann_tol = 1e-12;
  double shift_tol = 1e-5;
  double roundtrip_tol = 1e-3;
  double su_tol = 1e-6;
  double lax_tol = 1e-4;
  double cminus_norm = 1.0;
  int slices = 9;
  double dt = 0;  // 0: from lambda^2 dt <= 2 dz
  int threads = 0;
  bool oracle = false;
  std::string out = "ward_out";
  std::string data_path;  // scattering-data CSV for validate
};

// Flat key = value text with [sections]; unknown keys are errors.
RunConfig load_config(const std::string& path);
std::string config_to_json(const RunConfig& c);
PotentialField build_potential(const RunConfig& c);

// ---- artifacts -------------------------------------------------------------

// Row-major CSV: x, y, re_ab, im_ab for every entry; JSON sidecar with the grid.
void write_field_csv(const std::string& path, const MatrixField& f);
MatrixField read_field_csv(const std::string& path, const Grid2D& g, int n);
std::string grid_json(const Grid2D& g);
std::string validation_json(const ValidationRecord& r);
std::string norm_report_json(const DecayClass& d);

// z, lambda, re_ab, im_ab per row; sidecar carries grid, lambda nodes and the validation record.
void write_scattering(const std::string& csv_path, const std::string& json_path, const ScatteringData& v);
ScatteringData read_scattering(const std::string& csv_path, const std::string& json_path);

void write_text(const std::string& path, const std::string& text);

}  // namespace ward
