#pragma once

#include <optional>
#include <string>
#include <vector>

#include "igeom/cli/output.hpp"

namespace igeom::cli {

enum ExitCode : int { kOk = 0, kValidation = 2, kToleranceBreach = 3, kIo = 4 };

struct Range {
  double start = 0.0;
  double stop = 1.0;
  int count = 2;

  /// Throws std::invalid_argument unless count >= 2 and start < stop.
  void validate(const std::string& name) const;
  /// Evenly spaced points with both endpoints exact.
  std::vector<double> points() const;
};

struct CommonOptions {
  std::string out = "-";
  Format format = Format::Csv;
  std::optional<double> tol;
  int jobs = 1;
  int quad_order = 64;

  double tolerance_or(double fallback) const { return tol.value_or(fallback); }
};

struct CommandResult {
  Table table;
  bool tolerance_breach = false;
  /// Human-readable summary lines for stderr.
  std::vector<std::string> notes;
};

struct FCurveConfig {
  CommonOptions common;
  Range r{-0.95, 0.95, 39};
  double mu = 0.0;
  double sigma = 1.0;
  double sigma_c = 1.0;
};

struct CurvatureScanConfig {
  CommonOptions common;
  Range sigma{0.5, 2.0, 3};
  Range r{-0.9, 0.9, 5};
  double mu = 0.0;
  double sigma_c = 1.0;
};

struct OscillatorConfig {
  CommonOptions common;
  Range t_ratio{0.0, 1.0, 5};
  double m1 = 1.0, m2 = 1.0, omega1 = 1.0, omega2 = 1.0;
  double q10 = 0.0;
  double coupling = 0.5;
  double T0 = 1.0;
  double kB = 1.0;
};

struct GoeConfig {
  CommonOptions common;
  Range r{-0.99, 0.99, 23};
  double mu = 0.0;
  double sigma = 1.0;
};

struct GeodesicConfig {
  CommonOptions common;
  std::string model = "correlated-2d";
  double r = 0.0;
  double sigma_c = 1.0;
  double mu0 = 0.0, sigma0 = 1.0;
  double v_mu = 1.0, v_sigma = 0.0;
  double tau_end = 1.0;
  double step = 1e-3;
  int record_every = 10;
};

CommandResult cmd_f_curve(const FCurveConfig& c);
CommandResult cmd_curvature_scan(const CurvatureScanConfig& c);
CommandResult cmd_oscillator(const OscillatorConfig& c);
CommandResult cmd_goe(const GoeConfig& c);
CommandResult cmd_geodesic(const GeodesicConfig& c);

/// Runs one subcommand from argv and returns the process exit code.
int run(int argc, char** argv);

}  // namespace igeom::cli
