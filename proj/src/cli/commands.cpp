#include "igeom/cli/commands.hpp"

#include <cmath>
#include <cstdio>
#include <iostream>
#include <limits>

#include <CLI11.hpp>

#include "igeom/canonical.hpp"
#include "igeom/geodesic.hpp"
#include "igeom/parallel.hpp"

namespace igeom::cli {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt(const char* pattern, double v) {
  char buf[128];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

QuadratureSpec spec_of(const CommonOptions& c) {
  QuadratureSpec s;
  s.order = c.quad_order;
  return s;
}

void validate_common(const CommonOptions& c) {
  if (c.jobs < 1) throw std::invalid_argument("--jobs must be at least 1");
  if (c.quad_order < 2 || c.quad_order > 512) throw std::invalid_argument("--quad-order must lie in [2, 512]");
  if (c.tol && !(*c.tol >= 0.0)) throw std::invalid_argument("--tol must be non-negative");
}

}  // namespace

void Range::validate(const std::string& name) const {
  if (count < 2) throw std::invalid_argument(name + ": count must be at least 2");
  if (!(start < stop)) throw std::invalid_argument(name + ": start must be below stop");
  if (!std::isfinite(start) || !std::isfinite(stop)) throw std::invalid_argument(name + ": bounds must be finite");
}

std::vector<double> Range::points() const {
  std::vector<double> out(count);
  const double n = count - 1;
  for (int i = 0; i < count; ++i) out[i] = start * ((n - i) / n) + stop * (i / n);
  return out;
}

CommandResult cmd_f_curve(const FCurveConfig& c) {
  validate_common(c.common);
  c.r.validate("r");
  if (!(c.r.start > -1.0 && c.r.stop < 1.0)) throw std::invalid_argument("r range must lie inside (-1, 1)");
  Correlated2DParams{c.mu, c.sigma, 0.0, c.sigma_c}.validate();
  const double tol = c.common.tolerance_or(1e-6);

  struct Row {
    double r, closed, numeric;
    bool converged;
  };
  const auto rs = c.r.points();
  const auto rows = parallel_map(rs.size(), c.common.jobs, [&](std::size_t k) {
    const auto sup = distinguishability_F_numeric({c.mu, c.sigma, rs[k], c.sigma_c});
    return Row{rs[k], distinguishability_F_closed(rs[k]), sup.value, sup.converged};
  });

  CommandResult res;
  res.table.columns = {"r", "F_closed", "F_numeric", "abs_diff"};
  double worst = 0.0;
  for (const auto& row : rows) {
    const double diff = std::abs(row.closed - row.numeric);
    worst = std::max(worst, diff);
    res.table.add({row.r, row.closed, row.numeric, diff});
    if (!row.converged) res.notes.push_back("f-curve: sup search stagnated at r = " + format_double(row.r));
  }
  res.tolerance_breach = worst > tol;
  res.notes.push_back("f-curve: max abs_diff " + fmt("%.3e", worst) + " against tol " + fmt("%.1e", tol));
  return res;
}

CommandResult cmd_curvature_scan(const CurvatureScanConfig& c) {
  validate_common(c.common);
  c.sigma.validate("sigma");
  c.r.validate("r");
  if (!(c.sigma.start > 0.0)) throw std::invalid_argument("sigma range must be positive");
  if (!(c.r.start > -1.0 && c.r.stop < 1.0)) throw std::invalid_argument("r range must lie inside (-1, 1)");
  if (!(c.sigma_c > 0.0)) throw std::invalid_argument("sigma_c must be positive");
  const double tol = c.common.tolerance_or(1e-4);
  const QuadratureSpec spec = spec_of(c.common);

  std::vector<std::pair<double, double>> grid;
  for (double s : c.sigma.points())
    for (double r : c.r.points()) grid.emplace_back(s, r);

  const auto values = parallel_map(grid.size(), c.common.jobs, [&](std::size_t k) {
    const auto [s, r] = grid[k];
    const auto field = fisher_field(correlated_2d_family(r, c.sigma_c), spec);
    return scalar_curvature(field, Eigen::VectorXd(Eigen::Vector2d(c.mu, s)));
  });

  CommandResult res;
  res.table.columns = {"sigma", "r", "R_closed", "R_numeric", "abs_diff"};
  double worst = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double closed = curvature_2d_closed(grid[k].second);
    const double diff = std::abs(closed - values[k]);
    worst = std::max(worst, diff);
    res.table.add({grid[k].first, grid[k].second, closed, values[k], diff});
  }
  res.tolerance_breach = worst > tol;
  res.notes.push_back("curvature-scan: max abs_diff " + fmt("%.3e", worst) + " against tol " + fmt("%.1e", tol));
  return res;
}

CommandResult cmd_oscillator(const OscillatorConfig& c) {
  validate_common(c.common);
  c.t_ratio.validate("T_ratio");
  if (!(c.t_ratio.start >= 0.0 && c.t_ratio.stop <= 1.0))
    throw std::invalid_argument("T_ratio range must lie in [0, 1]");
  const OscillatorPair pair{c.m1, c.m2, c.omega1, c.omega2, c.q10, c.coupling, c.T0, c.kB};
  pair.validate();
  const double tol = c.common.tolerance_or(1e-6);
  const QuadratureSpec spec = spec_of(c.common);
  const TestFunctionSet fs = oscillator_test_functions(pair);
  const double l1 = fs.product_l1();

  struct Row {
    double ratio, r_eff, tau, R, bound;
    std::string level;
    double derivation_gap;
  };
  const auto ratios = c.t_ratio.points();
  const auto rows = parallel_map(ratios.size(), c.common.jobs, [&](std::size_t k) {
    const double T = ratios[k] * pair.T0;
    const Correlated2DParams p = oscillator_reduce(pair, T);
    Row row;
    row.ratio = ratios[k];
    row.r_eff = p.r;
    row.tau = T < pair.T0 ? temperature_to_tau(T, pair.T0) : std::numeric_limits<double>::infinity();
    row.R = curvature_2d_closed(p.r);
    row.derivation_gap = std::abs(row.R - oscillator_curvature(T, pair.T0));
    row.bound = distinguishability_F_closed(p.r) * l1;
    row.level = to_string(IgehLevel::Unclassified);
    if (std::abs(p.r) < 1.0) {
      // At fixed T the model is static in τ, so its trace is constant.
      const double C = ig_correlation(joint_of(p), fs, spec);
      CorrelationTrace trace;
      for (int s = 0; s < 16; ++s) trace.push(s, C);
      row.level = to_string(classify(trace, tol).level);
    }
    return row;
  });

  CommandResult res;
  res.table.columns = {"T_ratio", "r_eff", "tau", "R", "C_bound", "igeh_level"};
  double gap = 0.0;
  for (const auto& row : rows) {
    gap = std::max(gap, row.derivation_gap);
    res.table.add({row.ratio, row.r_eff, row.tau, row.R, row.bound, row.level});
  }
  res.tolerance_breach = gap > 1e-12;

  std::vector<double> schedule;
  for (int k = 1; k <= 20; ++k) schedule.push_back(pair.T0 * (1.0 - std::ldexp(1.0, -k)));
  TraceOptions opts;
  opts.tol = tol;
  opts.spec = spec;
  opts.jobs = c.common.jobs;
  const auto trace = oscillator_mixing_trace(pair, schedule, fs, opts);
  res.notes.push_back("oscillator: R derivations agree within " + fmt("%.1e", gap));
  res.notes.push_back("oscillator: schedule T_k = T0(1 - 2^-k), k = 1..20 classifies as " +
                      to_string(trace.classification.level) + (trace.bound_holds ? "; |C| within F bound" : "; |C| exceeds F bound"));
  return res;
}

CommandResult cmd_goe(const GoeConfig& c) {
  validate_common(c.common);
  c.r.validate("r");
  if (!(c.r.start >= -1.0 && c.r.stop <= 1.0)) throw std::invalid_argument("r range must lie in [-1, 1]");
  if (!(c.sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
  const double tol = c.common.tolerance_or(1e-4);
  const GoeReport rep = goe_report(c.mu, c.sigma, c.r.points(), 1e-6, c.common.jobs);

  CommandResult res;
  res.table.columns = {"r", "R_closed", "R_numeric", "abs_diff", "flag"};
  double worst = 0.0;
  for (const auto& row : rep.rows) {
    const double diff = std::isnan(row.R_numeric) ? kNaN : std::abs(row.R_closed - row.R_numeric);
    if (!std::isnan(diff)) worst = std::max(worst, diff);
    res.table.add({row.r, row.R_closed, row.R_numeric, diff, std::string(row.r_min ? "R_min" : "")});
  }
  res.tolerance_breach = worst > tol || rep.factorization_error > 1e-12;
  res.notes.push_back("goe: r = 0 factorization error " + fmt("%.3e", rep.factorization_error) + ", C = " +
                      fmt("%.3e", rep.correlation) + ", level " + to_string(rep.classification.level));
  return res;
}

CommandResult cmd_geodesic(const GeodesicConfig& c) {
  validate_common(c.common);
  if (!(c.tau_end > 0.0)) throw std::invalid_argument("tau_end must be positive");
  if (!(c.step > 0.0)) throw std::invalid_argument("step must be positive");
  if (c.record_every < 1) throw std::invalid_argument("record_every must be at least 1");
  const double tol = c.common.tolerance_or(1e-6);

  std::optional<MetricField<double>> field;
  if (c.model == "flat") {
    field = MetricField<double>::constant(Eigen::MatrixXd::Identity(2, 2));
  } else if (c.model == "correlated-2d") {
    field = metric_field_2d(c.r, c.sigma_c);
  } else {
    throw std::invalid_argument("unknown geodesic model '" + c.model + "' (expected correlated-2d or flat)");
  }
  const GeodesicState<double> init{Eigen::Vector2d(c.mu0, c.sigma0), Eigen::Vector2d(c.v_mu, c.v_sigma), 0.0};
  const auto path = geodesic_integrate(*field, init, c.tau_end, c.step, c.record_every);

  CommandResult res;
  res.table.columns = {"tau", "theta1", "theta2", "v1", "v2", "speed", "speed_rel_drift"};
  const double speed0 = metric_speed(*field, path.states.front());
  double worst = 0.0;
  for (const auto& s : path.states) {
    const double speed = metric_speed(*field, s);
    const double drift = speed0 != 0.0 ? std::abs(speed - speed0) / speed0 : std::abs(speed);
    worst = std::max(worst, drift);
    res.table.add({s.tau, s.position(0), s.position(1), s.velocity(0), s.velocity(1), speed, drift});
  }
  res.tolerance_breach = worst > tol;
  res.notes.push_back("geodesic: max relative speed drift " + fmt("%.3e", worst));
  if (path.left_domain) res.notes.push_back("geodesic: trajectory left the parameter domain");
  return res;
}

namespace {

struct CommonBinding {
  std::string format = "csv";
  double tol = 0.0;
  CLI::Option* tol_opt = nullptr;
};

void add_common(CLI::App* sub, CommonOptions& c, CommonBinding& b) {
  sub->add_option("--out", c.out, "Output path, '-' for stdout")->capture_default_str();
  sub->add_option("--format", b.format, "csv or json (JSON lines)")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  b.tol_opt = sub->add_option("--tol", b.tol, "Tolerance for the command's self-check");
  sub->add_option("--jobs", c.jobs, "Worker threads for sweep points")->capture_default_str();
  sub->add_option("--quad-order", c.quad_order, "Gauss-Hermite order per axis")->capture_default_str();
}

void finish_common(CommonOptions& c, const CommonBinding& b) {
  c.format = parse_format(b.format);
  if (b.tol_opt && b.tol_opt->count() > 0) c.tol = b.tol;
}

void add_range(CLI::App* sub, const std::string& name, Range& r) {
  sub->add_option("--" + name + "-start", r.start)->capture_default_str();
  sub->add_option("--" + name + "-stop", r.stop)->capture_default_str();
  sub->add_option("--" + name + "-count", r.count)->capture_default_str();
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Fisher-Rao geometry and information-geometric ergodic hierarchy toolkit"};
  app.set_config("--config", "", "Optional key=value config file; command-line flags override it");
  app.require_subcommand(1, 1);

  FCurveConfig f;
  CurvatureScanConfig cs;
  OscillatorConfig osc;
  GoeConfig goe;
  GeodesicConfig geo;
  CommonBinding bf, bcs, bosc, bgoe, bgeo;

  auto* f_cmd = app.add_subcommand("f-curve", "Distinguishability F(r): closed form against the sup-norm oracle");
  add_common(f_cmd, f.common, bf);
  add_range(f_cmd, "r", f.r);
  f_cmd->add_option("--mu", f.mu)->capture_default_str();
  f_cmd->add_option("--sigma", f.sigma)->capture_default_str();
  f_cmd->add_option("--sigma-c", f.sigma_c)->capture_default_str();

  auto* cs_cmd = app.add_subcommand("curvature-scan", "Scalar curvature of the 2D model, numeric pipeline against closed form");
  add_common(cs_cmd, cs.common, bcs);
  add_range(cs_cmd, "sigma", cs.sigma);
  add_range(cs_cmd, "r", cs.r);
  cs_cmd->add_option("--mu", cs.mu)->capture_default_str();
  cs_cmd->add_option("--sigma-c", cs.sigma_c)->capture_default_str();

  auto* osc_cmd = app.add_subcommand("oscillator", "Coupled oscillators in a heat bath: r_eff, tau, R and the IG level");
  add_common(osc_cmd, osc.common, bosc);
  add_range(osc_cmd, "t-ratio", osc.t_ratio);
  osc_cmd->add_option("--m1", osc.m1)->capture_default_str();
  osc_cmd->add_option("--m2", osc.m2)->capture_default_str();
  osc_cmd->add_option("--omega1", osc.omega1)->capture_default_str();
  osc_cmd->add_option("--omega2", osc.omega2)->capture_default_str();
  osc_cmd->add_option("--q10", osc.q10)->capture_default_str();
  osc_cmd->add_option("--coupling", osc.coupling, "Coupling r; only its sign survives the reduction")->capture_default_str();
  osc_cmd->add_option("--T0", osc.T0)->capture_default_str();
  osc_cmd->add_option("--kB", osc.kB)->capture_default_str();

  auto* goe_cmd = app.add_subcommand("goe", "2x2 GOE-type ensemble: R over an r grid and the r = 0 factorization");
  add_common(goe_cmd, goe.common, bgoe);
  add_range(goe_cmd, "r", goe.r);
  goe_cmd->add_option("--mu", goe.mu)->capture_default_str();
  goe_cmd->add_option("--sigma", goe.sigma)->capture_default_str();

  auto* geo_cmd = app.add_subcommand("geodesic", "Geodesic trajectory with the conserved-speed diagnostic");
  add_common(geo_cmd, geo.common, bgeo);
  geo_cmd->add_option("--model", geo.model, "correlated-2d or flat")->capture_default_str();
  geo_cmd->add_option("--r", geo.r)->capture_default_str();
  geo_cmd->add_option("--sigma-c", geo.sigma_c)->capture_default_str();
  geo_cmd->add_option("--mu0", geo.mu0)->capture_default_str();
  geo_cmd->add_option("--sigma0", geo.sigma0)->capture_default_str();
  geo_cmd->add_option("--v-mu", geo.v_mu)->capture_default_str();
  geo_cmd->add_option("--v-sigma", geo.v_sigma)->capture_default_str();
  geo_cmd->add_option("--tau-end", geo.tau_end)->capture_default_str();
  geo_cmd->add_option("--step", geo.step)->capture_default_str();
  geo_cmd->add_option("--record-every", geo.record_every)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidation;
  }

  try {
    CommandResult res;
    std::string out;
    Format format = Format::Csv;
    auto run_one = [&](auto& cfg, CommonBinding& b, auto&& fn) {
      finish_common(cfg.common, b);
      res = fn(cfg);
      out = cfg.common.out;
      format = cfg.common.format;
    };
    if (f_cmd->parsed()) run_one(f, bf, cmd_f_curve);
    else if (cs_cmd->parsed()) run_one(cs, bcs, cmd_curvature_scan);
    else if (osc_cmd->parsed()) run_one(osc, bosc, cmd_oscillator);
    else if (goe_cmd->parsed()) run_one(goe, bgoe, cmd_goe);
    else run_one(geo, bgeo, cmd_geodesic);

    emit(res.table, format, out);
    for (const auto& note : res.notes) std::cerr << note << '\n';
    if (res.tolerance_breach) {
      std::cerr << "tolerance breach\n";
      return kToleranceBreach;
    }
    return kOk;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kIo;
  } catch (const ConvergenceError& e) {
    std::cerr << "numerical tolerance not met: " << e.what() << '\n';
    return kToleranceBreach;
  } catch (const NumericalDerivativeError& e) {
    std::cerr << "numerical tolerance not met: " << e.what() << '\n';
    return kToleranceBreach;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kValidation;
  } catch (const std::logic_error& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kValidation;
  } catch (const std::runtime_error& e) {
    // Non-positive-definite or singular metrics, from invalid parameter choices.
    std::cerr << "invalid input: " << e.what() << '\n';
    return kValidation;
  }
}

}  // namespace igeom::cli
