#include "svnl/commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "svnl/errors.hpp"
#include "svnl/quantile.hpp"

namespace svnl::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path sidecar(const fs::path& out, const std::string& suffix) { return fs::path(out.string() + suffix); }

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw InputError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

std::vector<double> as_vector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

json theta_to_json(const SvParams& th) {
  json j;
  j["mu"] = th.mu;
  j["beta"] = th.beta;
  j["phi"] = std::vector<double>(th.leverage.coeffs().begin(), th.leverage.coeffs().end());
  j["omega"] = th.omega;
  return j;
}

StateInit parse_state_init(const json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() != "stationary") throw ConfigError("x0 must be \"stationary\" or {mean, variance}");
    return StateInit::stationary();
  }
  return StateInit::gaussian(j.at("mean").get<double>(), j.at("variance").get<double>());
}

IngestResult load_series(const fs::path& input, const IngestConfig& config) {
  IngestResult in = ingest(input, config);
  if (in.dropped_rows > 0) {
    std::clog << "svnl: dropped " << in.dropped_rows << " row(s) with missing values from " << input << "\n";
  }
  return in;
}

int resolve_burn(std::optional<int> burn, std::size_t length) { return burn ? *burn : default_burn(length); }

}  // namespace

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void write_atomic(const fs::path& path, const std::string& content) {
  const fs::path tmp = sidecar(path, ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write '" + path.string() + "'");
    out << content;
    if (!out.flush()) throw InputError("cannot write '" + path.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw InputError("cannot move output into '" + path.string() + "': " + ec.message());
}

int default_burn(std::size_t length) { return static_cast<int>(length / 5); }

std::vector<double> parse_grid(const std::string& spec) {
  double lo = 0.0, hi = 0.0, step = 0.0;
  char c1 = 0, c2 = 0;
  std::istringstream in(spec);
  if (!(in >> lo >> c1 >> hi >> c2 >> step) || c1 != ':' || c2 != ':' || !in.eof()) {
    throw ConfigError("grid must look like lo:hi:step, got '" + spec + "'");
  }
  if (!(hi >= lo) || !(step > 0.0)) throw ConfigError("grid needs hi >= lo and step > 0");
  std::vector<double> grid;
  const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
  for (long i = 0; i <= n; ++i) grid.push_back(lo + static_cast<double>(i) * step);
  return grid;
}

SvParams simulation_params(const SimulateConfig& config) {
  const HermiteOrder order(config.order);
  if (config.rho) {
    if (order.value() != 1) throw ConfigError("--rho needs --order 1");
    if (!config.tau) throw ConfigError("--rho needs --tau");
    return reparam_to_uncorrelated({config.mu, config.beta, *config.rho, *config.tau});
  }
  SvParams theta;
  theta.mu = config.mu;
  theta.beta = config.beta;
  theta.omega = config.omega;
  if (config.tau) {
    if (order.value() != 0) throw ConfigError("--tau without --rho only applies to --order 0");
    theta.omega = *config.tau;
  }
  theta.leverage = LeverageSpec::zeros(order);
  if (order.value() > 0) {
    if (static_cast<int>(config.phi.size()) > order.value() && config.phi.size() > 1) {
      throw ConfigError("more --phi coefficients than the leverage order");
    }
    auto phi = theta.leverage.coeffs();
    for (std::size_t j = 0; j < phi.size() && j < config.phi.size(); ++j) phi[j] = config.phi[j];
  }
  theta.validate();
  return theta;
}

PriorSettings read_prior_settings(const json& j) {
  PriorSettings p;
  p.mu_mean = j.value("mu_mean", p.mu_mean);
  p.beta_mean = j.value("beta_mean", p.beta_mean);
  p.phi_mean = j.value("phi_mean", p.phi_mean);
  p.mu_scale = j.value("mu_scale", p.mu_scale);
  p.beta_scale = j.value("beta_scale", p.beta_scale);
  p.phi_scale = j.value("phi_scale", p.phi_scale);
  p.c0 = j.value("c0", p.c0);
  p.d0 = j.value("d0", p.d0);
  const std::string scale = j.value("a0_interpretation", std::string("covariance"));
  if (scale == "covariance") {
    p.a0_scale = PriorScale::kCovariance;
  } else if (scale == "precision") {
    p.a0_scale = PriorScale::kPrecision;
  } else {
    throw ConfigError("a0_interpretation must be covariance or precision");
  }
  const std::string ig = j.value("ig_form", std::string("shape_scale"));
  if (ig == "shape_scale") {
    p.ig_form = InvGammaForm::kShapeScale;
  } else if (ig == "half") {
    p.ig_form = InvGammaForm::kHalfShapeScale;
  } else {
    throw ConfigError("ig_form must be shape_scale or half");
  }
  if (j.contains("x0")) p.x0 = parse_state_init(j.at("x0"));
  return p;
}

PriorSpec read_prior(const json& j, HermiteOrder order) {
  PriorSpec prior = read_prior_settings(j).for_order(order);
  const int n = order.regressors();
  if (j.contains("A0")) {
    const auto rows = j.at("A0").get<std::vector<std::vector<double>>>();
    if (static_cast<int>(rows.size()) != n) throw ConfigError("A0 must be (k+2)x(k+2)");
    for (int r = 0; r < n; ++r) {
      if (static_cast<int>(rows[r].size()) != n) throw ConfigError("A0 must be (k+2)x(k+2)");
      for (int c = 0; c < n; ++c) prior.A0(r, c) = rows[r][c];
    }
  }
  if (j.contains("b0")) {
    const auto b = j.at("b0").get<std::vector<double>>();
    if (static_cast<int>(b.size()) != n) throw ConfigError("b0 must have k+2 entries");
    for (int r = 0; r < n; ++r) prior.b0(r) = b[r];
  }
  prior.validate();
  return prior;
}

json prior_to_json(const PriorSpec& prior) {
  json j;
  std::vector<std::vector<double>> a0;
  for (int r = 0; r < prior.dim(); ++r) {
    a0.emplace_back();
    for (int c = 0; c < prior.dim(); ++c) a0.back().push_back(prior.A0(r, c));
  }
  j["A0"] = a0;
  j["b0"] = as_vector(prior.b0);
  j["c0"] = prior.c0;
  j["d0"] = prior.d0;
  j["a0_interpretation"] = prior.a0_scale == PriorScale::kCovariance ? "covariance" : "precision";
  j["ig_form"] = prior.ig_form == InvGammaForm::kShapeScale ? "shape_scale" : "half";
  if (prior.x0.kind == StateInit::Kind::kStationary) {
    j["x0"] = "stationary";
  } else {
    j["x0"] = {{"mean", prior.x0.mean}, {"variance", prior.x0.variance}};
  }
  return j;
}

json fit_to_json(const FilterResult& fit, const ReturnSeries& series, const PriorSpec& prior) {
  const auto summary_json = [](const std::vector<ParamSummary>& params) {
    json out = json::object();
    for (const auto& p : params) out[p.name] = {{"mean", p.mean}, {"interval", {p.lo, p.hi}}};
    return out;
  };

  json j;
  j["order"] = fit.order.value();
  j["algorithm"] = to_string(fit.algorithm);
  j["particles"] = fit.n_particles;
  j["seed"] = fit.seed;
  j["burn"] = fit.burn;
  j["length"] = series.size();
  j["prior"] = prior_to_json(prior);

  json posterior;
  posterior["summary"] = summary_json(fit.checkpoints.back().params);
  json checkpoints = json::array();
  for (const auto& c : fit.checkpoints) checkpoints.push_back({{"t", c.t}, {"summary", summary_json(c.params)}});
  posterior["checkpoints"] = checkpoints;
  const auto names = param_names(fit.order);
  json values = json::array();
  for (const auto& th : fit.posterior) {
    std::vector<double> row{th.mu, th.beta};
    row.insert(row.end(), th.leverage.coeffs().begin(), th.leverage.coeffs().end());
    row.push_back(th.omega);
    values.push_back(row);
  }
  posterior["samples"] = {{"names", names}, {"values", values}};
  j["posterior"] = posterior;

  j["per_t_logpred"] = fit.scored_log_pred();
  j["cum_log_marglik"] = fit.cum_log_marglik;
  j["ess"] = fit.ess;
  j["filtered_x_mean"] = fit.filtered_x_mean;
  std::vector<double> shocks;
  for (std::size_t t = 0; t < series.size(); ++t) shocks.push_back(shock_from_obs(series.y[t], fit.filtered_x_mean[t]));
  j["standardized_shocks"] = shocks;
  json warnings = json::array();
  for (const auto& w : fit.diagnostics.warnings) warnings.push_back({{"t_start", w.t_start}, {"t_flag", w.t_flag}});
  j["diagnostics"] = {{"beta_retries", fit.diagnostics.beta_retries},
                      {"beta_clamps", fit.diagnostics.beta_clamps},
                      {"degeneracy_warnings", warnings}};
  return j;
}

json selection_to_json(const SelectionReport& report, int k_max) {
  json j;
  j["k_max"] = k_max;
  j["burn"] = report.burn;
  json table = json::array();
  json per_t = json::object();
  for (const auto& s : report.per_order) {
    table.push_back({{"order", s.order}, {"seed", s.seed}, {"cum_log_marglik", s.cum_log_marglik}});
    per_t[std::to_string(s.order)] = s.per_t;
  }
  j["per_order"] = table;
  j["per_t_logpred"] = per_t;
  j["best_order"] = report.best_order;
  j["tie_break"] = {{"applied", report.tie_break_applied}, {"rule", "exact ties resolve to the smallest order"}};

  if (k_max >= 2) {
    std::vector<int> linear{0, 1};
    std::vector<int> nonlinear;
    for (int k = 2; k <= k_max; ++k) nonlinear.push_back(k);
    const LpdrSeries series = lpdr(report, linear, nonlinear);
    j["lpdr"] = {{"class_linear", linear},
                 {"class_nonlinear", nonlinear},
                 {"best_linear", series.order_a},
                 {"best_nonlinear", series.order_b},
                 {"final", series.values.empty() ? 0.0 : series.values.back()},
                 {"values", series.values}};
  } else {
    j["lpdr"] = nullptr;
    j["notice"] = "k_max < 2: the nonlinear class {2..k_max} is empty, so no LPDR is reported";
  }
  return j;
}

void cmd_simulate(const SimulateConfig& config) {
  const SvParams theta = simulation_params(config);
  StateInit x0 = StateInit::stationary();
  if (config.x0 != "stationary") {
    try {
      x0 = StateInit::fixed(std::stod(config.x0));
    } catch (const std::exception&) {
      throw ConfigError("--x0 must be 'stationary' or a number");
    }
  }
  const SimOutput sim = simulate(theta, config.length, x0, config.seed);

  std::string csv = "t,y,x,eps\n";
  for (std::size_t t = 0; t < sim.returns.size(); ++t) {
    csv += sim.returns.labels[t] + "," + format_number(sim.returns.y[t]) + "," + format_number(sim.latent[t]) + "," +
           format_number(sim.shocks[t]) + "\n";
  }
  write_atomic(config.out, csv);

  json meta;
  meta["theta"] = theta_to_json(theta);
  meta["order"] = theta.order().value();
  meta["length"] = config.length;
  meta["seed"] = config.seed;
  meta["x0"] = config.x0;
  write_atomic(sidecar(config.out, ".meta.json"), meta.dump(2) + "\n");
}

void cmd_fit(const FitConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  const IngestResult data = load_series(config.input, config.ingest);
  const HermiteOrder order(config.order);
  const PriorSpec prior =
      config.prior ? read_prior(read_json_file(*config.prior), order) : PriorSettings{}.for_order(order);
  const int burn = resolve_burn(config.burn, data.series.size());

  RunOptions options;
  options.checkpoints = config.checkpoints;
  const FilterResult fit =
      run_filter(data.series, order, prior, config.particles, config.seed, config.algorithm, burn, options);
  write_atomic(config.out, fit_to_json(fit, data.series, prior).dump(2) + "\n");

  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  json timing = {{"timing_seconds", seconds}, {"threads", resolve_threads(0)}};
  write_atomic(sidecar(config.out, ".timing.json"), timing.dump(2) + "\n");
}

void cmd_select(const SelectConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  const IngestResult data = load_series(config.input, config.ingest);
  const PriorSettings prior = config.prior ? read_prior_settings(read_json_file(*config.prior)) : PriorSettings{};
  const int burn = resolve_burn(config.burn, data.series.size());
  const SelectionReport report = select_order(data.series, config.k_max, prior, config.particles, config.seed, burn);
  const json j = selection_to_json(report, config.k_max);
  write_atomic(config.out, j.dump(2) + "\n");

  if (!j["lpdr"].is_null()) {
    std::string csv = "t,lpdr\n";
    const auto& values = j["lpdr"]["values"];
    for (std::size_t i = 0; i < values.size(); ++i) {
      csv += data.series.labels[static_cast<std::size_t>(burn) + i] + "," + format_number(values[i].get<double>()) +
             "\n";
    }
    write_atomic(sidecar(config.out, ".lpdr.csv"), csv);
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  json timing = {{"timing_seconds", seconds}, {"threads", resolve_threads(0)}};
  write_atomic(sidecar(config.out, ".timing.json"), timing.dump(2) + "\n");
}

void cmd_curve(const CurveConfig& config) {
  const json fit = read_json_file(config.fit);
  if (!fit.contains("posterior") || !fit["posterior"].contains("samples")) {
    throw InputError("fit file has no posterior samples");
  }
  const HermiteOrder order(fit.at("order").get<int>());
  const auto& values = fit["posterior"]["samples"].at("values");
  if (values.empty()) throw InputError("fit file has no posterior samples");
  std::vector<LeverageSpec> samples;
  samples.reserve(values.size());
  for (const auto& row : values) {
    const auto v = row.get<std::vector<double>>();
    if (static_cast<int>(v.size()) != order.regressors() + 1) throw InputError("posterior sample has wrong width");
    samples.emplace_back(std::span<const double>(v.data() + 2, static_cast<std::size_t>(order.value())));
  }
  const auto grid = parse_grid(config.grid);
  const auto curve = leverage_curve(samples, grid);

  std::string csv = "z,mean,lo,hi\n";
  for (const auto& p : curve) {
    csv += format_number(p.z) + "," + format_number(p.mean) + "," + format_number(p.lo) + "," + format_number(p.hi) +
           "\n";
  }
  write_atomic(config.out, csv);

  json meta;
  meta["order"] = order.value();
  meta["samples"] = samples.size();
  meta["grid"] = config.grid;
  if (fit.contains("standardized_shocks") && !fit["standardized_shocks"].empty()) {
    auto shocks = fit["standardized_shocks"].get<std::vector<double>>();
    const double lo = quantile_inplace(shocks, 0.025);
    const double hi = quantile_inplace(shocks, 0.975);
    meta["shock_interval"] = {lo, hi};
  } else {
    meta["shock_interval"] = nullptr;
  }
  write_atomic(sidecar(config.out, ".meta.json"), meta.dump(2) + "\n");
}

namespace {

void add_ingest_options(CLI::App& cmd, fs::path& input, IngestConfig& ingest, std::string& mode) {
  cmd.add_option("--input", input, "CSV file with a header row")->required();
  cmd.add_option("--mode", mode, "prices (100 x log differences) or returns")->capture_default_str();
  cmd.add_option("--date-col", ingest.date_column, "date/label column; empty for row order")->capture_default_str();
  cmd.add_option("--value-col", ingest.value_column, "price or return column")->capture_default_str();
  cmd.add_option("--return-scale", ingest.return_scale, "multiplier applied to log price differences")
      ->capture_default_str();
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Stochastic volatility with Hermite leverage: simulate, fit, select, curve"};
  app.require_subcommand(1);

  SimulateConfig sim;
  auto* sim_cmd = app.add_subcommand("simulate", "simulate returns from an SV model");
  sim_cmd->add_option("--order", sim.order, "Hermite leverage order")->capture_default_str();
  sim_cmd->add_option("--mu", sim.mu)->capture_default_str();
  sim_cmd->add_option("--beta", sim.beta)->capture_default_str();
  sim_cmd->add_option("--phi", sim.phi, "leverage coefficients phi_1,...")->delimiter(',');
  sim_cmd->add_option("--omega", sim.omega)->capture_default_str();
  sim_cmd->add_option("--tau", sim.tau, "state noise sd (order 0) or with --rho");
  sim_cmd->add_option("--rho", sim.rho, "return/volatility correlation (order 1)");
  sim_cmd->add_option("--length,-T", sim.length, "number of observations")->capture_default_str();
  sim_cmd->add_option("--seed", sim.seed)->capture_default_str();
  sim_cmd->add_option("--x0", sim.x0, "'stationary' or a fixed initial log variance")->capture_default_str();
  sim_cmd->add_option("--out", sim.out, "output CSV (t,y,x,eps)")->required();

  FitConfig fit;
  std::string fit_mode = "prices";
  std::string fit_algorithm = "plav";
  auto* fit_cmd = app.add_subcommand("fit", "estimate an SV model of fixed order");
  add_ingest_options(*fit_cmd, fit.input, fit.ingest, fit_mode);
  fit_cmd->add_option("--order", fit.order)->capture_default_str();
  fit_cmd->add_option("--particles", fit.particles)->capture_default_str();
  fit_cmd->add_option("--seed", fit.seed)->capture_default_str();
  fit_cmd->add_option("--burn", fit.burn, "observations excluded from the marginal likelihood (default 20%)");
  fit_cmd->add_option("--prior", fit.prior, "prior JSON file");
  fit_cmd->add_option("--algorithm", fit_algorithm, "plav, pl or naive")->capture_default_str();
  fit_cmd->add_option("--checkpoints", fit.checkpoints, "extra time indices for posterior summaries")->delimiter(',');
  fit_cmd->add_option("--out", fit.out, "output JSON")->required();

  SelectConfig sel;
  std::string sel_mode = "prices";
  auto* sel_cmd = app.add_subcommand("select", "choose the leverage order by predictive marginal likelihood");
  add_ingest_options(*sel_cmd, sel.input, sel.ingest, sel_mode);
  sel_cmd->add_option("--kmax", sel.k_max)->capture_default_str();
  sel_cmd->add_option("--particles", sel.particles)->capture_default_str();
  sel_cmd->add_option("--seed", sel.seed)->capture_default_str();
  sel_cmd->add_option("--burn", sel.burn);
  sel_cmd->add_option("--prior", sel.prior);
  sel_cmd->add_option("--out", sel.out, "output JSON")->required();

  CurveConfig curve;
  auto* curve_cmd = app.add_subcommand("curve", "news-impact curve from a fit");
  curve_cmd->add_option("--fit", curve.fit, "JSON written by 'fit'")->required();
  curve_cmd->add_option("--grid", curve.grid, "lo:hi:step")->capture_default_str();
  curve_cmd->add_option("--out", curve.out, "output CSV (z,mean,lo,hi)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*sim_cmd) {
      cmd_simulate(sim);
    } else if (*fit_cmd) {
      fit.ingest.mode = parse_ingest_mode(fit_mode);
      fit.algorithm = parse_algorithm(fit_algorithm);
      cmd_fit(fit);
    } else if (*sel_cmd) {
      sel.ingest.mode = parse_ingest_mode(sel_mode);
      cmd_select(sel);
    } else if (*curve_cmd) {
      cmd_curve(curve);
    }
  } catch (const InputError& e) {
    std::cerr << "svnl: input error: " << e.what() << "\n";
    return kInputError;
  } catch (const DegeneracyError& e) {
    std::cerr << "svnl: numerical degeneracy: " << e.what() << "\n";
    return kDegenerate;
  } catch (const ConfigError& e) {
    std::cerr << "svnl: configuration error: " << e.what() << "\n";
    return kConfigError;
  } catch (const json::exception& e) {
    std::cerr << "svnl: input error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::exception& e) {
    std::cerr << "svnl: " << e.what() << "\n";
    return kUnexpected;
  }
  return kOk;
}

}  // namespace svnl::cli
