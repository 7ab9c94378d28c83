#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "svnl/filter.hpp"
#include "svnl/ingest.hpp"
#include "svnl/selection.hpp"

namespace svnl::cli {

/// Process exit codes.
enum ExitCode : int {
  kOk = 0,
  kUnexpected = 1,
  kInputError = 2,
  kDegenerate = 3,
  kConfigError = 4,
};

struct SimulateConfig {
  int order = 1;
  double mu = -0.026;
  double beta = 0.970;
  std::vector<double> phi{-0.045};  // first `order` entries used, zero-padded
  double omega = 0.143;
  std::optional<double> tau;  // order 0: omega = tau; order 1 with rho: reparameterized
  std::optional<double> rho;
  int length = 2000;
  std::uint64_t seed = 1;
  std::string x0 = "stationary";  // or a number
  std::filesystem::path out;
};

struct FitConfig {
  std::filesystem::path input;
  IngestConfig ingest;
  int order = 1;
  int particles = 10000;
  std::uint64_t seed = 1;
  std::optional<int> burn;  // default: 20% of the series
  std::optional<std::filesystem::path> prior;
  Algorithm algorithm = Algorithm::kPlav;
  std::vector<int> checkpoints;
  std::filesystem::path out;
};

struct SelectConfig {
  std::filesystem::path input;
  IngestConfig ingest;
  int k_max = kMaxHermiteOrder;
  int particles = 10000;
  std::uint64_t seed = 1;
  std::optional<int> burn;
  std::optional<std::filesystem::path> prior;
  std::filesystem::path out;
};

struct CurveConfig {
  std::filesystem::path fit;
  std::string grid = "-4:4:0.1";  // lo:hi:step
  std::filesystem::path out;
};

SvParams simulation_params(const SimulateConfig& config);
/// Default burn-in: 20% of the series length.
int default_burn(std::size_t length);
std::vector<double> parse_grid(const std::string& spec);

PriorSettings read_prior_settings(const nlohmann::json& j);
/// Full prior for one order: settings plus optional "A0" / "b0" overrides.
PriorSpec read_prior(const nlohmann::json& j, HermiteOrder order);
nlohmann::json prior_to_json(const PriorSpec& prior);

nlohmann::json fit_to_json(const FilterResult& fit, const ReturnSeries& series, const PriorSpec& prior);
nlohmann::json selection_to_json(const SelectionReport& report, int k_max);

/// Writes via a temporary file and rename.
void write_atomic(const std::filesystem::path& path, const std::string& content);
std::string format_number(double v);

void cmd_simulate(const SimulateConfig& config);
void cmd_fit(const FitConfig& config);
void cmd_select(const SelectConfig& config);
void cmd_curve(const CurveConfig& config);

/// Entry point shared by the executable and tests.
int run_cli(int argc, const char* const* argv);

}  // namespace svnl::cli
