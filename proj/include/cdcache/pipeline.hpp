#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "cdcache/config.hpp"
#include "cdcache/geometry.hpp"
#include "cdcache/mqueue.hpp"
#include "cdcache/pmf.hpp"
#include "cdcache/simulator.hpp"

namespace cdcache::pipeline {

// Every analytic quantity written by the `analytic` mode.
struct AnalyticResult {
  model::ScenarioConfig config;
  double hit_prob = 0.0;
  double d2d_wins = 0.0;  // P(T1 > T2)
  geometry::SubsetSplit split{};
  double lambda_gamma_d2d = 0.0;
  double lambda_gamma_bs = 0.0;
  double lambda_gamma_users = 0.0;
  double bs_user_intensity = 0.0;
  DiscretePmf users_per_bs;
  mqueue::MixturePmf bs_queue, bs_delay;
  mqueue::MixturePmf d2d_queue, d2d_delay;
  mqueue::MixturePmf baseline_queue, baseline_delay;
  double steady_bs = 0.0;
  double steady_d2d = 0.0;
  double steady_baseline = 0.0;
};

AnalyticResult compute_analytic(const model::ScenarioConfig& cfg, const mqueue::MixtureOptions& options = {});
nlohmann::json analytic_to_json(const AnalyticResult& r);

// Empirical and analytic delay PMFs share support: both count slots from
// arrival to service, so the analytic mass at n is compared with the
// empirical mass at n + kDelayOffset.
inline constexpr int kDelayOffset = 0;

inline constexpr double kBsQueueTolerance = 0.05;
inline constexpr double kD2dDelayTolerance = 0.07;

// Distributions without a tolerance are reported for information only.
struct Comparison {
  std::string distribution;
  double tv = 0.0;
  double tolerance = 0.0;  // NaN when informational
  bool pass = false;
  bool skipped = false;
  std::string notice;

  bool informational() const { return tolerance != tolerance; }
  std::string status() const;
};

std::vector<Comparison> compare_results(const AnalyticResult& a, const sim::SimulationResult& s);

struct RunManifest {
  model::ScenarioConfig config;
  std::string mode;
  std::vector<std::filesystem::path> outputs;
  double wall_seconds = 0.0;
  std::uint64_t seed = 0;
  std::vector<std::string> notices;

  nlohmann::json to_json() const;
};

RunManifest run_analytic(const model::ScenarioConfig& cfg, const std::filesystem::path& out_dir);
RunManifest run_simulate(const model::ScenarioConfig& cfg, const std::filesystem::path& out_dir,
                         const sim::SimulationOptions& options);
// Writes the analytic and simulation outputs plus compare.csv/json. All
// comparisons passing is reported through `all_passed`.
RunManifest run_compare(const model::ScenarioConfig& cfg, const std::filesystem::path& out_dir,
                        const sim::SimulationOptions& options, bool* all_passed = nullptr);

struct SweepOptions {
  sim::SimulationOptions simulation;
  bool simulate = true;
  // Every point reuses the configured seed so points differ only through
  // the swept parameter. When false, point i runs under
  // splitmix64(seed + golden * (i + 1)).
  bool common_random_numbers = true;
};

RunManifest run_sweep(const model::ScenarioConfig& cfg, const std::filesystem::path& out_dir,
                      const std::string& param, const std::vector<double>& values, const SweepOptions& options);

// "0.1,0.2", "0.01..0.15" with a step, or a single number.
std::vector<double> parse_values(std::string_view text, double step = 0.0);

// Writes via a temporary file in the same directory and renames it.
void write_atomic(const std::filesystem::path& path, std::string_view content);

// Config lines embedded in artifacts start with this prefix.
inline constexpr std::string_view kConfigPrefix = "# cfg ";

// Reads a plain config file or recovers the config embedded in a CSV or
// JSON artifact.
model::ScenarioConfig load_config_any(const std::filesystem::path& path);

}  // namespace cdcache::pipeline
