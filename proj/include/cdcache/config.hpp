#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace cdcache::model {

// One experiment. Powers and the sensing threshold are linear watts;
// intensities are nodes/m^2; one slot is one second.
struct ScenarioConfig {
  double lambda_user = 0.0;
  double lambda_bs = 0.0;
  double alpha = 0.0;
  double power_d2d = 0.0;
  double power_bs = 0.0;
  double pathloss = 0.0;
  double sense_threshold = 0.0;
  double fading_rate = 0.0;
  int num_channels = 0;
  double request_rate = 0.0;
  int library_size = 0;
  int cache_size = 0;
  double zipf_exponent = 0.0;
  double window_side = 0.0;
  std::uint64_t seed = 0;

  bool operator==(const ScenarioConfig&) const = default;
};

double dbm_to_watts(double dbm);
double watts_to_dbm(double watts);

// Sensing threshold that puts `mean_bs_in_ssr` BSs, on average, inside the
// BS sensing region of a D2D transmitter.
double calibrated_sense_threshold(const ScenarioConfig& cfg,
                                  double mean_bs_in_ssr = 1.0);

// The numerical-results scenario: 2000 m window, 100 users and 1 BS per
// pi*500^2 m^2, 23/43 dBm, beta = 4, 10 channels, 0.09 req/s, N = 200,
// M = 10, Zipf 1, alpha = 0.5, mu = 1, threshold calibrated to one BS.
ScenarioConfig reference_scenario();

struct Validation {
  std::optional<ScenarioConfig> config;
  std::vector<std::string> errors;
  std::vector<std::string> warnings;

  bool ok() const { return errors.empty(); }
};

// Reports every violated invariant, not only the first.
Validation validate_config(const ScenarioConfig& cfg);

// Throws Error(config) listing all violations.
ScenarioConfig require_valid(const ScenarioConfig& cfg);

// Flat `key = value` text. Unlisted keys keep their reference values;
// `power_d2d_dbm`, `power_bs_dbm` and `sense_threshold_dbm` are accepted.
// If no threshold is given it is recalibrated for the final parameters.
ScenarioConfig parse_config(std::string_view text);
ScenarioConfig load_config(const std::filesystem::path& path);

// Exact round trip through parse_config (17 significant digits).
std::string format_config(const ScenarioConfig& cfg);

const std::vector<std::string>& field_names();
bool has_field(std::string_view key);
void set_field(ScenarioConfig& cfg, std::string_view key, double value);
double get_field(const ScenarioConfig& cfg, std::string_view key);

nlohmann::json to_json(const ScenarioConfig& cfg);

}  // namespace cdcache::model
