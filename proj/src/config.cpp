#include "cdcache/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "cdcache/error.hpp"

namespace cdcache::model {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::string fmt17(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

bool is_integral(double v) { return std::isfinite(v) && std::floor(v) == v; }

}  // namespace

double dbm_to_watts(double dbm) { return std::pow(10.0, dbm / 10.0) / 1000.0; }

double watts_to_dbm(double watts) { return 10.0 * std::log10(watts * 1000.0); }

double calibrated_sense_threshold(const ScenarioConfig& cfg, double mean_bs_in_ssr) {
  if (!(mean_bs_in_ssr > 0.0) || !std::isfinite(mean_bs_in_ssr)) {
    throw Error(ErrorCode::domain, "calibration target must be a positive mean BS count");
  }
  if (!(cfg.lambda_bs > 0.0) || !(cfg.power_bs > 0.0) || !(cfg.fading_rate > 0.0) || !(cfg.pathloss > 0.0)) {
    throw Error(ErrorCode::domain, "calibration needs positive lambda_bs, power_bs, fading_rate and pathloss");
  }
  const double g = std::tgamma(1.0 + 2.0 / cfg.pathloss);
  const double base = mean_bs_in_ssr / (std::numbers::pi * cfg.lambda_bs * g);
  return cfg.power_bs / (cfg.fading_rate * std::pow(base, cfg.pathloss / 2.0));
}

ScenarioConfig reference_scenario() {
  const double cell = std::numbers::pi * 500.0 * 500.0;
  ScenarioConfig cfg;
  cfg.lambda_user = 100.0 / cell;
  cfg.lambda_bs = 1.0 / cell;
  cfg.alpha = 0.5;
  cfg.power_d2d = dbm_to_watts(23.0);
  cfg.power_bs = dbm_to_watts(43.0);
  cfg.pathloss = 4.0;
  cfg.fading_rate = 1.0;
  cfg.num_channels = 10;
  cfg.request_rate = 0.09;
  cfg.library_size = 200;
  cfg.cache_size = 10;
  cfg.zipf_exponent = 1.0;
  cfg.window_side = 2000.0;
  cfg.seed = 1;
  cfg.sense_threshold = calibrated_sense_threshold(cfg);
  return cfg;
}

Validation validate_config(const ScenarioConfig& cfg) {
  Validation v;
  auto positive = [&](double value, const char* name) {
    if (!(std::isfinite(value) && value > 0.0)) {
      v.errors.push_back(std::string(name) + " must be a finite positive number");
    }
  };

  positive(cfg.lambda_user, "lambda_user");
  positive(cfg.lambda_bs, "lambda_bs");
  positive(cfg.power_d2d, "power_d2d");
  positive(cfg.power_bs, "power_bs");
  positive(cfg.sense_threshold, "sense_threshold");
  positive(cfg.fading_rate, "fading_rate");
  positive(cfg.request_rate, "request_rate");
  positive(cfg.window_side, "window_side");

  if (cfg.lambda_user > 0.0 && cfg.lambda_bs > 0.0) {
    if (cfg.lambda_user < cfg.lambda_bs) {
      v.errors.push_back("lambda_user must be >= lambda_bs");
    } else if (cfg.lambda_user < 10.0 * cfg.lambda_bs) {
      v.warnings.push_back("lambda_user < 10 * lambda_bs; the analysis assumes many users per BS");
    }
  }
  if (!(cfg.alpha >= 0.0 && cfg.alpha <= 1.0)) {
    v.errors.push_back("alpha must lie in [0, 1]");
  }
  if (!(std::isfinite(cfg.pathloss) && cfg.pathloss >= 2.0)) {
    v.errors.push_back("pathloss must be >= 2");
  }
  if (cfg.num_channels < 1) {
    v.errors.push_back("num_channels must be a positive integer");
  }
  if (cfg.cache_size < 1) {
    v.errors.push_back("cache_size must be >= 1");
  }
  if (cfg.library_size < 1 || cfg.cache_size >= cfg.library_size) {
    v.errors.push_back("cache_size must be smaller than library_size");
  }
  if (!(std::isfinite(cfg.zipf_exponent) && cfg.zipf_exponent >= 0.0)) {
    v.errors.push_back("zipf_exponent must be >= 0");
  }
  if (cfg.num_channels >= 1 && cfg.request_rate >= cfg.num_channels) {
    v.errors.push_back("stability impossible: request_rate must be below num_channels");
  }
  if (cfg.lambda_bs > 0.0 && cfg.window_side > 0.0 &&
      cfg.window_side < 8.0 / std::sqrt(cfg.lambda_bs)) {
    v.warnings.push_back("window_side is below 8 mean BS spacings; edge effects rely on the torus metric");
  }

  if (v.errors.empty()) v.config = cfg;
  return v;
}

ScenarioConfig require_valid(const ScenarioConfig& cfg) {
  auto v = validate_config(cfg);
  if (!v.ok()) {
    std::string msg = "invalid configuration:";
    for (const auto& e : v.errors) msg += "\n  " + e;
    throw Error(ErrorCode::config, msg);
  }
  return *v.config;
}

const std::vector<std::string>& field_names() {
  static const std::vector<std::string> names = {
      "lambda_user",  "lambda_bs",    "alpha",         "power_d2d",     "power_bs",
      "pathloss",     "sense_threshold", "fading_rate", "num_channels",  "request_rate",
      "library_size", "cache_size",   "zipf_exponent", "window_side",   "seed"};
  return names;
}

bool has_field(std::string_view key) {
  for (const auto& n : field_names()) {
    if (n == key) return true;
  }
  return false;
}

void set_field(ScenarioConfig& cfg, std::string_view key, double value) {
  auto as_int = [&](int& dst) {
    if (!is_integral(value) || std::abs(value) > std::numeric_limits<int>::max()) {
      throw Error(ErrorCode::config, std::string(key) + " must be an integer");
    }
    dst = static_cast<int>(value);
  };
  if (key == "lambda_user") cfg.lambda_user = value;
  else if (key == "lambda_bs") cfg.lambda_bs = value;
  else if (key == "alpha") cfg.alpha = value;
  else if (key == "power_d2d") cfg.power_d2d = value;
  else if (key == "power_bs") cfg.power_bs = value;
  else if (key == "pathloss") cfg.pathloss = value;
  else if (key == "sense_threshold") cfg.sense_threshold = value;
  else if (key == "fading_rate") cfg.fading_rate = value;
  else if (key == "num_channels") as_int(cfg.num_channels);
  else if (key == "request_rate") cfg.request_rate = value;
  else if (key == "library_size") as_int(cfg.library_size);
  else if (key == "cache_size") as_int(cfg.cache_size);
  else if (key == "zipf_exponent") cfg.zipf_exponent = value;
  else if (key == "window_side") cfg.window_side = value;
  else if (key == "seed") {
    if (!is_integral(value) || value < 0.0) {
      throw Error(ErrorCode::config, "seed must be a non-negative integer");
    }
    cfg.seed = static_cast<std::uint64_t>(value);
  } else {
    throw Error(ErrorCode::config, "unknown configuration key '" + std::string(key) + "'");
  }
}

double get_field(const ScenarioConfig& cfg, std::string_view key) {
  if (key == "lambda_user") return cfg.lambda_user;
  if (key == "lambda_bs") return cfg.lambda_bs;
  if (key == "alpha") return cfg.alpha;
  if (key == "power_d2d") return cfg.power_d2d;
  if (key == "power_bs") return cfg.power_bs;
  if (key == "pathloss") return cfg.pathloss;
  if (key == "sense_threshold") return cfg.sense_threshold;
  if (key == "fading_rate") return cfg.fading_rate;
  if (key == "num_channels") return cfg.num_channels;
  if (key == "request_rate") return cfg.request_rate;
  if (key == "library_size") return cfg.library_size;
  if (key == "cache_size") return cfg.cache_size;
  if (key == "zipf_exponent") return cfg.zipf_exponent;
  if (key == "window_side") return cfg.window_side;
  if (key == "seed") return static_cast<double>(cfg.seed);
  throw Error(ErrorCode::config, "unknown configuration key '" + std::string(key) + "'");
}

ScenarioConfig parse_config(std::string_view text) {
  ScenarioConfig cfg = reference_scenario();
  bool threshold_given = false;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::config, "line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string raw = trim(std::string_view(body).substr(eq + 1));
    if (key == "seed") {
      std::size_t pos = 0;
      unsigned long long s = 0;
      try {
        s = std::stoull(raw, &pos);
      } catch (const std::exception&) {
        pos = 0;
      }
      if (pos != raw.size() || raw.empty() || raw.front() == '-') {
        throw Error(ErrorCode::config, "line " + std::to_string(lineno) + ": seed must be a non-negative integer");
      }
      cfg.seed = s;
      continue;
    }
    double value = 0.0;
    std::size_t pos = 0;
    try {
      value = std::stod(raw, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos == 0 || pos != raw.size()) {
      throw Error(ErrorCode::config, "line " + std::to_string(lineno) + ": value of '" + key + "' is not a number");
    }
    constexpr std::string_view dbm_suffix = "_dbm";
    if (key.size() > dbm_suffix.size() && key.ends_with(dbm_suffix)) {
      const std::string base = key.substr(0, key.size() - dbm_suffix.size());
      if (base != "power_d2d" && base != "power_bs" && base != "sense_threshold") {
        throw Error(ErrorCode::config, "line " + std::to_string(lineno) + ": '" + key + "' has no dBm form");
      }
      set_field(cfg, base, dbm_to_watts(value));
      if (base == "sense_threshold") threshold_given = true;
      continue;
    }
    if (!has_field(key)) {
      throw Error(ErrorCode::config, "line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
    set_field(cfg, key, value);
    if (key == "sense_threshold") threshold_given = true;
  }
  if (!threshold_given && cfg.lambda_bs > 0.0 && cfg.power_bs > 0.0 && cfg.pathloss > 0.0 && cfg.fading_rate > 0.0) {
    cfg.sense_threshold = calibrated_sense_threshold(cfg);
  }
  return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open config file '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string format_config(const ScenarioConfig& cfg) {
  std::ostringstream os;
  for (const auto& name : field_names()) {
    os << name << " = ";
    if (name == "seed") {
      os << cfg.seed;
    } else {
      os << fmt17(get_field(cfg, name));
    }
    os << '\n';
  }
  return os.str();
}

nlohmann::json to_json(const ScenarioConfig& cfg) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& name : field_names()) {
    if (name == "seed") {
      j[name] = cfg.seed;
    } else if (name == "num_channels" || name == "library_size" || name == "cache_size") {
      j[name] = static_cast<int>(get_field(cfg, name));
    } else {
      j[name] = get_field(cfg, name);
    }
  }
  return j;
}

}  // namespace cdcache::model
