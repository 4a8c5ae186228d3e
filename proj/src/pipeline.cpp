#include "cdcache/pipeline.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "cdcache/error.hpp"
#include "cdcache/priority.hpp"
#include "cdcache/zipf.hpp"

namespace cdcache::pipeline {

namespace fs = std::filesystem;

AnalyticResult compute_analytic(const model::ScenarioConfig& cfg_in, const mqueue::MixtureOptions& options) {
  const auto cfg = model::require_valid(cfg_in);
  AnalyticResult r;
  r.config = cfg;
  r.hit_prob = model::cache_hit_prob(cfg.cache_size, cfg.zipf_exponent, cfg.library_size);
  r.d2d_wins = geometry::tier_assoc_prob(geometry::Tier::d2d, geometry::Tier::bs,
                                         geometry::TierParams::from_config(cfg), cfg.pathloss);
  r.split = geometry::subset_split(cfg);
  r.lambda_gamma_d2d = geometry::ssr_count_intensity(geometry::Tier::d2d, cfg);
  r.lambda_gamma_bs = geometry::ssr_count_intensity(geometry::Tier::bs, cfg);
  r.lambda_gamma_users = geometry::d2d_group_user_intensity(cfg);
  r.bs_user_intensity = geometry::bs_user_intensity(cfg);
  r.users_per_bs = geometry::users_per_bs_dist(r.bs_user_intensity, cfg.lambda_bs, 1e-9);
  r.bs_queue = mqueue::bs_queue_length_pmf(cfg, options);
  r.bs_delay = mqueue::bs_delay_pmf(cfg, options);
  r.d2d_queue = mqueue::d2d_queue_length_pmf(cfg, options);
  r.d2d_delay = mqueue::d2d_delay_pmf(cfg, options);
  model::ScenarioConfig base = cfg;
  base.alpha = 0.0;
  if (cfg.alpha == 0.0) {
    r.baseline_queue = r.bs_queue;
    r.baseline_delay = r.bs_delay;
  } else {
    r.baseline_queue = mqueue::bs_queue_length_pmf(base, options);
    r.baseline_delay = mqueue::bs_delay_pmf(base, options);
  }
  r.baseline_queue.conditioning = r.baseline_delay.conditioning = "steady BSs without caching";
  r.steady_bs = mqueue::bs_steady_fraction(cfg);
  r.steady_d2d = mqueue::d2d_steady_fraction(cfg);
  r.steady_baseline = mqueue::bs_steady_fraction(base);
  return r;
}

nlohmann::json analytic_to_json(const AnalyticResult& r) {
  return {{"config", model::to_json(r.config)},
          {"config_text", model::format_config(r.config)},
          {"cache_hit_prob", r.hit_prob},
          {"tier_assoc_d2d", r.d2d_wins},
          {"subset", {{"local", r.split.p_local}, {"d2d", r.split.p_d2d}, {"bs", r.split.p_bs}}},
          {"ssr_intensity", {{"d2d", r.lambda_gamma_d2d}, {"bs", r.lambda_gamma_bs}, {"users", r.lambda_gamma_users}}},
          {"bs_user_intensity", r.bs_user_intensity},
          {"users_per_bs", pmf_to_json(r.users_per_bs)},
          {"steady_fraction", {{"bs", r.steady_bs}, {"d2d", r.steady_d2d}, {"baseline_bs", r.steady_baseline}}},
          {"bs", {{"queue_length", mqueue::mixture_to_json(r.bs_queue)}, {"delay", mqueue::mixture_to_json(r.bs_delay)}}},
          {"d2d",
           {{"queue_length", mqueue::mixture_to_json(r.d2d_queue)}, {"delay", mqueue::mixture_to_json(r.d2d_delay)}}},
          {"baseline_bs",
           {{"queue_length", mqueue::mixture_to_json(r.baseline_queue)},
            {"delay", mqueue::mixture_to_json(r.baseline_delay)}}}};
}

namespace {

std::ostringstream csv_stream(const model::ScenarioConfig& cfg) {
  std::ostringstream os;
  os.precision(17);
  std::istringstream lines(model::format_config(cfg));
  std::string line;
  while (std::getline(lines, line)) os << kConfigPrefix << line << '\n';
  return os;
}

// Shortest text that reads back to the same double.
std::string num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void pmf_rows(std::ostream& os, std::string_view prefix, const DiscretePmf& pmf) {
  for (std::size_t n = 0; n < pmf.size(); ++n) os << prefix << n << ',' << num(pmf.mass[n]) << '\n';
}

std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

void write_analytic_files(const AnalyticResult& a, const fs::path& dir, RunManifest& m) {
  const auto& cfg = a.config;
  {
    auto os = csv_stream(cfg);
    os << "quantity,value\n";
    os << "cache_hit_prob," << num(a.hit_prob) << '\n';
    os << "tier_assoc_d2d," << num(a.d2d_wins) << '\n';
    os << "p_local," << num(a.split.p_local) << '\n';
    os << "p_d2d," << num(a.split.p_d2d) << '\n';
    os << "p_bs," << num(a.split.p_bs) << '\n';
    os << "lambda_gamma_d2d," << num(a.lambda_gamma_d2d) << '\n';
    os << "lambda_gamma_bs," << num(a.lambda_gamma_bs) << '\n';
    os << "lambda_gamma_users," << num(a.lambda_gamma_users) << '\n';
    os << "bs_user_intensity," << num(a.bs_user_intensity) << '\n';
    os << "steady_bs," << num(a.steady_bs) << '\n';
    os << "steady_d2d," << num(a.steady_d2d) << '\n';
    os << "steady_baseline_bs," << num(a.steady_baseline) << '\n';
    write_atomic(dir / "geometry.csv", os.str());
  }
  {
    auto os = csv_stream(cfg);
    write_pmf_csv(os, a.users_per_bs);
    write_atomic(dir / "users_per_bs.csv", os.str());
  }
  auto pmf_file = [&](const char* name, const mqueue::MixturePmf& q, const mqueue::MixturePmf& d) {
    auto os = csv_stream(cfg);
    if (q.degenerate) os << "# degenerate: " << q.notice << '\n';
    os << "metric,n,probability\n";
    pmf_rows(os, "queue_length,", q.pmf);
    pmf_rows(os, "delay,", d.pmf);
    write_atomic(dir / name, os.str());
  };
  pmf_file("bs_pmf.csv", a.bs_queue, a.bs_delay);
  pmf_file("d2d_pmf.csv", a.d2d_queue, a.d2d_delay);
  pmf_file("baseline_pmf.csv", a.baseline_queue, a.baseline_delay);
  write_atomic(dir / "analytic.json", dump(analytic_to_json(a)));
  for (const char* f : {"geometry.csv", "users_per_bs.csv", "bs_pmf.csv", "d2d_pmf.csv", "baseline_pmf.csv",
                        "analytic.json"}) {
    m.outputs.push_back(dir / f);
  }
  if (a.d2d_queue.degenerate) m.notices.push_back("D2D outputs degenerate: " + a.d2d_queue.notice);
}

void write_simulation_files(const model::ScenarioConfig& cfg, const sim::SimulationResult& s,
                            const sim::SimulationOptions& opt, const fs::path& dir, RunManifest& m) {
  const std::pair<const char*, const sim::MetricsReport*> classes_src[] = {
      {"bs", &s.proposed}, {"d2d", &s.proposed}, {"baseline_bs", &s.baseline}};
  auto cls = [](const char* name, const sim::MetricsReport& r) -> const sim::ClassMetrics& {
    return std::string_view(name) == "d2d" ? r.d2d : r.bs;
  };
  {
    auto os = csv_stream(cfg);
    os << "class,metric,n,value\n";
    for (const auto& [name, rep] : classes_src) {
      if (!opt.baseline && rep == &s.baseline) continue;
      const auto& c = cls(name, *rep);
      pmf_rows(os, std::string(name) + ",delay,", c.delay.pmf());
      pmf_rows(os, std::string(name) + ",queue_length,", c.queue_length.pmf());
    }
    write_atomic(dir / "sim_pmf.csv", os.str());
  }
  {
    auto os = csv_stream(cfg);
    os << "class,steady_fraction,ci\n";
    for (const auto& [name, rep] : classes_src) {
      if (!opt.baseline && rep == &s.baseline) continue;
      const auto& c = cls(name, *rep);
      if (c.nodes == 0) continue;
      os << name << ',' << num(c.fraction) << ',' << num(c.half_width) << '\n';
    }
    write_atomic(dir / "sim_steady.csv", os.str());
  }
  nlohmann::json j{{"config", model::to_json(cfg)},
                   {"config_text", model::format_config(cfg)},
                   {"slots", opt.slots},
                   {"replications", opt.replications},
                   {"replication_seeds", nlohmann::json::array()},
                   {"proposed", sim::report_to_json(s.proposed)}};
  for (int r = 0; r < opt.replications; ++r) j["replication_seeds"].push_back(sim::replication_seed(cfg.seed, r));
  if (opt.baseline) j["baseline"] = sim::report_to_json(s.baseline);
  write_atomic(dir / "simulation.json", dump(j));
  for (const char* f : {"sim_pmf.csv", "sim_steady.csv", "simulation.json"}) m.outputs.push_back(dir / f);
  if (s.proposed.d2d.nodes == 0) m.notices.push_back("simulation has no active D2D transmitter");
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw Error(ErrorCode::io, "cannot create output directory " + dir.string());
}

DiscretePmf shifted(const DiscretePmf& p, int offset) {
  DiscretePmf out = p;
  if (offset > 0) out.mass.insert(out.mass.begin(), static_cast<std::size_t>(offset), 0.0);
  return out;
}

}  // namespace

std::vector<Comparison> compare_results(const AnalyticResult& a, const sim::SimulationResult& s) {
  std::vector<Comparison> out;
  auto add = [&](const char* name, const DiscretePmf& analytic, const sim::Histogram& hist, double tol,
                 bool skip, const std::string& why) {
    Comparison c;
    c.distribution = name;
    c.tolerance = tol;
    if (skip || hist.total() == 0) {
      c.skipped = true;
      c.pass = true;
      c.notice = skip ? why : "no empirical samples from steady nodes";
      c.tv = std::nan("");
    } else {
      c.tv = total_variation(analytic, hist.pmf());
      c.pass = c.informational() || c.tv <= tol;
    }
    out.push_back(c);
  };
  const bool no_d2d = a.d2d_queue.degenerate;
  const std::string why = "D2D comparison skipped: " + a.d2d_queue.notice;
  const double info = std::nan("");
  add("bs_queue_length", a.bs_queue.pmf, s.proposed.bs.queue_length, kBsQueueTolerance, false, "");
  add("bs_delay", shifted(a.bs_delay.pmf, kDelayOffset), s.proposed.bs.delay, info, false, "");
  add("d2d_queue_length", a.d2d_queue.pmf, s.proposed.d2d.queue_length, info, no_d2d, why);
  add("d2d_delay", shifted(a.d2d_delay.pmf, kDelayOffset), s.proposed.d2d.delay, kD2dDelayTolerance, no_d2d, why);
  add("baseline_queue_length", a.baseline_queue.pmf, s.baseline.bs.queue_length, info, false, "");
  add("baseline_delay", shifted(a.baseline_delay.pmf, kDelayOffset), s.baseline.bs.delay, info, false, "");
  return out;
}

std::string Comparison::status() const {
  if (skipped) return "skipped";
  if (informational()) return "info";
  return pass ? "pass" : "fail";
}

nlohmann::json RunManifest::to_json() const {
  nlohmann::json j{{"mode", mode}, {"seed", seed}, {"wall_seconds", wall_seconds}, {"config", model::to_json(config)}};
  j["outputs"] = nlohmann::json::array();
  for (const auto& p : outputs) j["outputs"].push_back(p.string());
  j["notices"] = notices;
  return j;
}

RunManifest run_analytic(const model::ScenarioConfig& cfg_in, const fs::path& out_dir) {
  Timer timer;
  const auto cfg = model::require_valid(cfg_in);
  ensure_dir(out_dir);
  RunManifest m{cfg, "analytic", {}, 0.0, cfg.seed, {}};
  write_analytic_files(compute_analytic(cfg), out_dir, m);
  m.wall_seconds = timer.seconds();
  return m;
}

RunManifest run_simulate(const model::ScenarioConfig& cfg_in, const fs::path& out_dir,
                         const sim::SimulationOptions& options) {
  Timer timer;
  const auto cfg = model::require_valid(cfg_in);
  ensure_dir(out_dir);
  RunManifest m{cfg, "simulate", {}, 0.0, cfg.seed, {}};
  write_simulation_files(cfg, sim::simulate(cfg, options), options, out_dir, m);
  m.wall_seconds = timer.seconds();
  return m;
}

RunManifest run_compare(const model::ScenarioConfig& cfg_in, const fs::path& out_dir,
                        const sim::SimulationOptions& options_in, bool* all_passed) {
  Timer timer;
  const auto cfg = model::require_valid(cfg_in);
  ensure_dir(out_dir);
  sim::SimulationOptions options = options_in;
  options.baseline = true;
  RunManifest m{cfg, "compare", {}, 0.0, cfg.seed, {}};
  const auto a = compute_analytic(cfg);
  const auto s = sim::simulate(cfg, options);
  write_analytic_files(a, out_dir, m);
  write_simulation_files(cfg, s, options, out_dir, m);
  const auto cmp = compare_results(a, s);
  bool ok = true;
  auto os = csv_stream(cfg);
  os << "distribution,tv,tolerance,status\n";
  nlohmann::json j{{"config", model::to_json(cfg)}, {"config_text", model::format_config(cfg)},
                   {"delay_offset", kDelayOffset}, {"comparisons", nlohmann::json::array()}};
  for (const auto& c : cmp) {
    os << c.distribution << ',' << num(c.tv) << ',' << num(c.tolerance) << ',' << c.status() << '\n';
    nlohmann::json e{{"distribution", c.distribution}, {"status", c.status()}};
    e["tv"] = c.skipped ? nlohmann::json(nullptr) : nlohmann::json(c.tv);
    e["tolerance"] = c.informational() ? nlohmann::json(nullptr) : nlohmann::json(c.tolerance);
    if (!c.notice.empty()) {
      e["notice"] = c.notice;
      m.notices.push_back(c.distribution + ": " + c.notice);
    }
    j["comparisons"].push_back(e);
    ok = ok && c.pass;
  }
  j["all_passed"] = ok;
  write_atomic(out_dir / "compare.csv", os.str());
  write_atomic(out_dir / "compare.json", dump(j));
  m.outputs.push_back(out_dir / "compare.csv");
  m.outputs.push_back(out_dir / "compare.json");
  if (all_passed) *all_passed = ok;
  m.wall_seconds = timer.seconds();
  return m;
}

RunManifest run_sweep(const model::ScenarioConfig& cfg_in, const fs::path& out_dir, const std::string& param,
                      const std::vector<double>& values, const SweepOptions& options) {
  Timer timer;
  if (!model::has_field(param)) throw Error(ErrorCode::config, "unknown sweep parameter '" + param + "'");
  if (values.empty()) throw Error(ErrorCode::config, "sweep needs at least one value");
  const auto cfg = model::require_valid(cfg_in);
  // Validate every point before spending time on any of them.
  std::vector<model::ScenarioConfig> points;
  for (std::size_t i = 0; i < values.size(); ++i) {
    auto p = cfg;
    model::set_field(p, param, values[i]);
    if (!options.common_random_numbers) p.seed = sim::splitmix64(cfg.seed + 0x9e3779b97f4a7c15ULL * (i + 1));
    points.push_back(model::require_valid(p));
  }
  ensure_dir(out_dir);
  RunManifest m{cfg, "sweep", {}, 0.0, cfg.seed, {}};
  auto os = csv_stream(cfg);
  os << "param,value,source,class,steady_fraction,ci\n";
  nlohmann::json j{{"config", model::to_json(cfg)},
                   {"config_text", model::format_config(cfg)},
                   {"param", param},
                   {"common_random_numbers", options.common_random_numbers},
                   {"points", nlohmann::json::array()}};
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    const double v = values[i];
    nlohmann::json pt{{"value", v}, {"seed", p.seed}};
    auto row = [&](const char* source, const char* cls, double frac, double ci) {
      os << param << ',' << num(v) << ',' << source << ',' << cls << ',' << num(frac) << ',' << num(ci) << '\n';
    };
    model::ScenarioConfig base = p;
    base.alpha = 0.0;
    const double a_bs = mqueue::bs_steady_fraction(p);
    const double a_base = mqueue::bs_steady_fraction(base);
    row("analytic", "bs", a_bs, 0.0);
    const bool has_d2d = mqueue::d2d_user_count_mean(p) > 0.0;
    double a_d2d = 0.0;
    if (has_d2d) {
      a_d2d = mqueue::d2d_steady_fraction(p);
      row("analytic", "d2d", a_d2d, 0.0);
    }
    row("analytic", "baseline_bs", a_base, 0.0);
    pt["analytic"] = {{"bs", a_bs}, {"baseline_bs", a_base}};
    if (has_d2d) pt["analytic"]["d2d"] = a_d2d;
    if (options.simulate) {
      auto so = options.simulation;
      so.baseline = true;
      const auto s = sim::simulate(p, so);
      row("simulation", "bs", s.proposed.bs.fraction, s.proposed.bs.half_width);
      if (s.proposed.d2d.nodes > 0) row("simulation", "d2d", s.proposed.d2d.fraction, s.proposed.d2d.half_width);
      row("simulation", "baseline_bs", s.baseline.bs.fraction, s.baseline.bs.half_width);
      pt["simulation"] = {{"bs", {{"steady_fraction", s.proposed.bs.fraction}, {"ci", s.proposed.bs.half_width},
                                  {"nodes", s.proposed.bs.nodes}}},
                          {"baseline_bs", {{"steady_fraction", s.baseline.bs.fraction}, {"ci", s.baseline.bs.half_width},
                                           {"nodes", s.baseline.bs.nodes}}}};
      if (s.proposed.d2d.nodes > 0) {
        pt["simulation"]["d2d"] = {{"steady_fraction", s.proposed.d2d.fraction}, {"ci", s.proposed.d2d.half_width},
                                   {"nodes", s.proposed.d2d.nodes}};
      }
    }
    j["points"].push_back(pt);
  }
  if (options.simulate) {
    j["slots"] = options.simulation.slots;
    j["replications"] = options.simulation.replications;
  }
  write_atomic(out_dir / "sweep.csv", os.str());
  write_atomic(out_dir / "sweep.json", dump(j));
  m.outputs = {out_dir / "sweep.csv", out_dir / "sweep.json"};
  m.wall_seconds = timer.seconds();
  return m;
}

std::vector<double> parse_values(std::string_view text, double step) {
  auto number = [](std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    std::size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(std::string(s), &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (s.empty() || pos != s.size()) throw Error(ErrorCode::config, "bad number '" + std::string(s) + "'");
    return v;
  };
  std::vector<double> out;
  if (const auto dots = text.find(".."); dots != std::string_view::npos) {
    const double lo = number(text.substr(0, dots));
    const double hi = number(text.substr(dots + 2));
    if (!(step > 0.0)) throw Error(ErrorCode::config, "a range needs a positive step");
    if (hi < lo) throw Error(ErrorCode::config, "range end lies below its start");
    const auto count = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
    for (long i = 0; i <= count; ++i) {
      // Round to the step's grid so 0.01 * 7 prints as 0.07.
      const double v = lo + static_cast<double>(i) * step;
      out.push_back(std::round(v * 1e12) / 1e12);
    }
    return out;
  }
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto piece = text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    out.push_back(number(piece));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

void write_atomic(const fs::path& path, std::string_view content) {
  const fs::path tmp = path.string() + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw Error(ErrorCode::io, "cannot write " + tmp.string());
    os.write(content.data(), static_cast<std::streamsize>(content.size()));
    os.flush();
    if (!os) throw Error(ErrorCode::io, "write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorCode::io, "cannot move output into place at " + path.string());
  }
}

model::ScenarioConfig load_config_any(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot read config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const std::exception& e) {
      throw Error(ErrorCode::io, path.string() + ": " + e.what());
    }
    if (!j.contains("config_text")) throw Error(ErrorCode::config, path.string() + " carries no config");
    return model::parse_config(j["config_text"].get<std::string>());
  }
  if (text.find(kConfigPrefix) != std::string::npos) {
    std::istringstream lines(text);
    std::string line, cfg_text;
    while (std::getline(lines, line)) {
      if (line.starts_with(kConfigPrefix)) cfg_text += line.substr(kConfigPrefix.size()) + "\n";
    }
    return model::parse_config(cfg_text);
  }
  return model::parse_config(text);
}

}  // namespace cdcache::pipeline
