// Batch front-end over the cdcache C API.
#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cdcache.h"

namespace {

struct Common {
  std::string config;
  std::string out = "out";
};

struct SimFlags {
  long long slots = 10000;
  int reps = 30;
};

void print_warning(const char* msg, void*) { std::fprintf(stderr, "warning: %s\n", msg); }

int report(cdc_status s, const char* what) {
  std::fprintf(stderr, "error (%s): %s failed\n%s\n", cdc_status_name(s), what, cdc_last_error());
  return s == CDC_ERR_INTERNAL ? 70 : 2;
}

// Loads and validates the configuration; returns nullptr after printing
// diagnostics.
cdc_config* load(const Common& c, int* code) {
  cdc_config* cfg = nullptr;
  cdc_status s = cdc_config_load(c.config.c_str(), &cfg);
  if (s != CDC_OK) {
    *code = report(s, ("reading " + c.config).c_str());
    return nullptr;
  }
  s = cdc_config_validate(cfg);
  if (s != CDC_OK) {
    *code = report(s, "configuration check");
    cdc_config_free(cfg);
    return nullptr;
  }
  return cfg;
}

void print_outputs() {
  // The manifest is JSON; echo it so callers can find every file.
  std::printf("%s\n", cdc_last_manifest());
}

void add_common(CLI::App* app, Common& c) {
  app->add_option("-c,--config", c.config, "Config file, or a CSV/JSON artifact embedding one")
      ->required()
      ->check(CLI::ExistingFile);
  app->add_option("-o,--out", c.out, "Output directory")->capture_default_str();
}

void add_sim(CLI::App* app, SimFlags& f) {
  app->add_option("--slots", f.slots, "Slots per replication")->capture_default_str()->check(CLI::Range(10LL, 1LL << 40));
  app->add_option("--reps", f.reps, "Independent replications")->capture_default_str()->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cache-enabled D2D network analysis and simulation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(cdc_version()));

  Common c_an, c_sim, c_cmp, c_sw;
  SimFlags f_sim, f_cmp, f_sw;
  std::string param, values;
  double step = 0.0;
  bool no_sim = false;

  auto* analytic = app.add_subcommand("analytic", "Analytic PMFs, subset shares and SSR intensities");
  add_common(analytic, c_an);

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo simulation of the proposed system and the baseline");
  add_common(simulate, c_sim);
  add_sim(simulate, f_sim);

  auto* compare = app.add_subcommand("compare", "Analytic and simulated PMFs with total-variation checks");
  add_common(compare, c_cmp);
  add_sim(compare, f_cmp);

  auto* sweep = app.add_subcommand("sweep", "Steady fractions over a range of one parameter");
  add_common(sweep, c_sw);
  add_sim(sweep, f_sw);
  sweep->add_option("--param", param, "Config field to vary")->required();
  sweep->add_option("--values", values, "Comma list, or lo..hi together with --step")->required();
  sweep->add_option("--step", step, "Step for a lo..hi range");
  sweep->add_flag("--no-sim", no_sim, "Write analytic rows only");

  CLI11_PARSE(app, argc, argv);
  cdc_set_warning_handler(print_warning, nullptr);

  int code = 0;
  if (*analytic) {
    cdc_config* cfg = load(c_an, &code);
    if (!cfg) return code;
    const cdc_status s = cdc_run_analytic(cfg, c_an.out.c_str());
    cdc_config_free(cfg);
    if (s != CDC_OK) return report(s, "analytic run");
    print_outputs();
    return 0;
  }

  if (*simulate) {
    cdc_config* cfg = load(c_sim, &code);
    if (!cfg) return code;
    const cdc_status s = cdc_run_simulate(cfg, c_sim.out.c_str(), f_sim.slots, f_sim.reps);
    cdc_config_free(cfg);
    if (s != CDC_OK) return report(s, "simulation run");
    print_outputs();
    return 0;
  }

  if (*compare) {
    cdc_config* cfg = load(c_cmp, &code);
    if (!cfg) return code;
    int passed = 0;
    const cdc_status s = cdc_run_compare(cfg, c_cmp.out.c_str(), f_cmp.slots, f_cmp.reps, &passed);
    cdc_config_free(cfg);
    if (s != CDC_OK) return report(s, "compare run");
    print_outputs();
    // Outputs were written, so the exit status stays 0 either way.
    std::fprintf(stderr, "tolerance checks: %s (see compare.csv)\n", passed ? "all passed" : "some failed");
    return 0;
  }

  // sweep
  if (!cdc_config_has_key(param.c_str())) {
    std::fprintf(stderr, "error: unknown parameter '%s'\n", param.c_str());
    return 2;
  }
  size_t count = 0;
  cdc_status s = cdc_parse_values(values.c_str(), step, nullptr, 0, &count);
  if (s != CDC_OK) return report(s, "parsing --values");
  std::vector<double> v(count);
  s = cdc_parse_values(values.c_str(), step, v.data(), v.size(), &count);
  if (s != CDC_OK) return report(s, "parsing --values");
  cdc_config* cfg = load(c_sw, &code);
  if (!cfg) return code;
  s = cdc_run_sweep(cfg, c_sw.out.c_str(), param.c_str(), v.data(), v.size(), f_sw.slots, f_sw.reps, no_sim ? 0 : 1);
  cdc_config_free(cfg);
  if (s != CDC_OK) return report(s, "sweep run");
  print_outputs();
  return 0;
}
