#include "cdcache.h"

#include <cmath>
#include <cstring>
#include <exception>
#include <new>
#include <string>
#include <utility>

#include "cdcache/config.hpp"
#include "cdcache/error.hpp"
#include "cdcache/geometry.hpp"
#include "cdcache/log.hpp"
#include "cdcache/mqueue.hpp"
#include "cdcache/pipeline.hpp"
#include "cdcache/pmf.hpp"
#include "cdcache/priority.hpp"
#include "cdcache/simulator.hpp"
#include "cdcache/zipf.hpp"

struct cdc_config {
  cdcache::model::ScenarioConfig cfg;
};

struct cdc_pmf {
  cdcache::DiscretePmf pmf;
  bool degenerate = false;
};

struct cdc_report {
  cdcache::sim::SimulationResult result;
};

namespace {

thread_local std::string g_last_error;
thread_local std::string g_last_manifest;

cdc_status to_status(cdcache::ErrorCode c) {
  using cdcache::ErrorCode;
  switch (c) {
    case ErrorCode::domain: return CDC_ERR_DOMAIN;
    case ErrorCode::stability: return CDC_ERR_STABILITY;
    case ErrorCode::numerical: return CDC_ERR_NUMERICAL;
    case ErrorCode::config: return CDC_ERR_CONFIG;
    case ErrorCode::io: return CDC_ERR_IO;
    case ErrorCode::degenerate: return CDC_ERR_DEGENERATE;
  }
  return CDC_ERR_INTERNAL;
}

cdc_status fail(cdc_status s, std::string msg) {
  g_last_error = std::move(msg);
  return s;
}

// Runs `fn`, mapping every exception onto a status code.
template <class F>
cdc_status guarded(F&& fn) {
  try {
    g_last_error.clear();
    return fn();
  } catch (const cdcache::Error& e) {
    return fail(to_status(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(CDC_ERR_INTERNAL, "out of memory");
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(CDC_ERR_IO, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(CDC_ERR_ARGUMENT, e.what());
  } catch (const std::out_of_range& e) {
    return fail(CDC_ERR_ARGUMENT, e.what());
  } catch (const std::exception& e) {
    return fail(CDC_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(CDC_ERR_INTERNAL, "unknown exception");
  }
}

#define CDC_REQUIRE(cond, what)                  \
  do {                                           \
    if (!(cond)) return fail(CDC_ERR_ARGUMENT, what); \
  } while (0)

cdcache::sim::SimulationOptions sim_options(int64_t slots, int replications) {
  cdcache::sim::SimulationOptions o;
  if (slots > 0) o.slots = slots;
  if (replications > 0) o.replications = replications;
  return o;
}

cdc_status finish_run(const cdcache::pipeline::RunManifest& m) {
  g_last_manifest = m.to_json().dump(2);
  return CDC_OK;
}

cdc_pmf* wrap(cdcache::DiscretePmf p, bool degenerate) {
  auto* h = new cdc_pmf;
  h->pmf = std::move(p);
  h->degenerate = degenerate;
  return h;
}

cdc_pmf* wrap(cdcache::mqueue::MixturePmf m) { return wrap(std::move(m.pmf), m.degenerate); }

}  // namespace

extern "C" {

const char* cdc_version(void) { return "0.1.0"; }

const char* cdc_status_name(cdc_status s) {
  switch (s) {
    case CDC_OK: return "ok";
    case CDC_ERR_DOMAIN: return "domain";
    case CDC_ERR_STABILITY: return "stability";
    case CDC_ERR_NUMERICAL: return "numerical";
    case CDC_ERR_CONFIG: return "config";
    case CDC_ERR_IO: return "io";
    case CDC_ERR_DEGENERATE: return "degenerate";
    case CDC_ERR_ARGUMENT: return "argument";
    case CDC_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* cdc_last_error(void) { return g_last_error.c_str(); }

void cdc_set_warning_handler(cdc_warning_fn fn, void* user) {
  if (!fn) {
    cdcache::set_warning_sink({});
    return;
  }
  cdcache::set_warning_sink([fn, user](std::string_view msg) {
    const std::string s(msg);
    fn(s.c_str(), user);
  });
}

cdc_status cdc_config_default(cdc_config** out) {
  CDC_REQUIRE(out, "null output pointer");
  return guarded([&] {
    *out = new cdc_config{cdcache::model::reference_scenario()};
    return CDC_OK;
  });
}

cdc_status cdc_config_parse(const char* text, cdc_config** out) {
  CDC_REQUIRE(text && out, "null argument");
  return guarded([&] {
    *out = new cdc_config{cdcache::model::parse_config(text)};
    return CDC_OK;
  });
}

cdc_status cdc_config_load(const char* path, cdc_config** out) {
  CDC_REQUIRE(path && out, "null argument");
  return guarded([&] {
    *out = new cdc_config{cdcache::pipeline::load_config_any(path)};
    return CDC_OK;
  });
}

cdc_status cdc_config_clone(const cdc_config* cfg, cdc_config** out) {
  CDC_REQUIRE(cfg && out, "null argument");
  return guarded([&] {
    *out = new cdc_config{cfg->cfg};
    return CDC_OK;
  });
}

void cdc_config_free(cdc_config* cfg) { delete cfg; }

int cdc_config_has_key(const char* key) { return key && cdcache::model::has_field(key) ? 1 : 0; }

cdc_status cdc_config_set(cdc_config* cfg, const char* key, double value) {
  CDC_REQUIRE(cfg && key, "null argument");
  if (!cdcache::model::has_field(key)) return fail(CDC_ERR_ARGUMENT, std::string("unknown parameter: ") + key);
  return guarded([&] {
    cdcache::model::set_field(cfg->cfg, key, value);
    return CDC_OK;
  });
}

cdc_status cdc_config_get(const cdc_config* cfg, const char* key, double* out) {
  CDC_REQUIRE(cfg && key && out, "null argument");
  if (!cdcache::model::has_field(key)) return fail(CDC_ERR_ARGUMENT, std::string("unknown parameter: ") + key);
  return guarded([&] {
    *out = cdcache::model::get_field(cfg->cfg, key);
    return CDC_OK;
  });
}

cdc_status cdc_config_set_seed(cdc_config* cfg, uint64_t seed) {
  CDC_REQUIRE(cfg, "null config");
  cfg->cfg.seed = seed;
  return CDC_OK;
}

uint64_t cdc_config_seed(const cdc_config* cfg) { return cfg ? cfg->cfg.seed : 0; }

cdc_status cdc_config_calibrate_threshold(cdc_config* cfg, double mean_bs_in_ssr) {
  CDC_REQUIRE(cfg, "null config");
  return guarded([&] {
    cfg->cfg.sense_threshold = cdcache::model::calibrated_sense_threshold(cfg->cfg, mean_bs_in_ssr);
    return CDC_OK;
  });
}

cdc_status cdc_config_validate(const cdc_config* cfg) {
  CDC_REQUIRE(cfg, "null config");
  return guarded([&] {
    const auto v = cdcache::model::validate_config(cfg->cfg);
    for (const auto& w : v.warnings) cdcache::warn(w);
    if (v.ok()) return CDC_OK;
    std::string msg;
    for (const auto& e : v.errors) {
      if (!msg.empty()) msg += '\n';
      msg += e;
    }
    return fail(CDC_ERR_CONFIG, msg);
  });
}

cdc_status cdc_config_format(const cdc_config* cfg, char* buf, size_t len, size_t* needed) {
  CDC_REQUIRE(cfg, "null config");
  return guarded([&] {
    const std::string text = cdcache::model::format_config(cfg->cfg);
    if (needed) *needed = text.size() + 1;
    if (!buf) return CDC_OK;
    if (len < text.size() + 1) return fail(CDC_ERR_ARGUMENT, "buffer too small");
    std::memcpy(buf, text.c_str(), text.size() + 1);
    return CDC_OK;
  });
}

cdc_status cdc_zipf_pmf(int rank, double nu, int n_lib, double* out) {
  CDC_REQUIRE(out, "null output pointer");
  return guarded([&] {
    *out = cdcache::model::zipf_pmf(rank, nu, n_lib);
    return CDC_OK;
  });
}

cdc_status cdc_cache_hit_prob(int m, double nu, int n_lib, double* out) {
  CDC_REQUIRE(out, "null output pointer");
  return guarded([&] {
    *out = cdcache::model::cache_hit_prob(m, nu, n_lib);
    return CDC_OK;
  });
}

cdc_status cdc_subset_split(const cdc_config* cfg, double out[3]) {
  CDC_REQUIRE(cfg && out, "null argument");
  return guarded([&] {
    const auto s = cdcache::geometry::subset_split(cdcache::model::require_valid(cfg->cfg));
    out[0] = s.p_local;
    out[1] = s.p_d2d;
    out[2] = s.p_bs;
    return CDC_OK;
  });
}

cdc_status cdc_steady_fractions(const cdc_config* cfg, double out[3]) {
  CDC_REQUIRE(cfg && out, "null argument");
  return guarded([&] {
    const auto c = cdcache::model::require_valid(cfg->cfg);
    auto base = c;
    base.alpha = 0.0;
    out[0] = cdcache::mqueue::bs_steady_fraction(c);
    out[1] = cdcache::mqueue::d2d_steady_fraction(c);
    out[2] = cdcache::mqueue::bs_steady_fraction(base);
    return CDC_OK;
  });
}

cdc_status cdc_ssr_intensities(const cdc_config* cfg, double out[2]) {
  CDC_REQUIRE(cfg && out, "null argument");
  return guarded([&] {
    const auto c = cdcache::model::require_valid(cfg->cfg);
    out[0] = cdcache::geometry::ssr_count_intensity(cdcache::geometry::Tier::d2d, c);
    out[1] = cdcache::geometry::ssr_count_intensity(cdcache::geometry::Tier::bs, c);
    return CDC_OK;
  });
}

cdc_status cdc_analytic_pmf(const cdc_config* cfg, cdc_pmf_kind kind, cdc_pmf** out) {
  CDC_REQUIRE(cfg && out, "null argument");
  return guarded([&] {
    namespace mq = cdcache::mqueue;
    const auto c = cdcache::model::require_valid(cfg->cfg);
    auto base = c;
    base.alpha = 0.0;
    switch (kind) {
      case CDC_PMF_BS_QUEUE: *out = wrap(mq::bs_queue_length_pmf(c)); break;
      case CDC_PMF_BS_DELAY: *out = wrap(mq::bs_delay_pmf(c)); break;
      case CDC_PMF_D2D_QUEUE: *out = wrap(mq::d2d_queue_length_pmf(c)); break;
      case CDC_PMF_D2D_DELAY: *out = wrap(mq::d2d_delay_pmf(c)); break;
      case CDC_PMF_BASELINE_QUEUE: *out = wrap(mq::bs_queue_length_pmf(base)); break;
      case CDC_PMF_BASELINE_DELAY: *out = wrap(mq::bs_delay_pmf(base)); break;
      case CDC_PMF_USERS_PER_BS:
        *out = wrap(cdcache::geometry::users_per_bs_dist(cdcache::geometry::bs_user_intensity(c), c.lambda_bs, 1e-9),
                    false);
        break;
      default: return fail(CDC_ERR_ARGUMENT, "unknown PMF kind");
    }
    return CDC_OK;
  });
}

size_t cdc_pmf_size(const cdc_pmf* pmf) { return pmf ? pmf->pmf.size() : 0; }
double cdc_pmf_at(const cdc_pmf* pmf, size_t n) { return pmf ? pmf->pmf.at(n) : 0.0; }
double cdc_pmf_tail(const cdc_pmf* pmf) { return pmf ? pmf->pmf.truncation_tail : 0.0; }
double cdc_pmf_mean(const cdc_pmf* pmf) { return pmf ? pmf->pmf.mean() : std::nan(""); }
int cdc_pmf_degenerate(const cdc_pmf* pmf) { return pmf && pmf->degenerate ? 1 : 0; }

double cdc_total_variation(const cdc_pmf* a, const cdc_pmf* b) {
  if (!a || !b) return std::nan("");
  return cdcache::total_variation(a->pmf, b->pmf);
}

void cdc_pmf_free(cdc_pmf* pmf) { delete pmf; }

cdc_status cdc_simulate(const cdc_config* cfg, int64_t slots, int replications, cdc_report** out) {
  CDC_REQUIRE(cfg && out, "null argument");
  return guarded([&] {
    const auto c = cdcache::model::require_valid(cfg->cfg);
    *out = new cdc_report{cdcache::sim::simulate(c, sim_options(slots, replications))};
    return CDC_OK;
  });
}

static const cdcache::sim::ClassMetrics* class_of(const cdc_report* r, cdc_node_class cls) {
  switch (cls) {
    case CDC_CLASS_BS: return &r->result.proposed.bs;
    case CDC_CLASS_D2D: return &r->result.proposed.d2d;
    case CDC_CLASS_BASELINE_BS: return &r->result.baseline.bs;
  }
  return nullptr;
}

cdc_status cdc_report_steady(const cdc_report* r, cdc_node_class cls, double* fraction, double* half_width,
                             uint64_t* nodes) {
  CDC_REQUIRE(r, "null report");
  const auto* m = class_of(r, cls);
  CDC_REQUIRE(m, "unknown node class");
  if (fraction) *fraction = m->fraction;
  if (half_width) *half_width = m->half_width;
  if (nodes) *nodes = m->nodes;
  return CDC_OK;
}

cdc_status cdc_report_pmf(const cdc_report* r, cdc_node_class cls, cdc_metric metric, cdc_pmf** out) {
  CDC_REQUIRE(r && out, "null argument");
  const auto* m = class_of(r, cls);
  CDC_REQUIRE(m, "unknown node class");
  return guarded([&] {
    const auto& h = metric == CDC_METRIC_DELAY ? m->delay : m->queue_length;
    if (h.total() == 0) return fail(CDC_ERR_DEGENERATE, "no samples recorded for this class");
    *out = wrap(h.pmf(), false);
    return CDC_OK;
  });
}

void cdc_report_free(cdc_report* r) { delete r; }

cdc_status cdc_run_analytic(const cdc_config* cfg, const char* out_dir) {
  CDC_REQUIRE(cfg && out_dir, "null argument");
  return guarded([&] { return finish_run(cdcache::pipeline::run_analytic(cfg->cfg, out_dir)); });
}

cdc_status cdc_run_simulate(const cdc_config* cfg, const char* out_dir, int64_t slots, int replications) {
  CDC_REQUIRE(cfg && out_dir, "null argument");
  return guarded([&] {
    return finish_run(cdcache::pipeline::run_simulate(cfg->cfg, out_dir, sim_options(slots, replications)));
  });
}

cdc_status cdc_run_compare(const cdc_config* cfg, const char* out_dir, int64_t slots, int replications,
                           int* all_passed) {
  CDC_REQUIRE(cfg && out_dir, "null argument");
  return guarded([&] {
    bool passed = false;
    const auto m = cdcache::pipeline::run_compare(cfg->cfg, out_dir, sim_options(slots, replications), &passed);
    if (all_passed) *all_passed = passed ? 1 : 0;
    return finish_run(m);
  });
}

cdc_status cdc_run_sweep(const cdc_config* cfg, const char* out_dir, const char* param, const double* values,
                         size_t count, int64_t slots, int replications, int simulate) {
  CDC_REQUIRE(cfg && out_dir && param, "null argument");
  CDC_REQUIRE(values || count == 0, "null values");
  if (!cdcache::model::has_field(param)) return fail(CDC_ERR_ARGUMENT, std::string("unknown parameter: ") + param);
  return guarded([&] {
    cdcache::pipeline::SweepOptions o;
    o.simulation = sim_options(slots, replications);
    o.simulate = simulate != 0;
    return finish_run(
        cdcache::pipeline::run_sweep(cfg->cfg, out_dir, param, std::vector<double>(values, values + count), o));
  });
}

const char* cdc_last_manifest(void) { return g_last_manifest.c_str(); }

cdc_status cdc_parse_values(const char* text, double step, double* out, size_t capacity, size_t* count) {
  CDC_REQUIRE(text && count, "null argument");
  return guarded([&] {
    const auto v = cdcache::pipeline::parse_values(text, step);
    *count = v.size();
    if (!out) return CDC_OK;
    if (capacity < v.size()) return fail(CDC_ERR_ARGUMENT, "output capacity too small");
    std::copy(v.begin(), v.end(), out);
    return CDC_OK;
  });
}

}  // extern "C"
