#include "cdcache/mqueue.hpp"

#include <cmath>

#include "cdcache/error.hpp"
#include "cdcache/geometry.hpp"

namespace cdcache::mqueue {

using detail::exprel;
using detail::geometric_sum;

MultiserverQueue::MultiserverQueue(double load, int servers)
    : load_(load), servers_(servers), roots_(char_roots_inside(load, servers)) {}

cplx MultiserverQueue::root_product(cplx z) const {
  cplx prod{1.0, 0.0};
  for (const cplx& b : roots_.roots) prod *= (z - b) / (1.0 - b);
  return prod;
}

// (z^c - e^{l(z-1)}) / (z - 1) is written as S(z) - l exprel(l(z-1)) so the
// point z = 1 needs no special case.
cplx MultiserverQueue::queue_pgf(cplx z) const {
  if (load_ == 0.0) return {1.0, 0.0};
  const cplx u = z - 1.0;
  const double c = servers_;
  return std::exp(load_ * u) * (c - load_) / (geometric_sum(z, servers_) - load_ * exprel(load_ * u)) *
         root_product(z);
}

cplx MultiserverQueue::delay_pgf(cplx z) const {
  if (load_ == 0.0) return z;
  const double c = servers_;
  cplx sum{0.0, 0.0};
  for (const cplx& v : kth_roots(z, servers_).roots) {
    const cplx s = geometric_sum(v, servers_);
    const cplx e = exprel(load_ * (v - 1.0));
    sum += (s * v / c) * ((c - load_) * e / (s - load_ * e)) * root_product(v);
  }
  return sum;
}

PgfEvaluator MultiserverQueue::queue_evaluator() const {
  const MultiserverQueue q = *this;
  return PgfEvaluator("bs_queue_length", [q](cplx z) { return q.queue_pgf(z); }, {},
                      {{"load", load_}, {"servers", servers_}});
}

PgfEvaluator MultiserverQueue::delay_evaluator() const {
  const MultiserverQueue q = *this;
  return PgfEvaluator("bs_delay", [q](cplx z) { return q.delay_pgf(z); }, {},
                      {{"load", load_}, {"servers", servers_}});
}

namespace {

MultiserverQueue bs_queue(int n2, const model::ScenarioConfig& cfg) {
  if (n2 < 0) throw Error(ErrorCode::domain, "user count must be non-negative");
  const double load = n2 * cfg.request_rate;
  if (load >= cfg.num_channels) {
    throw Error(ErrorCode::stability, "BS with " + std::to_string(n2) + " users is unstable");
  }
  return MultiserverQueue(load, cfg.num_channels);
}

enum class Metric { queue, delay };

MixturePmf bs_mixture(const model::ScenarioConfig& cfg, const MixtureOptions& options, Metric metric) {
  const auto users = geometry::users_per_bs_dist(geometry::bs_user_intensity(cfg), cfg.lambda_bs);
  const int n_max = bs_max_stable_users(cfg);
  MixturePmf out;
  out.conditioning = "steady BSs";
  out.weighting = metric == Metric::queue ? "nodes" : "requests";
  double basis_total = 0.0;
  for (std::size_t n = 0; n < users.size(); ++n) {
    basis_total += users.mass[n] * (metric == Metric::queue ? 1.0 : static_cast<double>(n));
  }
  double kept = 0.0;
  double tail = 0.0;
  for (int n2 = 0; n2 <= n_max && static_cast<std::size_t>(n2) < users.size(); ++n2) {
    out.stable_mass += users.mass[n2];
    const double w = users.mass[n2] * (metric == Metric::queue ? 1.0 : static_cast<double>(n2));
    if (w < options.min_weight) continue;
    const auto q = bs_queue(n2, cfg);
    const auto pmf = metric == Metric::queue ? invert_adaptive(q.queue_evaluator(), options.inversion)
                                             : invert_adaptive(q.delay_evaluator(), options.inversion);
    accumulate(out.pmf, pmf, w);
    tail += w * pmf.truncation_tail;
    kept += w;
  }
  if (!(kept > 0.0)) throw Error(ErrorCode::stability, "no steady BS exists");
  for (double& v : out.pmf.mass) v /= kept;
  out.pmf.truncation_tail = tail / kept;
  out.retained = basis_total > 0.0 ? kept / basis_total : 0.0;
  return out;
}

}  // namespace

cplx bs_queue_pgf(cplx z, int n2, const model::ScenarioConfig& cfg) { return bs_queue(n2, cfg).queue_pgf(z); }

cplx bs_delay_pgf(cplx z, int n2, const model::ScenarioConfig& cfg) { return bs_queue(n2, cfg).delay_pgf(z); }

int bs_max_stable_users(const model::ScenarioConfig& cfg) {
  int n = static_cast<int>(std::ceil(cfg.num_channels / cfg.request_rate)) - 1;
  while (n > 0 && n * cfg.request_rate >= cfg.num_channels) --n;
  while ((n + 1) * cfg.request_rate < cfg.num_channels) ++n;
  return n;
}

std::vector<double> MixturePmf::raw_mass() const {
  std::vector<double> raw = pmf.mass;
  for (double& v : raw) v *= retained;
  return raw;
}

MixturePmf bs_queue_length_pmf(const model::ScenarioConfig& cfg, const MixtureOptions& options) {
  return bs_mixture(cfg, options, Metric::queue);
}

MixturePmf bs_delay_pmf(const model::ScenarioConfig& cfg, const MixtureOptions& options) {
  return bs_mixture(cfg, options, Metric::delay);
}

double bs_steady_fraction(const model::ScenarioConfig& cfg) {
  const auto users = geometry::users_per_bs_dist(geometry::bs_user_intensity(cfg), cfg.lambda_bs);
  const int n_max = bs_max_stable_users(cfg);
  double mass = 0.0;
  for (int n2 = 0; n2 <= n_max && static_cast<std::size_t>(n2) < users.size(); ++n2) mass += users.mass[n2];
  return mass;
}

nlohmann::json mixture_to_json(const MixturePmf& m) {
  nlohmann::json j = pmf_to_json(m.pmf);
  j["stable_mass"] = m.stable_mass;
  j["retained"] = m.retained;
  j["conditioning"] = m.conditioning;
  j["weighting"] = m.weighting;
  j["degenerate"] = m.degenerate;
  if (!m.notice.empty()) j["notice"] = m.notice;
  return j;
}

}  // namespace cdcache::mqueue
