#include "cdcache/priority.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cdcache/error.hpp"
#include "cdcache/geometry.hpp"

namespace cdcache::mqueue {

using detail::exprel;
using detail::geometric_sum;
using detail::solve_branch;
using detail::solve_unit_branch;

PriorityLoad PriorityLoad::make(double high, double low, int servers) {
  if (high < 0.0 || low < 0.0) throw Error(ErrorCode::domain, "priority loads must be non-negative");
  if (servers < 1) throw Error(ErrorCode::domain, "server count must be >= 1");
  return PriorityLoad{high, low, high + low, servers};
}

namespace {

// Poisson(mean) masses until the remaining tail drops below `tail`.
std::vector<double> poisson_masses(double mean, double tail) {
  std::vector<double> p;
  if (mean <= 0.0) return {1.0};
  double term = std::exp(-mean);
  double acc = 0.0;
  for (int n = 0;; ++n) {
    if (n > 0) term *= mean / n;
    p.push_back(term);
    acc += term;
    if (n > mean && 1.0 - acc < tail) break;
  }
  return p;
}

struct HeavyLoadInputs {
  std::vector<double> outer;  // P(N_gamma2 = n)
  DiscretePmf users;          // users per BS
};

HeavyLoadInputs heavy_inputs(const model::ScenarioConfig& cfg) {
  HeavyLoadInputs in;
  in.outer = poisson_masses(geometry::ssr_count_intensity(geometry::Tier::bs, cfg), 1e-9);
  in.users = geometry::users_per_bs_dist(geometry::bs_user_intensity(cfg), cfg.lambda_bs);
  return in;
}

double mixed_power(const std::vector<double>& outer, double f) {
  double sum = 0.0;
  double pw = 1.0;
  for (double w : outer) {
    sum += w * pw;
    pw *= f;
  }
  return sum;
}

cplx unit_root(int k, int c) { return std::polar(1.0, 2.0 * std::numbers::pi * k / c); }

void check_disk(cplx z) {
  if (std::abs(z) > 1.0 + 1e-12) throw Error(ErrorCode::domain, "evaluation point lies outside the unit disk");
}

void check_set(const ComplexRootSet& set, const char* what) {
  if (!(set.max_residual <= 1e-10)) {
    throw Error(ErrorCode::numerical, std::string(what) + " roots did not converge (residual " +
                                          std::to_string(set.max_residual) + ")");
  }
  if (set.servers > 1 && !(set.min_pairwise_distance() > 1e-8)) {
    throw Error(ErrorCode::numerical, std::string(what) + " roots are not distinct");
  }
}

}  // namespace

double heavy_load_cdf(int k, const model::ScenarioConfig& cfg) {
  if (k < 0) return 0.0;
  const auto in = heavy_inputs(cfg);
  return mixed_power(in.outer, std::min(1.0, in.users.cdf(static_cast<std::size_t>(k))));
}

HeavyLoadDist heavy_load_dist(const model::ScenarioConfig& cfg) {
  const auto in = heavy_inputs(cfg);
  HeavyLoadDist out;
  double outer_sum = 0.0;
  for (double w : in.outer) outer_sum += w;
  out.outer_tail = std::max(0.0, 1.0 - outer_sum);
  double f = 0.0;
  double prev = 0.0;
  for (std::size_t k = 0;; ++k) {
    f += in.users.at(k);
    const double cdf = mixed_power(in.outer, std::min(1.0, f));
    out.pmf.mass.push_back(std::max(0.0, cdf - prev));
    prev = cdf;
    if (cdf >= 1.0 - 1e-6 || k > in.users.size() + 1) break;
  }
  out.pmf.truncation_tail = std::max(0.0, 1.0 - prev);
  return out;
}

ComplexRootSet x_roots(cplx z, const PriorityLoad& load) {
  check_disk(z);
  if (!load.stable()) throw Error(ErrorCode::stability, "priority queue load is not below the server count");
  const int c = load.servers;
  const double a = load.lambda_high / c;
  const cplx b = load.lambda_low * (z - 1.0) / static_cast<double>(c);
  ComplexRootSet set;
  set.family = RootFamily::x_family;
  set.servers = c;
  set.load = load.lambda_high;
  set.load_low = load.lambda_low;
  set.point = z;
  set.roots.push_back(1.0 + solve_unit_branch(b, a, b / (1.0 - a)));
  for (int k = 1; k < c; ++k) set.roots.push_back(solve_branch(unit_root(k, c) * std::exp(b), a));
  for (const cplx& x : set.roots) {
    const cplx r = std::pow(x, c) - std::exp(load.lambda_high * (x - 1.0) + load.lambda_low * (z - 1.0));
    set.max_residual = std::max(set.max_residual, std::abs(r));
  }
  check_set(set, "x-family");
  return set;
}

ComplexRootSet omega_roots(cplx z, double lambda_high, int servers) {
  check_disk(z);
  if (lambda_high < 0.0 || lambda_high >= servers) {
    throw Error(ErrorCode::stability, "high-priority load must lie in [0, servers)");
  }
  const double a = lambda_high / servers;
  ComplexRootSet set = kth_roots(z, servers);
  set.family = RootFamily::omega_family;
  set.load = lambda_high;
  set.max_residual = 0.0;
  for (cplx& w : set.roots) w = solve_branch(w, a);
  for (const cplx& w : set.roots) {
    set.max_residual = std::max(set.max_residual, std::abs(std::pow(w, servers) - z * std::exp(lambda_high * (w - 1.0))));
  }
  check_set(set, "omega-family");
  return set;
}

PriorityQueue::PriorityQueue(double lambda_high, double lambda_low, int servers)
    : load_(PriorityLoad::make(lambda_high, lambda_low, servers)) {
  if (!load_.stable()) {
    throw Error(ErrorCode::stability, "total load " + std::to_string(load_.lambda_total) + " is not below " +
                                          std::to_string(servers) + " servers");
  }
  alpha_ = char_roots_inside(load_.lambda_total, servers);
}

cplx PriorityQueue::alpha_product(cplx y) const {
  cplx prod{1.0, 0.0};
  for (const cplx& a : alpha_.roots) prod *= (y - a) / (1.0 - a);
  return prod;
}

// (c - lT)(e^{lT u} - e^{lH u}) / (lL (y^c - e^{lT u})), u = y - 1, with the
// common factor u cancelled.
cplx PriorityQueue::q_total(cplx y) const {
  const double c = load_.servers;
  const double lh = load_.lambda_high;
  const double ll = load_.lambda_low;
  const double lt = load_.lambda_total;
  const cplx u = y - 1.0;
  return (c - lt) * std::exp(lh * u) * exprel(ll * u) / (geometric_sum(y, load_.servers) - lt * exprel(lt * u)) *
         alpha_product(y);
}

std::vector<cplx> PriorityQueue::initial_x_guess() const {
  const int c = load_.servers;
  const double a = load_.lambda_high / c;
  std::vector<cplx> g(c);
  g[0] = 0.0;
  for (int k = 1; k < c; ++k) g[k] = solve_branch(unit_root(k, c), a);
  return g;
}

std::vector<cplx> PriorityQueue::initial_omega_guess() const {
  const int c = load_.servers;
  const double a = load_.lambda_high / c;
  std::vector<cplx> g(c);
  for (int k = 0; k < c; ++k) g[k] = solve_branch(unit_root(k, c), a);
  return g;
}

// The i = 0 factor (1 - x0)/(z - x0) is combined with the prefactor
// u e^{lL u} / (1 - e^{lL u}) so that x0 = 1 + d0 and z = 1 + u never
// subtract nearly equal numbers.
cplx PriorityQueue::queue_at(cplx z, std::vector<cplx>& guess) const {
  const double ll = load_.lambda_low;
  if (ll == 0.0) return {1.0, 0.0};
  const cplx u = z - 1.0;
  if (u == cplx{0.0, 0.0}) return {1.0, 0.0};
  const int c = load_.servers;
  const double a = load_.lambda_high / c;
  const cplx b = ll * u / static_cast<double>(c);
  const cplx d0 = solve_unit_branch(b, a, guess[0]);
  guess[0] = d0;
  cplx val = std::exp(ll * u) * (c - load_.lambda_total) * d0 / (ll * exprel(ll * u) * (u - d0));
  const cplx shift = std::exp(b);
  for (int k = 1; k < c; ++k) {
    const cplx x = solve_branch(unit_root(k, c) * shift, a, guess[k]);
    guess[k] = x;
    val *= (1.0 - x) / (z - x);
  }
  return val * alpha_product(z);
}

cplx PriorityQueue::delay_at(cplx z, std::vector<cplx>& guess) const {
  if (load_.lambda_low == 0.0) return z;
  const int c = load_.servers;
  const double a = load_.lambda_high / c;
  const auto v = kth_roots(z, c);
  std::vector<cplx> w(c);
  for (int i = 0; i < c; ++i) {
    w[i] = solve_branch(v.roots[i], a, guess[i]);
    guess[i] = w[i];
  }
  cplx sum{0.0, 0.0};
  for (int i = 0; i < c; ++i) {
    cplx r = z;
    for (int j = 0; j < c; ++j) {
      if (j != i) r *= (1.0 - w[j]) / (w[i] - w[j]);
    }
    if (r != cplx{0.0, 0.0}) sum += r * q_total(w[i]);
  }
  return sum;
}

cplx PriorityQueue::queue_pgf(cplx z) const {
  check_disk(z);
  const int c = load_.servers;
  const double a = load_.lambda_high / c;
  const cplx b = load_.lambda_low * (z - 1.0) / static_cast<double>(c);
  std::vector<cplx> guess(c);
  guess[0] = b / (1.0 - a);
  for (int k = 1; k < c; ++k) {
    const cplx q = unit_root(k, c) * std::exp(b);
    guess[k] = q * std::exp(a * (q - 1.0));
  }
  return queue_at(z, guess);
}

cplx PriorityQueue::delay_pgf(cplx z) const {
  check_disk(z);
  const int c = load_.servers;
  const double a = load_.lambda_high / c;
  if (z == cplx{0.0, 0.0}) throw Error(ErrorCode::degenerate, "delay PGF is not evaluated at z = 0");
  std::vector<cplx> guess = kth_roots(z, c).roots;
  for (cplx& g : guess) g = g * std::exp(a * (g - 1.0));
  return delay_at(z, guess);
}

void PriorityQueue::queue_pgf(std::span<const cplx> z, std::span<cplx> out) const {
  if (z.empty()) return;
  const int c = load_.servers;
  const double a = load_.lambda_high / c;
  std::vector<cplx> guess = initial_x_guess();
  guess[0] = load_.lambda_low * (z[0] - 1.0) / static_cast<double>(c) / (1.0 - a);
  for (std::size_t i = 0; i < z.size(); ++i) out[i] = queue_at(z[i], guess);
}

void PriorityQueue::delay_pgf(std::span<const cplx> z, std::span<cplx> out) const {
  std::vector<cplx> guess = initial_omega_guess();
  for (std::size_t i = 0; i < z.size(); ++i) out[i] = delay_at(z[i], guess);
}

PgfEvaluator PriorityQueue::queue_evaluator() const {
  const PriorityQueue q = *this;
  return PgfEvaluator(
      "d2d_queue_length", [q](cplx z) { return q.queue_pgf(z); },
      [q](std::span<const cplx> z, std::span<cplx> out) { q.queue_pgf(z, out); },
      {{"lambda_high", load_.lambda_high}, {"lambda_low", load_.lambda_low}, {"servers", load_.servers}});
}

PgfEvaluator PriorityQueue::delay_evaluator() const {
  const PriorityQueue q = *this;
  return PgfEvaluator(
      "d2d_delay", [q](cplx z) { return q.delay_pgf(z); },
      [q](std::span<const cplx> z, std::span<cplx> out) { q.delay_pgf(z, out); },
      {{"lambda_high", load_.lambda_high}, {"lambda_low", load_.lambda_low}, {"servers", load_.servers}});
}

namespace {

PriorityQueue d2d_queue(int n_k, int n_u, const model::ScenarioConfig& cfg) {
  if (n_k < 0 || n_u < 0) throw Error(ErrorCode::domain, "user counts must be non-negative");
  return PriorityQueue(n_k * cfg.request_rate, n_u * cfg.request_rate, cfg.num_channels);
}

struct D2dMarginals {
  DiscretePmf heavy;
  std::vector<double> users;
};

D2dMarginals d2d_marginals(const model::ScenarioConfig& cfg) {
  D2dMarginals m;
  m.heavy = heavy_load_dist(cfg).pmf;
  m.users = poisson_masses(d2d_user_count_mean(cfg), 1e-6);
  return m;
}

bool pair_stable(int k, int m, const model::ScenarioConfig& cfg) {
  return (k + m) * cfg.request_rate < cfg.num_channels;
}

enum class Metric { queue, delay };

MixturePmf d2d_mixture(const model::ScenarioConfig& cfg, const MixtureOptions& options, Metric metric) {
  MixturePmf out;
  out.conditioning = "steady D2D groups";
  out.weighting = metric == Metric::queue ? "nodes" : "requests";
  if (d2d_user_count_mean(cfg) <= 0.0) {
    out.degenerate = true;
    out.notice = "no D2D traffic: the D2D tier serves no requests for this configuration";
    out.pmf = DiscretePmf::point_mass(0);
    return out;
  }
  const auto marg = d2d_marginals(cfg);
  double basis_total = 0.0;
  double kept = 0.0;
  double tail = 0.0;
  for (std::size_t k = 0; k < marg.heavy.size(); ++k) {
    for (std::size_t m = 0; m < marg.users.size(); ++m) {
      const double p = marg.heavy.mass[k] * marg.users[m];
      const double w = p * (metric == Metric::queue ? 1.0 : static_cast<double>(m));
      basis_total += w;
      if (!pair_stable(static_cast<int>(k), static_cast<int>(m), cfg)) continue;
      out.stable_mass += p;
      if (w < options.min_weight) continue;
      if (m == 0) {
        accumulate(out.pmf, DiscretePmf::point_mass(0), w);
      } else {
        const auto q = d2d_queue(static_cast<int>(k), static_cast<int>(m), cfg);
        const auto pmf = metric == Metric::queue ? invert_adaptive(q.queue_evaluator(), options.inversion)
                                                 : invert_adaptive(q.delay_evaluator(), options.inversion);
        accumulate(out.pmf, pmf, w);
        tail += w * pmf.truncation_tail;
      }
      kept += w;
    }
  }
  if (!(kept > 0.0)) throw Error(ErrorCode::stability, "no steady D2D group");
  for (double& v : out.pmf.mass) v /= kept;
  out.pmf.truncation_tail = tail / kept;
  out.retained = kept / basis_total;
  return out;
}

}  // namespace

cplx d2d_queue_pgf(cplx z, int n_k, int n_u, const model::ScenarioConfig& cfg) {
  return d2d_queue(n_k, n_u, cfg).queue_pgf(z);
}

cplx d2d_delay_pgf(cplx z, int n_k, int n_u, const model::ScenarioConfig& cfg) {
  return d2d_queue(n_k, n_u, cfg).delay_pgf(z);
}

double d2d_user_count_mean(const model::ScenarioConfig& cfg) { return geometry::d2d_group_user_intensity(cfg); }

MixturePmf d2d_queue_length_pmf(const model::ScenarioConfig& cfg, const MixtureOptions& options) {
  return d2d_mixture(cfg, options, Metric::queue);
}

MixturePmf d2d_delay_pmf(const model::ScenarioConfig& cfg, const MixtureOptions& options) {
  return d2d_mixture(cfg, options, Metric::delay);
}

double d2d_steady_fraction(const model::ScenarioConfig& cfg) {
  if (d2d_user_count_mean(cfg) <= 0.0) return 0.0;
  const auto marg = d2d_marginals(cfg);
  double stable = 0.0;
  double total = 0.0;
  for (std::size_t k = 0; k < marg.heavy.size(); ++k) {
    for (std::size_t m = 0; m < marg.users.size(); ++m) {
      const double p = marg.heavy.mass[k] * marg.users[m];
      total += p;
      if (pair_stable(static_cast<int>(k), static_cast<int>(m), cfg)) stable += p;
    }
  }
  return stable / total;
}

}  // namespace cdcache::mqueue
