#include "cdcache/geometry.hpp"

#include <cmath>
#include <numbers>

#include "cdcache/error.hpp"
#include "cdcache/zipf.hpp"

namespace cdcache::geometry {

TierParams TierParams::from_config(const model::ScenarioConfig& cfg) {
  return TierParams{{cfg.alpha * cfg.lambda_user, cfg.lambda_bs}, {cfg.power_d2d, cfg.power_bs}};
}

double tier_assoc_prob(Tier i, Tier j, const TierParams& tiers, double pathloss) {
  if (i == j) throw Error(ErrorCode::domain, "tier association needs two distinct tiers");
  const double li = tiers.lambda(i);
  if (li <= 0.0) return 0.0;
  const double pi = tiers.p(i);
  double sum = 0.0;
  for (Tier k : {Tier::d2d, Tier::bs}) {
    sum += (tiers.lambda(k) / li) * std::pow(tiers.p(k) / pi, 2.0 / pathloss);
  }
  return 1.0 / sum;
}

SubsetSplit subset_split(const model::ScenarioConfig& cfg) {
  const double hit = model::cache_hit_prob(cfg.cache_size, cfg.zipf_exponent, cfg.library_size);
  const double d2d_wins =
      tier_assoc_prob(Tier::d2d, Tier::bs, TierParams::from_config(cfg), cfg.pathloss);
  const double a = cfg.alpha;
  SubsetSplit s;
  s.p_local = a * hit;
  s.p_d2d = (1.0 - a) * hit * d2d_wins;
  s.p_bs = (1.0 - hit) + (1.0 - a) * hit * (1.0 - d2d_wins);
  return s;
}

double cell_size_pdf(double area, double lambda_bs) {
  if (area < 0.0) throw Error(ErrorCode::domain, "cell area must be non-negative");
  if (area == 0.0) return 0.0;
  const double k = kCellShape;
  const double rate = lambda_bs * k;
  return std::exp(k * std::log(rate) + (k - 1.0) * std::log(area) - rate * area - std::lgamma(k));
}

double users_per_bs_pmf(int n, double lambda_users, double lambda_bs) {
  if (n < 0) return 0.0;
  if (lambda_users <= 0.0) return n == 0 ? 1.0 : 0.0;
  const double k = kCellShape;
  const double kl = k * lambda_bs;
  const double nn = static_cast<double>(n);
  const double log_p = nn * std::log(lambda_users) + k * std::log(kl) -
                       (k + nn) * std::log(lambda_users + kl) + std::lgamma(k + nn) -
                       std::lgamma(nn + 1.0) - std::lgamma(k);
  return std::exp(log_p);
}

DiscretePmf users_per_bs_dist(double lambda_users, double lambda_bs, double tail) {
  DiscretePmf p;
  double acc = 0.0;
  // The mass is unimodal, so stop only once past the mean.
  const double mean = lambda_users / lambda_bs;
  for (int n = 0;; ++n) {
    const double m = users_per_bs_pmf(n, lambda_users, lambda_bs);
    p.mass.push_back(m);
    acc += m;
    if (n > mean && 1.0 - acc < tail) break;
    // Past the mode the term ratio q falls, so the tail is below m q / (1 - q).
    // Needed for large means, where 1 - acc stalls at round-off level.
    if (n > mean && n > 0) {
      const double prev = p.mass[static_cast<std::size_t>(n) - 1];
      const double q = prev > 0.0 ? m / prev : 0.0;
      if (q < 1.0 && m * q / (1.0 - q) < tail) break;
    }
    if (n > 100000000) throw Error(ErrorCode::numerical, "users-per-BS law does not converge");
  }
  p.truncation_tail = std::max(0.0, 1.0 - acc);
  return p;
}

double bs_user_intensity(const model::ScenarioConfig& cfg) {
  return subset_split(cfg).p_bs * cfg.lambda_user;
}

double ssr_count_intensity(Tier t, const model::ScenarioConfig& cfg) {
  const auto tiers = TierParams::from_config(cfg);
  const double e = 2.0 / cfg.pathloss;
  return std::numbers::pi * tiers.lambda(t) *
         std::pow(tiers.p(t) / (cfg.sense_threshold * cfg.fading_rate), e) * std::tgamma(1.0 + e);
}

double d2d_group_user_intensity(const model::ScenarioConfig& cfg) {
  const double e = 2.0 / cfg.pathloss;
  return std::numbers::pi * subset_split(cfg).p_d2d * cfg.lambda_user *
         std::pow(cfg.power_d2d / (cfg.sense_threshold * cfg.fading_rate), e) * std::tgamma(1.0 + e);
}

double Window::distance2(Point a, Point b) const {
  double dx = std::abs(a.x - b.x);
  double dy = std::abs(a.y - b.y);
  if (dx > 0.5 * side) dx = side - dx;
  if (dy > 0.5 * side) dy = side - dy;
  return dx * dx + dy * dy;
}

double Window::distance(Point a, Point b) const { return std::sqrt(distance2(a, b)); }

Point Window::wrap(Point p) const {
  p.x = std::fmod(p.x, side);
  p.y = std::fmod(p.y, side);
  if (p.x < 0.0) p.x += side;
  if (p.y < 0.0) p.y += side;
  return p;
}

PointPattern sample_ppp(double intensity, Window window, std::mt19937_64& rng) {
  if (intensity < 0.0) throw Error(ErrorCode::domain, "PPP intensity must be non-negative");
  PointPattern pat;
  pat.intensity = intensity;
  pat.window = window;
  const double mean = intensity * window.area();
  if (mean <= 0.0) return pat;
  std::poisson_distribution<std::int64_t> count(mean);
  const auto n = count(rng);
  std::uniform_real_distribution<double> coord(0.0, window.side);
  pat.points.reserve(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) {
    const double x = coord(rng);
    const double y = coord(rng);
    pat.points.push_back({x, y});
  }
  return pat;
}

PointPattern sample_ppp(double intensity, Window window, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto pat = sample_ppp(intensity, window, rng);
  pat.seed = seed;
  return pat;
}

void write_pattern_csv(std::ostream& os, const PointPattern& pattern) {
  const auto old = os.precision(17);
  os << "x,y\n";
  for (const auto& p : pattern.points) os << p.x << ',' << p.y << '\n';
  os.precision(old);
}

}  // namespace cdcache::geometry
