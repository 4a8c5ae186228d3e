#pragma once

#include <cstdint>
#include <ostream>
#include <random>
#include <vector>

#include "cdcache/config.hpp"
#include "cdcache/pmf.hpp"

namespace cdcache::geometry {

// Shape factor of the Gamma fit to Poisson-Voronoi cell areas.
inline constexpr double kCellShape = 3.575;

enum class Tier : int { d2d = 1, bs = 2 };

struct TierParams {
  double intensity[2];  // nodes/m^2, indexed [tier - 1]
  double power[2];      // watts

  static TierParams from_config(const model::ScenarioConfig& cfg);
  double lambda(Tier t) const { return intensity[static_cast<int>(t) - 1]; }
  double p(Tier t) const { return power[static_cast<int>(t) - 1]; }
};

struct SubsetSplit {
  double p_local;  // served from the requester's own cache
  double p_d2d;    // served by the closest D2D transmitter
  double p_bs;     // served by the nearest BS
};

// Probability that tier `i` offers the larger long-term average received
// power. An empty tier wins with probability 0.
double tier_assoc_prob(Tier i, Tier j, const TierParams& tiers, double pathloss);

SubsetSplit subset_split(const model::ScenarioConfig& cfg);

// Gamma density of a typical BS cell area (m^2).
double cell_size_pdf(double area, double lambda_bs);

// Users of intensity `lambda_users` (nodes/m^2) falling in a typical BS cell.
double users_per_bs_pmf(int n, double lambda_users, double lambda_bs);

// users_per_bs_pmf tabulated until the omitted tail is below `tail`.
DiscretePmf users_per_bs_dist(double lambda_users, double lambda_bs, double tail = 1e-12);

// Intensity of the BS-tier users (Subset 2) that feeds the BS queues.
double bs_user_intensity(const model::ScenarioConfig& cfg);

// Mean number of tier-`t` nodes whose Rayleigh-faded power at a reference
// D2D transmitter exceeds the sensing threshold.
double ssr_count_intensity(Tier t, const model::ScenarioConfig& cfg);

// Mean number of D2D-served users attached to one D2D group.
double d2d_group_user_intensity(const model::ScenarioConfig& cfg);

struct Point {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point&) const = default;
};

// Square [0, side)^2 with periodic boundary.
struct Window {
  double side = 0.0;

  double area() const { return side * side; }
  double distance2(Point a, Point b) const;
  double distance(Point a, Point b) const;
  Point wrap(Point p) const;
};

struct PointPattern {
  std::vector<Point> points;
  double intensity = 0.0;
  Window window;
  std::uint64_t seed = 0;  // 0 when drawn from a caller-owned generator

  std::size_t size() const { return points.size(); }
};

// Homogeneous PPP in the window. Consumes only `rng`.
PointPattern sample_ppp(double intensity, Window window, std::mt19937_64& rng);
PointPattern sample_ppp(double intensity, Window window, std::uint64_t seed);

// `x,y` rows with a header line.
void write_pattern_csv(std::ostream& os, const PointPattern& pattern);

}  // namespace cdcache::geometry
