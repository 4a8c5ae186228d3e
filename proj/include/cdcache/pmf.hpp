#pragma once

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace cdcache {

// Probability mass over n = 0, 1, 2, ... . `truncation_tail` bounds the mass
// not represented in `mass`; mass.sum() + truncation_tail is 1 to 1e-9.
struct DiscretePmf {
  std::vector<double> mass;
  double truncation_tail = 0.0;

  std::size_t size() const { return mass.size(); }
  double at(std::size_t n) const { return n < mass.size() ? mass[n] : 0.0; }
  double total() const;
  double mean() const;
  double cdf(std::size_t n) const;
  // Smallest n with cdf(n) >= p.
  std::size_t quantile(double p) const;

  static DiscretePmf point_mass(std::size_t n);
  static DiscretePmf from_counts(std::span<const std::uint64_t> counts);
};

// 0.5 * sum |p_n - q_n| over the union of supports.
double total_variation(const DiscretePmf& p, const DiscretePmf& q);
double sup_distance(const DiscretePmf& p, const DiscretePmf& q);

// Adds `weight * src` into `dst`, growing it as needed.
void accumulate(DiscretePmf& dst, const DiscretePmf& src, double weight);

// `n,probability` rows with a header line.
void write_pmf_csv(std::ostream& os, const DiscretePmf& pmf);

nlohmann::json pmf_to_json(const DiscretePmf& pmf);

}  // namespace cdcache
