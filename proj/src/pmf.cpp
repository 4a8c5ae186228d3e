#include "cdcache/pmf.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace cdcache {

double DiscretePmf::total() const { return std::accumulate(mass.begin(), mass.end(), 0.0); }

double DiscretePmf::mean() const {
  double m = 0.0;
  for (std::size_t n = 0; n < mass.size(); ++n) m += static_cast<double>(n) * mass[n];
  return m;
}

double DiscretePmf::cdf(std::size_t n) const {
  double c = 0.0;
  const std::size_t last = std::min(n + 1, mass.size());
  for (std::size_t i = 0; i < last; ++i) c += mass[i];
  return c;
}

std::size_t DiscretePmf::quantile(double p) const {
  double c = 0.0;
  for (std::size_t n = 0; n < mass.size(); ++n) {
    c += mass[n];
    if (c >= p) return n;
  }
  return mass.empty() ? 0 : mass.size() - 1;
}

DiscretePmf DiscretePmf::point_mass(std::size_t n) {
  DiscretePmf p;
  p.mass.assign(n + 1, 0.0);
  p.mass[n] = 1.0;
  return p;
}

DiscretePmf DiscretePmf::from_counts(std::span<const std::uint64_t> counts) {
  DiscretePmf p;
  const double total = static_cast<double>(std::accumulate(counts.begin(), counts.end(), std::uint64_t{0}));
  if (total == 0.0) return p;
  std::size_t last = counts.size();
  while (last > 0 && counts[last - 1] == 0) --last;
  p.mass.resize(last);
  for (std::size_t n = 0; n < last; ++n) p.mass[n] = static_cast<double>(counts[n]) / total;
  return p;
}

double total_variation(const DiscretePmf& p, const DiscretePmf& q) {
  const std::size_t n = std::max(p.size(), q.size());
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::abs(p.at(i) - q.at(i));
  return 0.5 * s;
}

double sup_distance(const DiscretePmf& p, const DiscretePmf& q) {
  const std::size_t n = std::max(p.size(), q.size());
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s = std::max(s, std::abs(p.at(i) - q.at(i)));
  return s;
}

void accumulate(DiscretePmf& dst, const DiscretePmf& src, double weight) {
  if (dst.mass.size() < src.mass.size()) dst.mass.resize(src.mass.size(), 0.0);
  for (std::size_t i = 0; i < src.mass.size(); ++i) dst.mass[i] += weight * src.mass[i];
  dst.truncation_tail += weight * src.truncation_tail;
}

void write_pmf_csv(std::ostream& os, const DiscretePmf& pmf) {
  const auto old = os.precision(17);
  os << "n,probability\n";
  for (std::size_t n = 0; n < pmf.mass.size(); ++n) os << n << ',' << pmf.mass[n] << '\n';
  os.precision(old);
}

nlohmann::json pmf_to_json(const DiscretePmf& pmf) {
  return {{"mass", pmf.mass}, {"truncation_tail", pmf.truncation_tail}};
}

}  // namespace cdcache
