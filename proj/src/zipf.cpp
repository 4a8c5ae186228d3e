#include "cdcache/zipf.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cdcache/error.hpp"

namespace cdcache::model {

namespace {

void check_law(double nu, int n_lib) {
  if (n_lib < 1) throw Error(ErrorCode::domain, "library size must be >= 1");
  if (!(nu >= 0.0) || !std::isfinite(nu)) throw Error(ErrorCode::domain, "Zipf exponent must be >= 0");
}

double weight(int i, double nu) { return nu == 0.0 ? 1.0 : std::pow(static_cast<double>(i), -nu); }

// Neumaier-compensated sum of i^-nu for i in [first, last], smallest terms first.
double weight_sum(int first, int last, double nu) {
  double sum = 0.0, comp = 0.0;
  for (int i = last; i >= first; --i) {
    const double w = weight(i, nu);
    const double t = sum + w;
    if (std::abs(sum) >= std::abs(w)) {
      comp += (sum - t) + w;
    } else {
      comp += (w - t) + sum;
    }
    sum = t;
  }
  return sum + comp;
}

}  // namespace

double zipf_pmf(int rank, double nu, int n_lib) {
  check_law(nu, n_lib);
  if (rank < 1 || rank > n_lib) {
    throw Error(ErrorCode::domain, "content rank " + std::to_string(rank) + " outside 1.." + std::to_string(n_lib));
  }
  return weight(rank, nu) / weight_sum(1, n_lib, nu);
}

double cache_hit_prob(int m, double nu, int n_lib) {
  check_law(nu, n_lib);
  if (m < 0 || m > n_lib) {
    throw Error(ErrorCode::domain, "cache size " + std::to_string(m) + " outside 0.." + std::to_string(n_lib));
  }
  if (m == n_lib) return 1.0;
  if (m == 0) return 0.0;
  return weight_sum(1, m, nu) / weight_sum(1, n_lib, nu);
}

ZipfLaw::ZipfLaw(double nu, int n_lib) {
  check_law(nu, n_lib);
  const double norm = weight_sum(1, n_lib, nu);
  cdf_.resize(static_cast<std::size_t>(n_lib));
  double acc = 0.0;
  for (int i = 1; i <= n_lib; ++i) {
    acc += weight(i, nu);
    cdf_[static_cast<std::size_t>(i - 1)] = acc / norm;
  }
  cdf_.back() = 1.0;
}

double ZipfLaw::pmf(int rank) const { return cdf(rank) - cdf(rank - 1); }

double ZipfLaw::cdf(int rank) const {
  if (rank <= 0) return 0.0;
  if (rank >= size()) return 1.0;
  return cdf_[static_cast<std::size_t>(rank - 1)];
}

int ZipfLaw::sample(double u, int first, int last) const {
  const double lo = cdf(first - 1);
  const double hi = cdf(last);
  const double target = lo + u * (hi - lo);
  const auto begin = cdf_.begin() + (first - 1);
  const auto end = cdf_.begin() + last;
  auto it = std::upper_bound(begin, end, target);
  if (it == end) --it;
  return static_cast<int>(it - cdf_.begin()) + 1;
}

}  // namespace cdcache::model
