#pragma once

#include <vector>

namespace cdcache::model {

// Probability that a request asks for the content of popularity rank `rank`
// (1-based) in a library of `n_lib` items with Zipf skew `nu`.
double zipf_pmf(int rank, double nu, int n_lib);

// Probability that a request falls in the `m` most popular contents.
// m == n_lib gives exactly 1.
double cache_hit_prob(int m, double nu, int n_lib);

// Precomputed popularity law used by the simulator for sampling.
class ZipfLaw {
 public:
  ZipfLaw(double nu, int n_lib);

  int size() const { return static_cast<int>(cdf_.size()); }
  double pmf(int rank) const;
  double cdf(int rank) const;  // P(rank' <= rank); cdf(0) = 0

  // Inverse-CDF draw restricted to ranks first..last, driven by u in [0,1).
  int sample(double u, int first, int last) const;

 private:
  std::vector<double> cdf_;
};

}  // namespace cdcache::model
