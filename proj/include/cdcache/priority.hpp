#pragma once

#include <vector>

#include "cdcache/config.hpp"
#include "cdcache/mqueue.hpp"
#include "cdcache/pgf.hpp"
#include "cdcache/pmf.hpp"
#include "cdcache/roots.hpp"

namespace cdcache::mqueue {

struct PriorityLoad {
  double lambda_high = 0.0;
  double lambda_low = 0.0;
  double lambda_total = 0.0;
  int servers = 0;

  static PriorityLoad make(double high, double low, int servers);
  bool stable() const { return lambda_total < servers; }
};

// P(N_K <= k): N_K is the largest BS user count among the BSs sensed by a
// D2D transmitter, zero when none is sensed.
double heavy_load_cdf(int k, const model::ScenarioConfig& cfg);

struct HeavyLoadDist {
  DiscretePmf pmf;         // P(N_K = k), truncated once the CDF reaches 1 - 1e-6
  double outer_tail = 0.0; // Poisson mass dropped from the sum over BS counts
};

HeavyLoadDist heavy_load_dist(const model::ScenarioConfig& cfg);

// x^c = exp(lH (x - 1) + lL (z - 1)); branch 0 passes through x = 1 at z = 1.
ComplexRootSet x_roots(cplx z, const PriorityLoad& load);

// w^c = z exp(lH (w - 1)); branch k continues the k-th c-th root of z.
ComplexRootSet omega_roots(cplx z, double lambda_high, int servers);

// Low-priority class of a slotted queue where the high class (Poisson lH)
// is always served first and the low class (Poisson lL) takes what remains.
class PriorityQueue {
 public:
  PriorityQueue(double lambda_high, double lambda_low, int servers);

  const PriorityLoad& load() const { return load_; }

  cplx queue_pgf(cplx z) const;
  cplx delay_pgf(cplx z) const;

  // Batch evaluation along a path, warm-starting the roots point to point.
  void queue_pgf(std::span<const cplx> z, std::span<cplx> out) const;
  void delay_pgf(std::span<const cplx> z, std::span<cplx> out) const;

  PgfEvaluator queue_evaluator() const;
  PgfEvaluator delay_evaluator() const;

 private:
  cplx queue_at(cplx z, std::vector<cplx>& guess) const;
  cplx delay_at(cplx z, std::vector<cplx>& guess) const;
  cplx q_total(cplx y) const;
  cplx alpha_product(cplx y) const;
  std::vector<cplx> initial_x_guess() const;
  std::vector<cplx> initial_omega_guess() const;

  PriorityLoad load_;
  ComplexRootSet alpha_;
};

// Conditional on n_k high-priority users and n_u low-priority users.
cplx d2d_queue_pgf(cplx z, int n_k, int n_u, const model::ScenarioConfig& cfg);
cplx d2d_delay_pgf(cplx z, int n_k, int n_u, const model::ScenarioConfig& cfg);

// Mean number of users attached to one D2D group.
double d2d_user_count_mean(const model::ScenarioConfig& cfg);

MixturePmf d2d_queue_length_pmf(const model::ScenarioConfig& cfg, const MixtureOptions& options = {});
MixturePmf d2d_delay_pmf(const model::ScenarioConfig& cfg, const MixtureOptions& options = {});

// Stable share of D2D groups over (N_K, N_gu); 0 when D2D carries no traffic.
double d2d_steady_fraction(const model::ScenarioConfig& cfg);

}  // namespace cdcache::mqueue
