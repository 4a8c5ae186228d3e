#pragma once

#include <string>
#include <vector>

#include "cdcache/config.hpp"
#include "cdcache/pgf.hpp"
#include "cdcache/pmf.hpp"
#include "cdcache/roots.hpp"

namespace cdcache::mqueue {

// Slotted queue with Poisson(load) batch arrivals per slot and `servers`
// unit-time servers. Queue length is the content at the start of a slot;
// delay is counted in whole slots from the arrival slot to the service slot.
class MultiserverQueue {
 public:
  MultiserverQueue(double load, int servers);

  double load() const { return load_; }
  int servers() const { return servers_; }
  const ComplexRootSet& roots() const { return roots_; }

  cplx queue_pgf(cplx z) const;
  cplx delay_pgf(cplx z) const;

  PgfEvaluator queue_evaluator() const;
  PgfEvaluator delay_evaluator() const;

 private:
  cplx root_product(cplx z) const;

  double load_;
  int servers_;
  ComplexRootSet roots_;
};

// Conditional on n2 users at the BS; stability requires n2 * request_rate
// below num_channels.
cplx bs_queue_pgf(cplx z, int n2, const model::ScenarioConfig& cfg);
cplx bs_delay_pgf(cplx z, int n2, const model::ScenarioConfig& cfg);

// Largest user count a BS can carry and stay stable.
int bs_max_stable_users(const model::ScenarioConfig& cfg);

struct MixtureOptions {
  // Components are small PMFs, so they start on a coarse grid; the doubling
  // rule still bounds the change between successive grids.
  InversionOptions inversion{256, 1e-10, std::size_t{1} << 21};
  double min_weight = 1e-13;  // components below this weight are skipped
};

// A mixture of conditional PMFs restricted to the stable components and
// renormalized over them.
struct MixturePmf {
  DiscretePmf pmf;
  double stable_mass = 0.0;  // node-weighted mass of the stable components
  double retained = 0.0;     // stable share under `weighting`
  std::string conditioning;
  std::string weighting;  // "nodes" or "requests"
  bool degenerate = false;
  std::string notice;

  // The unnormalized mixture, as if unstable nodes were dropped silently.
  std::vector<double> raw_mass() const;
};

MixturePmf bs_queue_length_pmf(const model::ScenarioConfig& cfg, const MixtureOptions& options = {});
MixturePmf bs_delay_pmf(const model::ScenarioConfig& cfg, const MixtureOptions& options = {});

// Node-weighted probability that a typical BS is stable.
double bs_steady_fraction(const model::ScenarioConfig& cfg);

nlohmann::json mixture_to_json(const MixturePmf& m);

}  // namespace cdcache::mqueue
