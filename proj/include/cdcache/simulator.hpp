#pragma once

#include <cstdint>
#include <deque>
#include <span>
#include <vector>

#include <json.hpp>

#include "cdcache/config.hpp"
#include "cdcache/geometry.hpp"
#include "cdcache/pmf.hpp"

namespace cdcache::sim {

// Counter-based uniforms: every random quantity in a run is a hash of the
// seed and the indices that name it, so changing one parameter leaves all
// other draws untouched.
std::uint64_t splitmix64(std::uint64_t x);
double uniform(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0,
               std::uint64_t d = 0);

// Seed of replication r (0-based) under a master seed.
std::uint64_t replication_seed(std::uint64_t master, int r);

enum class Subset : int { local = 0, d2d = 1, bs = 2 };

struct QueueEntry {
  std::int64_t arrival_slot = 0;
  std::int32_t user = 0;
  std::int32_t content = 0;  // popularity rank, 1-based
};

struct SenseLink {
  int node = 0;
  double probability = 0.0;  // P(faded received power > threshold)
  bool group_member = false; // long-term power above the threshold
};

struct NetworkRealization {
  model::ScenarioConfig cfg;
  std::uint64_t seed = 0;
  geometry::PointPattern bs;
  geometry::PointPattern users;
  std::vector<std::uint8_t> cache_enabled;  // per user
  std::vector<int> tx_user;                 // D2D TX index -> user id
  std::vector<int> tx_of_user;              // user id -> D2D TX index or -1
  std::vector<int> nearest_bs;              // per user
  std::vector<int> nearest_tx;              // per user, -1 when none
  std::vector<std::uint8_t> d2d_closest;    // nearest D2D TX beats nearest BS on average power
  std::vector<int> tx_attached;             // non-cache users whose closest node is this TX
  std::vector<std::vector<SenseLink>> tx_bs_links;  // BSs a TX may sense
  std::vector<std::vector<SenseLink>> tx_tx_links;  // D2D TXs a TX may sense
  int bs_resamples = 0;

  std::vector<std::deque<QueueEntry>> bs_queue;
  std::vector<std::deque<QueueEntry>> tx_queue;
  std::int64_t slot = 0;

  std::size_t num_bs() const { return bs.size(); }
  std::size_t num_tx() const { return tx_user.size(); }
  bool tx_active(std::size_t t) const { return tx_attached[t] > 0; }
};

// Deterministic in (cfg, seed). An empty BS pattern is redrawn with a
// warning.
NetworkRealization build_realization(const model::ScenarioConfig& cfg, std::uint64_t seed);

struct Route {
  Subset subset = Subset::bs;
  int node = -1;  // BS index, D2D TX index, or -1 for local service
};

Route classify_request(int user, int content, const NetworkRealization& net);

// Nodes whose faded power at D2D TX `tx` exceeds the threshold in `slot`.
struct SensedCounts {
  int bs = 0;
  int d2d = 0;
};
SensedCounts sensed_counts(const NetworkRealization& net, int tx, std::int64_t slot);

// Online least-squares slope of queue length against slot index.
class TraceStats {
 public:
  void push(double t, double q);
  double slope() const;
  double last() const { return last_; }
  std::uint64_t count() const { return n_; }

 private:
  std::uint64_t n_ = 0;
  double t0_ = 0.0;
  double st_ = 0.0, stt_ = 0.0, sq_ = 0.0, stq_ = 0.0;
  double last_ = 0.0;
};

inline constexpr double kWarmupFraction = 0.2;
inline constexpr double kSlopeLimit = 0.01;
inline constexpr double kFinalLengthLimit = 50.0;

bool is_steady(const TraceStats& post_warmup);

// Whole-trace form: the first 20% is warmup; needs at least 10 samples.
bool steady_classifier(std::span<const double> queue_trace);

struct Histogram {
  std::vector<std::uint64_t> counts;

  void add(std::size_t n, std::uint64_t k = 1);
  void merge(const Histogram& other);
  std::uint64_t total() const;
  DiscretePmf pmf() const;
};

struct ClassMetrics {
  std::uint64_t nodes = 0;
  std::uint64_t steady = 0;
  double fraction = 0.0;
  double half_width = 0.0;
  Histogram delay;         // steady nodes only
  Histogram queue_length;  // steady nodes only, post-warmup slot starts

  void finish();
};

struct AuditCounters {
  std::uint64_t conservation_violations = 0;
  std::uint64_t fifo_violations = 0;
  std::uint64_t priority_violations = 0;
  std::uint64_t d2d_transmissions = 0;
};

struct MetricsReport {
  ClassMetrics bs;
  ClassMetrics d2d;
  std::uint64_t subset_requests[3] = {0, 0, 0};
  std::uint64_t generated = 0;   // requests routed to a queue
  std::uint64_t served = 0;
  std::uint64_t backlog = 0;     // still queued at the end
  std::int64_t slots = 0;
  std::int64_t warmup = 0;
  int replications = 0;
  bool audited = false;
  AuditCounters audit;
};

struct RunOptions {
  bool audit = false;
};

// Advances the realization by num_slots slots. Queue lengths are sampled at
// the start of each slot; each slot serves BSs, then D2D TXs, then enqueues
// the slot's arrivals.
MetricsReport run_slots(NetworkRealization& net, std::int64_t num_slots, const RunOptions& options = {});

// Pools counts; fractions become node-weighted averages with 95% normal
// half-widths.
MetricsReport aggregate_replications(std::span<const MetricsReport> reports);

struct SimulationResult {
  MetricsReport proposed;
  MetricsReport baseline;  // same seeds with alpha = 0
};

struct SimulationOptions {
  std::int64_t slots = 10000;
  int replications = 30;
  int workers = 0;  // 0: hardware concurrency
  bool baseline = true;
  bool audit = false;
};

SimulationResult simulate(const model::ScenarioConfig& cfg, const SimulationOptions& options);

nlohmann::json report_to_json(const MetricsReport& r);

}  // namespace cdcache::sim
