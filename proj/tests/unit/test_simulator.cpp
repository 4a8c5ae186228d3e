#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "cdcache/config.hpp"
#include "cdcache/error.hpp"
#include "cdcache/geometry.hpp"
#include "cdcache/mqueue.hpp"
#include "cdcache/simulator.hpp"

using namespace cdcache;
using namespace cdcache::sim;

namespace {

bool same_report(const MetricsReport& a, const MetricsReport& b) {
  return a.bs.nodes == b.bs.nodes && a.bs.steady == b.bs.steady && a.d2d.nodes == b.d2d.nodes &&
         a.d2d.steady == b.d2d.steady && a.bs.delay.counts == b.bs.delay.counts &&
         a.bs.queue_length.counts == b.bs.queue_length.counts && a.d2d.delay.counts == b.d2d.delay.counts &&
         a.d2d.queue_length.counts == b.d2d.queue_length.counts && a.generated == b.generated &&
         a.served == b.served && a.backlog == b.backlog;
}

// Queue-length trace of one slotted M/D/c queue.
std::vector<double> queue_trace(double load, int c, int slots, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::poisson_distribution<int> arrivals(load);
  std::vector<double> trace;
  long q = 0;
  for (int t = 0; t < slots; ++t) {
    trace.push_back(static_cast<double>(q));
    q -= std::min<long>(q, c);
    q += arrivals(rng);
  }
  return trace;
}

}  // namespace

TEST_SUITE("realization") {
  TEST_CASE("no caching means no transmitters") {
    auto cfg = model::reference_scenario();
    cfg.alpha = 0.0;
    const auto net = build_realization(cfg, 5);
    CHECK(net.num_tx() == 0);
    for (auto c : net.cache_enabled) CHECK(c == 0);
    CHECK(net.num_bs() > 0);
  }

  TEST_CASE("cache-enabled share tracks alpha") {
    for (double alpha : {0.2, 0.5, 0.9}) {
      auto cfg = model::reference_scenario();
      cfg.alpha = alpha;
      std::size_t users = 0, cached = 0;
      for (std::uint64_t s = 1; s <= 100; ++s) {
        const auto net = build_realization(cfg, s);
        users += net.users.size();
        cached += net.num_tx();
      }
      CHECK(static_cast<double>(cached) / static_cast<double>(users) == doctest::Approx(alpha).epsilon(0.02).scale(0));
    }
  }

  TEST_CASE("same seed, same network") {
    const auto cfg = model::reference_scenario();
    const auto a = build_realization(cfg, 77);
    const auto b = build_realization(cfg, 77);
    const auto c = build_realization(cfg, 78);
    CHECK(a.bs.points == b.bs.points);
    CHECK(a.users.points == b.users.points);
    CHECK(a.tx_user == b.tx_user);
    CHECK(a.tx_attached == b.tx_attached);
    CHECK(a.users.points != c.users.points);
  }

  TEST_CASE("request routing") {
    const auto cfg = model::reference_scenario();
    const auto net = build_realization(cfg, 3);
    int checked_local = 0, checked_d2d = 0, checked_far = 0;
    for (std::size_t u = 0; u < net.users.size(); ++u) {
      const int user = static_cast<int>(u);
      const auto miss = classify_request(user, cfg.cache_size + 1, net);
      CHECK(miss.subset == Subset::bs);
      CHECK(miss.node == net.nearest_bs[u]);
      const auto hit = classify_request(user, 1, net);
      if (net.cache_enabled[u]) {
        CHECK(hit.subset == Subset::local);
        ++checked_local;
      } else if (net.d2d_closest[u]) {
        CHECK(hit.subset == Subset::d2d);
        CHECK(hit.node == net.nearest_tx[u]);
        ++checked_d2d;
      } else {
        CHECK(hit.subset == Subset::bs);
        ++checked_far;
      }
    }
    CHECK(checked_local > 0);
    CHECK(checked_d2d > 0);
    CHECK(checked_far > 0);
  }

  TEST_CASE("sensed counts match the mean sensing-region counts") {
    // A realization's mean count varies like 1/(BSs in the window); a 4 km
    // window and 1100 realizations keep the BS estimate within about 0.7%.
    auto cfg = model::reference_scenario();
    cfg.window_side = 4000.0;
    double bs = 0.0, d2d = 0.0, samples = 0.0;
    for (std::uint64_t s = 1; s <= 1100; ++s) {
      const auto net = build_realization(cfg, s);
      for (std::size_t t = 0; t < net.num_tx(); t += 8) {
        for (std::int64_t slot = 0; slot < 2; ++slot) {
          const auto c = sensed_counts(net, static_cast<int>(t), slot);
          bs += c.bs;
          d2d += c.d2d;
          samples += 1.0;
        }
      }
    }
    CHECK(bs / samples == doctest::Approx(geometry::ssr_count_intensity(geometry::Tier::bs, cfg)).epsilon(0.02).scale(0));
    CHECK(d2d / samples == doctest::Approx(geometry::ssr_count_intensity(geometry::Tier::d2d, cfg)).epsilon(0.02).scale(0));
  }
}

TEST_SUITE("steady classifier") {
  TEST_CASE("flat and growing traces") {
    CHECK(steady_classifier(std::vector<double>(100, 0.0)));
    std::vector<double> ramp(100);
    for (std::size_t i = 0; i < ramp.size(); ++i) ramp[i] = static_cast<double>(i);
    CHECK_FALSE(steady_classifier(ramp));
    std::vector<double> high(100, 60.0);
    CHECK_FALSE(steady_classifier(high));
    CHECK_THROWS_AS(steady_classifier(std::vector<double>(9, 0.0)), Error);
  }

  TEST_CASE("stable and overloaded queues are told apart") {
    int stable_hits = 0, overload_hits = 0;
    for (std::uint64_t s = 1; s <= 100; ++s) {
      stable_hits += steady_classifier(queue_trace(7.0, 10, 10000, s));
      overload_hits += !steady_classifier(queue_trace(10.5, 10, 10000, s));
    }
    CHECK(stable_hits >= 95);
    CHECK(overload_hits >= 95);
  }
}

TEST_SUITE("slot engine") {
  TEST_CASE("subset frequencies follow the analytic split") {
    const auto cfg = model::reference_scenario();
    std::uint64_t counts[3] = {0, 0, 0};
    for (std::uint64_t s = 1; s <= 20; ++s) {
      auto net = build_realization(cfg, s);
      const auto r = run_slots(net, 100);
      for (int i = 0; i < 3; ++i) counts[i] += r.subset_requests[i];
    }
    const double total = static_cast<double>(counts[0] + counts[1] + counts[2]);
    const auto split = geometry::subset_split(cfg);
    CHECK(std::abs(counts[0] / total - split.p_local) <= 0.01);
    CHECK(std::abs(counts[1] / total - split.p_d2d) <= 0.01);
    CHECK(std::abs(counts[2] / total - split.p_bs) <= 0.01);
  }

  TEST_CASE("no users: every BS is steady and idle") {
    auto cfg = model::reference_scenario();
    cfg.lambda_user = 0.0;
    auto net = build_realization(cfg, 9);
    const auto r = run_slots(net, 200);
    CHECK(r.bs.nodes == net.num_bs());
    CHECK(r.bs.fraction == 1.0);
    CHECK(r.generated == 0);
    CHECK(r.bs.queue_length.pmf().at(0) == 1.0);
  }

  TEST_CASE("abundant channels: every request waits exactly one slot") {
    auto cfg = model::reference_scenario();
    cfg.num_channels = 10000;
    auto net = build_realization(cfg, 4);
    const auto r = run_slots(net, 300);
    REQUIRE(r.bs.delay.total() > 0);
    REQUIRE(r.d2d.delay.total() > 0);
    CHECK(r.bs.delay.pmf().at(1) == 1.0);
    CHECK(r.d2d.delay.pmf().at(1) == 1.0);
  }

  TEST_CASE("audit finds no conservation, FIFO or priority violations") {
    auto net = build_realization(model::reference_scenario(), 12);
    const auto r = run_slots(net, 2000, RunOptions{true});
    CHECK(r.audited);
    CHECK(r.audit.conservation_violations == 0);
    CHECK(r.audit.fifo_violations == 0);
    CHECK(r.audit.priority_violations == 0);
    CHECK(r.audit.d2d_transmissions > 0);
    CHECK(r.generated == r.served + r.backlog);
  }

  TEST_CASE("runs that are too short are refused") {
    auto net = build_realization(model::reference_scenario(), 1);
    CHECK_THROWS_AS(run_slots(net, 9), Error);
  }
}

TEST_SUITE("replications") {
  TEST_CASE("aggregation pools counts") {
    auto net = build_realization(model::reference_scenario(), 2);
    const auto one = run_slots(net, 200);
    const std::vector<MetricsReport> single{one};
    const auto a = aggregate_replications(single);
    CHECK(a.bs.fraction == one.bs.fraction);
    CHECK(a.bs.delay.counts == one.bs.delay.counts);
    const std::vector<MetricsReport> pair{one, one};
    const auto b = aggregate_replications(pair);
    CHECK(b.bs.nodes == 2 * one.bs.nodes);
    CHECK(b.bs.fraction == doctest::Approx(one.bs.fraction));
    CHECK(b.bs.delay.total() == 2 * one.bs.delay.total());
    CHECK(b.replications == 2);
    CHECK_THROWS_AS(aggregate_replications(std::span<const MetricsReport>{}), Error);
  }

  TEST_CASE("results do not depend on the worker count") {
    const auto cfg = model::reference_scenario();
    SimulationOptions o;
    o.slots = 300;
    o.replications = 4;
    o.workers = 1;
    const auto serial = simulate(cfg, o);
    o.workers = 3;
    const auto threaded = simulate(cfg, o);
    const auto again = simulate(cfg, o);
    CHECK(same_report(serial.proposed, threaded.proposed));
    CHECK(same_report(serial.baseline, threaded.baseline));
    CHECK(same_report(threaded.proposed, again.proposed));
  }

  TEST_CASE("without caching the proposed run is the baseline") {
    auto cfg = model::reference_scenario();
    cfg.alpha = 0.0;
    SimulationOptions o;
    o.slots = 300;
    o.replications = 3;
    const auto r = simulate(cfg, o);
    CHECK(same_report(r.proposed, r.baseline));
    CHECK(r.proposed.d2d.nodes == 0);
    CHECK(r.proposed.subset_requests[0] == 0);
    CHECK(r.proposed.subset_requests[1] == 0);
  }

  TEST_CASE("thirty replications pin the steady fraction") {
    auto cfg = model::reference_scenario();
    cfg.window_side = 4000.0;
    SimulationOptions o;
    o.slots = 1000;
    o.replications = 30;
    o.baseline = false;
    const auto r = simulate(cfg, o);
    CHECK(r.proposed.replications == 30);
    CHECK(r.proposed.bs.half_width <= 0.02);
    CHECK(r.proposed.bs.half_width > 0.0);
  }
}
