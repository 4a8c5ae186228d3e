#include "cdcache/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "cdcache/error.hpp"
#include "cdcache/log.hpp"
#include "cdcache/spatial_index.hpp"
#include "cdcache/zipf.hpp"

namespace cdcache::sim {

namespace {

// Stream tags keep unrelated draws apart.
enum Stream : std::uint64_t {
  kBsPattern = 1,
  kUserPattern = 2,
  kCache = 3,
  kArrival = 4,
  kContent = 5,
  kBsFade = 6,
  kTxFade = 7,
};

// Links whose sensing probability is below this are dropped.
constexpr double kSenseFloor = 1e-12;

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double uniform(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c, std::uint64_t d) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ a);
  h = splitmix64(h ^ b);
  h = splitmix64(h ^ c);
  h = splitmix64(h ^ d);
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

std::uint64_t replication_seed(std::uint64_t master, int r) {
  return splitmix64(master + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(r + 1));
}

namespace {

double sense_probability(double power, double dist2, const model::ScenarioConfig& cfg) {
  return std::exp(-cfg.fading_rate * cfg.sense_threshold * std::pow(dist2, 0.5 * cfg.pathloss) / power);
}

double sense_radius(double power, const model::ScenarioConfig& cfg) {
  return std::pow(power * -std::log(kSenseFloor) / (cfg.fading_rate * cfg.sense_threshold), 1.0 / cfg.pathloss);
}

void check_geometry(const model::ScenarioConfig& cfg) {
  if (!(cfg.lambda_bs > 0.0) || !(cfg.lambda_user >= 0.0)) throw Error(ErrorCode::domain, "intensities must be positive");
  if (!(cfg.window_side > 0.0)) throw Error(ErrorCode::domain, "window side must be positive");
  if (!(cfg.alpha >= 0.0 && cfg.alpha <= 1.0)) throw Error(ErrorCode::domain, "alpha must lie in [0, 1]");
  if (cfg.cache_size < 0 || cfg.cache_size > cfg.library_size) {
    throw Error(ErrorCode::domain, "cache size must lie in [0, library size]");
  }
  if (cfg.num_channels < 1) throw Error(ErrorCode::domain, "at least one channel is required");
  if (!(cfg.request_rate >= 0.0)) throw Error(ErrorCode::domain, "request rate must be non-negative");
}

}  // namespace

NetworkRealization build_realization(const model::ScenarioConfig& cfg, std::uint64_t seed) {
  check_geometry(cfg);
  NetworkRealization net;
  net.cfg = cfg;
  net.seed = seed;
  const geometry::Window window{cfg.window_side};
  for (std::uint64_t attempt = 0;; ++attempt) {
    net.bs = geometry::sample_ppp(cfg.lambda_bs, window, splitmix64(seed ^ splitmix64(kBsPattern + 16 * attempt)));
    if (!net.bs.points.empty()) break;
    ++net.bs_resamples;
    warn("realization drew no BS; redrawing the BS pattern");
    if (attempt > 1000) throw Error(ErrorCode::degenerate, "window too small to hold a BS");
  }
  net.users = geometry::sample_ppp(cfg.lambda_user, window, splitmix64(seed ^ splitmix64(kUserPattern)));
  const std::size_t nu = net.users.size();

  net.cache_enabled.assign(nu, 0);
  net.tx_of_user.assign(nu, -1);
  std::vector<geometry::Point> tx_points;
  for (std::size_t u = 0; u < nu; ++u) {
    if (uniform(seed, kCache, u) < cfg.alpha) {
      net.cache_enabled[u] = 1;
      net.tx_of_user[u] = static_cast<int>(net.tx_user.size());
      net.tx_user.push_back(static_cast<int>(u));
      tx_points.push_back(net.users.points[u]);
    }
  }
  const std::size_t nt = net.tx_user.size();

  const geometry::GridIndex bs_index(net.bs.points, window);
  const geometry::GridIndex tx_index(tx_points, window);
  net.nearest_bs.assign(nu, -1);
  net.nearest_tx.assign(nu, -1);
  net.d2d_closest.assign(nu, 0);
  net.tx_attached.assign(nt, 0);
  const double half_beta = 0.5 * cfg.pathloss;
  for (std::size_t u = 0; u < nu; ++u) {
    const auto p = net.users.points[u];
    net.nearest_bs[u] = bs_index.nearest(p);
    if (net.cache_enabled[u] || nt == 0) continue;
    const int t = tx_index.nearest(p);
    net.nearest_tx[u] = t;
    const double d_tx = window.distance2(p, tx_points[static_cast<std::size_t>(t)]);
    const double d_bs = window.distance2(p, net.bs.points[static_cast<std::size_t>(net.nearest_bs[u])]);
    // P1 r1^-b > P2 r2^-b
    if (cfg.power_d2d * std::pow(d_bs, half_beta) > cfg.power_bs * std::pow(d_tx, half_beta)) {
      net.d2d_closest[u] = 1;
      ++net.tx_attached[static_cast<std::size_t>(t)];
    }
  }

  net.tx_bs_links.assign(nt, {});
  net.tx_tx_links.assign(nt, {});
  const double r_bs = sense_radius(cfg.power_bs, cfg);
  const double r_tx = sense_radius(cfg.power_d2d, cfg);
  const double group_d2 = std::pow(cfg.power_d2d / cfg.sense_threshold, 2.0 / cfg.pathloss);
  std::vector<int> found;
  for (std::size_t t = 0; t < nt; ++t) {
    const auto p = tx_points[t];
    found.clear();
    bs_index.within(p, r_bs, found);
    for (int b : found) {
      const double d2 = window.distance2(p, net.bs.points[static_cast<std::size_t>(b)]);
      net.tx_bs_links[t].push_back({b, sense_probability(cfg.power_bs, d2, cfg), false});
    }
    found.clear();
    tx_index.within(p, r_tx, found, static_cast<int>(t));
    for (int o : found) {
      const double d2 = window.distance2(p, tx_points[static_cast<std::size_t>(o)]);
      net.tx_tx_links[t].push_back({o, sense_probability(cfg.power_d2d, d2, cfg), d2 < group_d2});
    }
    std::sort(net.tx_bs_links[t].begin(), net.tx_bs_links[t].end(),
              [](const SenseLink& a, const SenseLink& b) { return a.node < b.node; });
    std::sort(net.tx_tx_links[t].begin(), net.tx_tx_links[t].end(),
              [](const SenseLink& a, const SenseLink& b) { return a.node < b.node; });
  }

  net.bs_queue.assign(net.bs.size(), {});
  net.tx_queue.assign(nt, {});
  return net;
}

Route classify_request(int user, int content, const NetworkRealization& net) {
  const auto u = static_cast<std::size_t>(user);
  const bool hit = content <= net.cfg.cache_size;
  if (net.cache_enabled[u]) {
    if (hit) return {Subset::local, -1};
    return {Subset::bs, net.nearest_bs[u]};
  }
  if (hit && net.d2d_closest[u]) return {Subset::d2d, net.nearest_tx[u]};
  return {Subset::bs, net.nearest_bs[u]};
}

namespace {

bool bs_sensed(const NetworkRealization& net, std::int64_t slot, int tx, const SenseLink& l) {
  return uniform(net.seed, kBsFade, static_cast<std::uint64_t>(slot), static_cast<std::uint64_t>(tx),
                 static_cast<std::uint64_t>(l.node)) < l.probability;
}

// One fade per unordered pair and slot.
bool tx_sensed(const NetworkRealization& net, std::int64_t slot, int tx, const SenseLink& l) {
  const auto lo = static_cast<std::uint64_t>(std::min(tx, l.node));
  const auto hi = static_cast<std::uint64_t>(std::max(tx, l.node));
  return uniform(net.seed, kTxFade, static_cast<std::uint64_t>(slot), lo, hi) < l.probability;
}

}  // namespace

SensedCounts sensed_counts(const NetworkRealization& net, int tx, std::int64_t slot) {
  SensedCounts c;
  const auto t = static_cast<std::size_t>(tx);
  for (const auto& l : net.tx_bs_links.at(t)) c.bs += bs_sensed(net, slot, tx, l);
  for (const auto& l : net.tx_tx_links.at(t)) c.d2d += tx_sensed(net, slot, tx, l);
  return c;
}

void TraceStats::push(double t, double q) {
  if (n_ == 0) t0_ = t;
  const double x = t - t0_;
  ++n_;
  st_ += x;
  stt_ += x * x;
  sq_ += q;
  stq_ += x * q;
  last_ = q;
}

double TraceStats::slope() const {
  if (n_ < 2) throw Error(ErrorCode::domain, "slope needs at least two samples");
  const double n = static_cast<double>(n_);
  const double den = n * stt_ - st_ * st_;
  return den > 0.0 ? (n * stq_ - st_ * sq_) / den : 0.0;
}

bool is_steady(const TraceStats& post_warmup) {
  return !(post_warmup.slope() > kSlopeLimit || post_warmup.last() > kFinalLengthLimit);
}

bool steady_classifier(std::span<const double> queue_trace) {
  const auto n = queue_trace.size();
  const auto warmup = static_cast<std::size_t>(std::floor(kWarmupFraction * static_cast<double>(n)));
  if (n < 10 || n < 2 * warmup) throw Error(ErrorCode::domain, "queue trace too short to classify");
  TraceStats s;
  for (std::size_t i = warmup; i < n; ++i) s.push(static_cast<double>(i), queue_trace[i]);
  return is_steady(s);
}

void Histogram::add(std::size_t n, std::uint64_t k) {
  if (n >= counts.size()) counts.resize(n + 1, 0);
  counts[n] += k;
}

void Histogram::merge(const Histogram& other) {
  if (other.counts.size() > counts.size()) counts.resize(other.counts.size(), 0);
  for (std::size_t i = 0; i < other.counts.size(); ++i) counts[i] += other.counts[i];
}

std::uint64_t Histogram::total() const {
  std::uint64_t s = 0;
  for (auto c : counts) s += c;
  return s;
}

DiscretePmf Histogram::pmf() const { return DiscretePmf::from_counts(counts); }

void ClassMetrics::finish() {
  if (nodes == 0) {
    fraction = 0.0;
    half_width = 0.0;
    return;
  }
  const double n = static_cast<double>(nodes);
  fraction = static_cast<double>(steady) / n;
  half_width = 1.96 * std::sqrt(fraction * (1.0 - fraction) / n);
}

namespace {

struct NodeState {
  TraceStats trace;
  Histogram delay;
  Histogram queue;
  std::int64_t last_served_arrival = std::numeric_limits<std::int64_t>::min();
};

std::vector<double> poisson_cdf(double mean) {
  std::vector<double> cdf;
  double term = std::exp(-mean);
  double acc = 0.0;
  for (int n = 0; n < 1000; ++n) {
    if (n > 0) term *= mean / n;
    acc += term;
    cdf.push_back(acc);
    if (n > mean && 1.0 - acc < 1e-16) break;
  }
  return cdf;
}

int poisson_quantile(const std::vector<double>& cdf, double u) {
  int n = 0;
  const int last = static_cast<int>(cdf.size()) - 1;
  while (n < last && u >= cdf[static_cast<std::size_t>(n)]) ++n;
  return n;
}

}  // namespace

MetricsReport run_slots(NetworkRealization& net, std::int64_t num_slots, const RunOptions& options) {
  if (num_slots < 10) throw Error(ErrorCode::domain, "a run needs at least 10 slots");
  const auto& cfg = net.cfg;
  const int C = cfg.num_channels;
  const std::int64_t warmup = static_cast<std::int64_t>(std::floor(kWarmupFraction * static_cast<double>(num_slots)));
  const std::size_t nb = net.num_bs();
  const std::size_t nt = net.num_tx();
  const std::size_t nu = net.users.size();

  MetricsReport rep;
  rep.slots = num_slots;
  rep.warmup = warmup;
  rep.replications = 1;
  rep.audited = options.audit;

  std::vector<NodeState> bs_state(nb);
  std::vector<NodeState> tx_state(nt);
  std::vector<int> active;
  for (std::size_t t = 0; t < nt; ++t) {
    if (net.tx_active(t)) active.push_back(static_cast<int>(t));
  }

  const auto arrivals = poisson_cdf(cfg.request_rate);
  const model::ZipfLaw zipf(cfg.zipf_exponent, cfg.library_size);

  std::vector<int> bs_used(nb, 0);
  std::vector<std::int64_t> scheduled(nt, -1);
  std::vector<std::vector<int>> channels(nt);
  std::vector<std::uint64_t> mark(static_cast<std::size_t>(C), 0);
  std::uint64_t token = 0;
  std::vector<int> backlog_tx;

  std::uint64_t in_queues = 0;
  for (const auto& q : net.bs_queue) in_queues += q.size();
  for (const auto& q : net.tx_queue) in_queues += q.size();

  auto serve = [&](std::deque<QueueEntry>& q, NodeState& st, std::size_t k, std::int64_t t, bool record) {
    for (std::size_t i = 0; i < k; ++i) {
      const QueueEntry e = q.front();
      q.pop_front();
      if (options.audit) {
        if (e.arrival_slot < st.last_served_arrival) ++rep.audit.fifo_violations;
        st.last_served_arrival = e.arrival_slot;
      }
      if (record) st.delay.add(static_cast<std::size_t>(t - e.arrival_slot));
    }
    rep.served += k;
    in_queues -= k;
  };

  for (std::int64_t s = 0; s < num_slots; ++s) {
    const std::int64_t t = net.slot + s;
    const bool record = s >= warmup;

    if (record) {
      for (std::size_t b = 0; b < nb; ++b) {
        const auto q = net.bs_queue[b].size();
        bs_state[b].trace.push(static_cast<double>(s), static_cast<double>(q));
        bs_state[b].queue.add(q);
      }
      for (int a : active) {
        const auto q = net.tx_queue[static_cast<std::size_t>(a)].size();
        tx_state[static_cast<std::size_t>(a)].trace.push(static_cast<double>(s), static_cast<double>(q));
        tx_state[static_cast<std::size_t>(a)].queue.add(q);
      }
    }

    // BSs take channels 0..k-1 ahead of any D2D transmitter.
    for (std::size_t b = 0; b < nb; ++b) {
      const auto k = std::min<std::size_t>(net.bs_queue[b].size(), static_cast<std::size_t>(C));
      bs_used[b] = static_cast<int>(k);
      serve(net.bs_queue[b], bs_state[b], k, t, record);
    }

    backlog_tx.clear();
    for (int a : active) {
      if (!net.tx_queue[static_cast<std::size_t>(a)].empty()) backlog_tx.push_back(a);
    }
    std::sort(backlog_tx.begin(), backlog_tx.end(), [&](int x, int y) {
      const auto qx = net.tx_queue[static_cast<std::size_t>(x)].size();
      const auto qy = net.tx_queue[static_cast<std::size_t>(y)].size();
      return qx != qy ? qx > qy : x < y;
    });
    for (int j : backlog_tx) {
      const auto ju = static_cast<std::size_t>(j);
      int floor_ch = 0;
      for (const auto& l : net.tx_bs_links[ju]) {
        const int used = bs_used[static_cast<std::size_t>(l.node)];
        if (used > floor_ch && bs_sensed(net, t, j, l)) floor_ch = used;
      }
      ++token;
      for (const auto& l : net.tx_tx_links[ju]) {
        const auto iu = static_cast<std::size_t>(l.node);
        if (scheduled[iu] != t || channels[iu].empty()) continue;
        if (l.group_member || tx_sensed(net, t, j, l)) {
          for (int ch : channels[iu]) mark[static_cast<std::size_t>(ch)] = token;
        }
      }
      auto& mine = channels[ju];
      mine.clear();
      const auto want = net.tx_queue[ju].size();
      for (int ch = C - 1; ch >= floor_ch && mine.size() < want; --ch) {
        if (mark[static_cast<std::size_t>(ch)] != token) mine.push_back(ch);
      }
      scheduled[ju] = t;
      if (options.audit) {
        rep.audit.d2d_transmissions += mine.size();
        for (const auto& l : net.tx_bs_links[ju]) {
          if (!bs_sensed(net, t, j, l)) continue;
          for (int ch : mine) {
            if (ch < bs_used[static_cast<std::size_t>(l.node)]) ++rep.audit.priority_violations;
          }
        }
      }
      serve(net.tx_queue[ju], tx_state[ju], mine.size(), t, record);
    }

    for (std::size_t u = 0; u < nu; ++u) {
      const int n = poisson_quantile(arrivals, uniform(net.seed, kArrival, static_cast<std::uint64_t>(t), u));
      for (int r = 0; r < n; ++r) {
        const int content = zipf.sample(
            uniform(net.seed, kContent, static_cast<std::uint64_t>(t), u, static_cast<std::uint64_t>(r)), 1,
            cfg.library_size);
        const Route route = classify_request(static_cast<int>(u), content, net);
        ++rep.subset_requests[static_cast<int>(route.subset)];
        if (route.subset == Subset::local) continue;
        const QueueEntry e{t, static_cast<std::int32_t>(u), content};
        if (route.subset == Subset::bs) {
          net.bs_queue[static_cast<std::size_t>(route.node)].push_back(e);
        } else {
          net.tx_queue[static_cast<std::size_t>(route.node)].push_back(e);
        }
        ++rep.generated;
        ++in_queues;
      }
    }

    if (options.audit) {
      std::uint64_t actual = 0;
      for (const auto& q : net.bs_queue) actual += q.size();
      for (const auto& q : net.tx_queue) actual += q.size();
      if (actual != in_queues) ++rep.audit.conservation_violations;
    }
  }
  net.slot += num_slots;
  rep.backlog = in_queues;

  auto close = [](ClassMetrics& cls, NodeState& st) {
    ++cls.nodes;
    if (is_steady(st.trace)) {
      ++cls.steady;
      cls.delay.merge(st.delay);
      cls.queue_length.merge(st.queue);
    }
  };
  for (auto& st : bs_state) close(rep.bs, st);
  for (int a : active) close(rep.d2d, tx_state[static_cast<std::size_t>(a)]);
  rep.bs.finish();
  rep.d2d.finish();
  return rep;
}

MetricsReport aggregate_replications(std::span<const MetricsReport> reports) {
  if (reports.empty()) throw Error(ErrorCode::domain, "no replications to aggregate");
  MetricsReport out;
  out.slots = reports.front().slots;
  out.warmup = reports.front().warmup;
  out.audited = true;
  for (const auto& r : reports) {
    for (auto [dst, src] : {std::pair{&out.bs, &r.bs}, std::pair{&out.d2d, &r.d2d}}) {
      dst->nodes += src->nodes;
      dst->steady += src->steady;
      dst->delay.merge(src->delay);
      dst->queue_length.merge(src->queue_length);
    }
    for (int i = 0; i < 3; ++i) out.subset_requests[i] += r.subset_requests[i];
    out.generated += r.generated;
    out.served += r.served;
    out.backlog += r.backlog;
    out.replications += r.replications;
    out.audited = out.audited && r.audited;
    out.audit.conservation_violations += r.audit.conservation_violations;
    out.audit.fifo_violations += r.audit.fifo_violations;
    out.audit.priority_violations += r.audit.priority_violations;
    out.audit.d2d_transmissions += r.audit.d2d_transmissions;
  }
  out.bs.finish();
  out.d2d.finish();
  return out;
}

SimulationResult simulate(const model::ScenarioConfig& cfg, const SimulationOptions& options) {
  if (options.replications < 1) throw Error(ErrorCode::domain, "at least one replication is required");
  const int reps = options.replications;
  model::ScenarioConfig base = cfg;
  base.alpha = 0.0;
  const int tasks = options.baseline ? 2 * reps : reps;
  std::vector<MetricsReport> results(static_cast<std::size_t>(tasks));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(tasks));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < tasks; i = next++) {
      try {
        const int r = i % reps;
        const auto& c = i < reps ? cfg : base;
        auto net = build_realization(c, replication_seed(cfg.seed, r));
        results[static_cast<std::size_t>(i)] = run_slots(net, options.slots, RunOptions{options.audit});
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  };
  int workers = options.workers > 0 ? options.workers : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::clamp(workers, 1, tasks);
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  SimulationResult out;
  out.proposed = aggregate_replications(std::span(results).first(static_cast<std::size_t>(reps)));
  if (options.baseline) out.baseline = aggregate_replications(std::span(results).subspan(static_cast<std::size_t>(reps)));
  return out;
}

nlohmann::json report_to_json(const MetricsReport& r) {
  auto cls = [](const ClassMetrics& c) {
    return nlohmann::json{{"nodes", c.nodes},
                          {"steady", c.steady},
                          {"steady_fraction", c.fraction},
                          {"ci", c.half_width},
                          {"delay", pmf_to_json(c.delay.pmf())},
                          {"queue_length", pmf_to_json(c.queue_length.pmf())}};
  };
  return {{"bs", cls(r.bs)},
          {"d2d", cls(r.d2d)},
          {"subset_requests", {r.subset_requests[0], r.subset_requests[1], r.subset_requests[2]}},
          {"generated", r.generated},
          {"served", r.served},
          {"backlog", r.backlog},
          {"slots", r.slots},
          {"warmup", r.warmup},
          {"replications", r.replications}};
}

}  // namespace cdcache::sim
