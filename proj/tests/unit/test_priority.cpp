#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "cdcache/config.hpp"
#include "cdcache/error.hpp"
#include "cdcache/geometry.hpp"
#include "cdcache/mqueue.hpp"
#include "cdcache/priority.hpp"

#include "oracles.hpp"

using namespace cdcache;
using namespace cdcache::mqueue;

namespace {

std::vector<cplx> circle(int n, double radius = 1.0) {
  std::vector<cplx> z;
  for (int k = 0; k < n; ++k) z.push_back(std::polar(radius, 2.0 * std::numbers::pi * (k + 0.5) / n));
  return z;
}

bool contains(const ComplexRootSet& s, cplx z, double tol = 1e-10) {
  for (auto r : s.roots)
    if (std::abs(r - z) < tol) return true;
  return false;
}

double mean_from_pmf(const PgfEvaluator& e) { return invert_adaptive(e).mean(); }

}  // namespace

TEST_SUITE("priority roots") {
  TEST_CASE("empty classes give roots of unity") {
    const auto s = x_roots(cplx(0.3, 0.2), PriorityLoad::make(0.0, 0.0, 5));
    REQUIRE(s.size() == 5);
    for (int k = 0; k < 5; ++k) CHECK(contains(s, std::polar(1.0, 2.0 * std::numbers::pi * k / 5)));
  }

  TEST_CASE("at z = 1 the x family is the characteristic family plus 1") {
    for (auto [high, c] : {std::pair{0.5, 2}, std::pair{2.0, 4}, std::pair{7.0, 10}}) {
      const auto x = x_roots(1.0, PriorityLoad::make(high, 0.8, c));
      const auto ch = char_roots_inside(high, c);
      CHECK(contains(x, 1.0));
      for (auto r : ch.roots) CHECK(contains(x, r, 1e-9));
    }
  }

  TEST_CASE("defining identities on the unit circle") {
    const auto load = PriorityLoad::make(2.5, 1.5, 6);
    for (auto z : circle(64)) {
      const auto x = x_roots(z, load);
      REQUIRE(x.size() == 6);
      CHECK(x.max_residual <= 1e-10);
      CHECK(x.min_pairwise_distance() > 1e-8);
      for (auto r : x.roots)
        CHECK(std::abs(std::pow(r, 6) - std::exp(2.5 * (r - 1.0) + 1.5 * (z - 1.0))) <= 1e-10);
      const auto w = omega_roots(z, 2.5, 6);
      REQUIRE(w.size() == 6);
      CHECK(w.max_residual <= 1e-10);
      for (auto r : w.roots) CHECK(std::abs(std::pow(r, 6) - z * std::exp(2.5 * (r - 1.0))) <= 1e-10);
    }
  }

  TEST_CASE("omega without high traffic is the c-th root family") {
    for (cplx z : {cplx(1.0), cplx(0.4, -0.3), std::polar(1.0, 2.0)}) {
      const auto w = omega_roots(z, 0.0, 4);
      const auto k = kth_roots(z, 4);
      for (auto r : k.roots) CHECK(contains(w, r, 1e-12));
    }
  }

  TEST_CASE("instability is reported") {
    CHECK_THROWS_AS(x_roots(0.5, PriorityLoad::make(2.0, 1.0, 3)), Error);
    CHECK_THROWS_AS(PriorityQueue(2.0, 1.0, 3), Error);
    CHECK_THROWS_AS(PriorityLoad::make(-1.0, 1.0, 3), Error);
    CHECK_FALSE(PriorityLoad::make(2.0, 1.0, 3).stable());
    CHECK(PriorityLoad::make(2.0, 0.5, 3).lambda_total == 2.5);
  }
}

TEST_SUITE("priority queue") {
  TEST_CASE("no high-priority traffic: identical to the single-class queue") {
    for (int c : {1, 2, 4, 10}) {
      for (double rho : {0.2, 0.6, 0.95}) {
        PriorityQueue p(0.0, rho * c, c);
        MultiserverQueue s(rho * c, c);
        for (auto z : circle(48)) {
          CHECK(std::abs(p.queue_pgf(z) - s.queue_pgf(z)) <= 1e-8);
          CHECK(std::abs(p.delay_pgf(z) - s.delay_pgf(z)) <= 1e-8);
        }
      }
    }
  }

  TEST_CASE("normalization, boundedness and batch agreement") {
    PriorityQueue p(3.0, 4.0, 10);
    CHECK(std::abs(p.queue_pgf(1.0) - 1.0) < 1e-8);
    CHECK(std::abs(p.delay_pgf(1.0) - 1.0) < 1e-8);
    const auto z = circle(256);
    std::vector<cplx> q(z.size()), d(z.size());
    p.queue_pgf(z, q);
    p.delay_pgf(z, d);
    for (std::size_t i = 0; i < z.size(); ++i) {
      CHECK(std::abs(q[i]) <= 1.0 + 1e-6);
      CHECK(std::abs(d[i]) <= 1.0 + 1e-6);
      CHECK(std::abs(q[i] - p.queue_pgf(z[i])) < 1e-10);
      CHECK(std::abs(d[i] - p.delay_pgf(z[i])) < 1e-10);
    }
  }

  TEST_CASE("no low-priority users: empty low queue") {
    const auto cfg = model::reference_scenario();
    for (auto z : circle(16)) CHECK(std::abs(d2d_queue_pgf(z, 3, 0, cfg) - 1.0) < 1e-12);
  }

  TEST_CASE("mean queue and delay against the two-class simulation") {
    for (auto [h, l, c] : {std::tuple{0.4, 0.3, 1}, std::tuple{1.5, 1.5, 4}, std::tuple{5.0, 4.0, 10}}) {
      PriorityQueue p(h, l, c);
      const auto s = oracle::slotted_priority(h, l, c, 1000000, 23);
      CHECK(mean_from_pmf(p.queue_evaluator()) == doctest::Approx(oracle::mean(s.queue_length)).epsilon(0.03).scale(0));
      CHECK(mean_from_pmf(p.delay_evaluator()) == doctest::Approx(oracle::mean(s.delay)).epsilon(0.03).scale(0));
    }
  }

  TEST_CASE("Little's law for the low class") {
    PriorityQueue p(2.0, 3.0, 6);
    CHECK(mean_from_pmf(p.queue_evaluator()) == doctest::Approx(3.0 * mean_from_pmf(p.delay_evaluator())).epsilon(1e-6).scale(0));
  }

  TEST_CASE("low priority never waits less than a single class at equal total load") {
    for (auto [h, l, c] : {std::tuple{0.2, 0.5, 1}, std::tuple{1.0, 2.0, 4}, std::tuple{6.0, 2.0, 10}}) {
      PriorityQueue p(h, l, c);
      MultiserverQueue s(h + l, c);
      CHECK(mean_from_pmf(p.delay_evaluator()) >= mean_from_pmf(s.delay_evaluator()) - 1e-9);
    }
  }
}

TEST_SUITE("D2D mixtures") {
  TEST_CASE("reference PMFs keep the contract") {
    const auto cfg = model::reference_scenario();
    const auto q = d2d_queue_length_pmf(cfg);
    CHECK(std::abs(q.pmf.total() + q.pmf.truncation_tail - 1.0) < 1e-9);
    CHECK(q.pmf.truncation_tail <= 1e-6);
    CHECK_FALSE(q.degenerate);
    CHECK(q.conditioning.find("D2D") != std::string::npos);
    const double steady = d2d_steady_fraction(cfg);
    CHECK(steady > 0.0);
    CHECK(steady <= 1.0);
    // The fraction renormalizes over the truncated grid; the marginals drop 1e-6 tails.
    CHECK(steady == doctest::Approx(q.stable_mass).epsilon(1e-5).scale(0));
    CHECK(d2d_user_count_mean(cfg) == doctest::Approx(geometry::d2d_group_user_intensity(cfg)));
  }

  TEST_CASE("baseline has no D2D traffic") {
    auto cfg = model::reference_scenario();
    cfg.alpha = 0.0;
    const auto q = d2d_queue_length_pmf(cfg);
    const auto d = d2d_delay_pmf(cfg);
    CHECK(q.degenerate);
    CHECK(d.degenerate);
    CHECK_FALSE(q.notice.empty());
    CHECK(q.pmf.at(0) == 1.0);
    CHECK(d2d_user_count_mean(cfg) == 0.0);
  }

  TEST_CASE("conditional PGFs depend on counts through the loads") {
    const auto cfg = model::reference_scenario();
    PriorityQueue p(4 * cfg.request_rate, 7 * cfg.request_rate, cfg.num_channels);
    for (auto z : circle(8)) {
      CHECK(std::abs(d2d_queue_pgf(z, 4, 7, cfg) - p.queue_pgf(z)) < 1e-12);
      CHECK(std::abs(d2d_delay_pgf(z, 4, 7, cfg) - p.delay_pgf(z)) < 1e-12);
    }
  }
}
