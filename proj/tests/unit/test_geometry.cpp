#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "cdcache/config.hpp"
#include "cdcache/error.hpp"
#include "cdcache/geometry.hpp"
#include "cdcache/priority.hpp"
#include "cdcache/spatial_index.hpp"

#include "oracles.hpp"

using namespace cdcache;
using namespace cdcache::geometry;

namespace {

TierParams tiers(double l1, double l2, double p1, double p2) { return TierParams{{l1, l2}, {p1, p2}}; }

}  // namespace

TEST_SUITE("tier association") {
  TEST_CASE("symmetric tiers split evenly") {
    CHECK(tier_assoc_prob(Tier::d2d, Tier::bs, tiers(1.0, 1.0, 2.0, 2.0), 4.0) == doctest::Approx(0.5));
  }

  TEST_CASE("empty D2D tier wins nothing") {
    CHECK(tier_assoc_prob(Tier::d2d, Tier::bs, tiers(0.0, 1.0, 1.0, 100.0), 4.0) == 0.0);
    CHECK(tier_assoc_prob(Tier::bs, Tier::d2d, tiers(0.0, 1.0, 1.0, 100.0), 4.0) == 1.0);
  }

  TEST_CASE("reference densities give 1/1.2") {
    const double p = tier_assoc_prob(Tier::d2d, Tier::bs, tiers(50.0, 1.0, 1.0, 100.0), 4.0);
    CHECK(p == doctest::Approx(1.0 / 1.2).epsilon(1e-13).scale(0));
    const auto cfg = model::reference_scenario();
    CHECK(tier_assoc_prob(Tier::d2d, Tier::bs, TierParams::from_config(cfg), 4.0) ==
          doctest::Approx(1.0 / 1.2).epsilon(1e-12).scale(0));
  }

  TEST_CASE("reference case against nearest-power Monte Carlo") {
    const double mc = oracle::association_d2d_fraction(50.0, 1.0, 1.0, 100.0, 4.0, 8.0, 200, 100, 5);
    CHECK(std::abs(mc - 1.0 / 1.2) < 0.01);
  }

  TEST_CASE("the two tiers' probabilities sum to one") {
    for (double l1 : {0.01, 0.5, 3.0, 100.0})
      for (double l2 : {0.02, 1.0, 7.0})
        for (double p1 : {0.1, 1.0})
          for (double p2 : {1.0, 20.0, 500.0})
            for (double beta : {2.0, 3.0, 4.0, 6.0}) {
              const auto t = tiers(l1, l2, p1, p2);
              CHECK(tier_assoc_prob(Tier::d2d, Tier::bs, t, beta) + tier_assoc_prob(Tier::bs, Tier::d2d, t, beta) ==
                    doctest::Approx(1.0).epsilon(1e-14).scale(0));
            }
  }

  TEST_CASE("same tier twice is a domain error") {
    CHECK_THROWS_AS(tier_assoc_prob(Tier::bs, Tier::bs, tiers(1, 1, 1, 1), 4.0), Error);
  }
}

TEST_SUITE("subsets") {
  TEST_CASE("baseline sends everything to the BS tier") {
    auto cfg = model::reference_scenario();
    cfg.alpha = 0.0;
    const auto s = subset_split(cfg);
    CHECK(s.p_local == 0.0);
    CHECK(s.p_d2d == 0.0);
    CHECK(s.p_bs == doctest::Approx(1.0));
  }

  TEST_CASE("full caches serve everything locally") {
    auto cfg = model::reference_scenario();
    cfg.alpha = 1.0;
    cfg.cache_size = cfg.library_size;
    const auto s = subset_split(cfg);
    CHECK(s.p_local == doctest::Approx(1.0));
    CHECK(s.p_d2d == 0.0);
    CHECK(s.p_bs == doctest::Approx(0.0));
  }

  TEST_CASE("reference shares") {
    const auto s = subset_split(model::reference_scenario());
    CHECK(s.p_local == doctest::Approx(0.249).epsilon(2e-3).scale(0));
    CHECK(s.p_d2d == doctest::Approx(0.2075).epsilon(2e-3).scale(0));
    CHECK(s.p_bs == doctest::Approx(0.5435).epsilon(2e-3).scale(0));
    CHECK(std::abs(s.p_local + s.p_d2d + s.p_bs - 1.0) < 1e-12);
  }

  TEST_CASE("local share grows with alpha and with the cache") {
    auto cfg = model::reference_scenario();
    double prev = -1.0;
    for (double a = 0.0; a <= 1.0; a += 0.05) {
      cfg.alpha = a;
      const auto s = subset_split(cfg);
      CHECK(s.p_local >= prev);
      CHECK(std::abs(s.p_local + s.p_d2d + s.p_bs - 1.0) < 1e-12);
      prev = s.p_local;
    }
    cfg = model::reference_scenario();
    prev = -1.0;
    for (int m = 1; m < cfg.library_size; m += 7) {
      cfg.cache_size = m;
      const auto s = subset_split(cfg);
      CHECK(s.p_local >= prev);
      prev = s.p_local;
    }
  }
}

TEST_SUITE("cells") {
  TEST_CASE("cell-size density integrates to one with mean 1/lambda") {
    const double lambda = 2.5;
    auto f = [&](double s) { return cell_size_pdf(s, lambda); };
    const double hi = 30.0 / lambda;
    CHECK(std::abs(oracle::simpson(f, 0.0, hi, 200000) - 1.0) < 1e-8);
    const double m = oracle::simpson([&](double s) { return s * f(s); }, 0.0, hi, 200000);
    CHECK(std::abs(m - 1.0 / lambda) < 1e-6);
    CHECK_THROWS_AS(cell_size_pdf(-1.0, lambda), Error);
  }

  TEST_CASE("cell-size mode") {
    const double lambda = 1.7;
    const double mode = (kCellShape - 1.0) / (lambda * kCellShape);
    const double h = 1e-6;
    CHECK(cell_size_pdf(mode - h, lambda) < cell_size_pdf(mode, lambda));
    CHECK(cell_size_pdf(mode + h, lambda) < cell_size_pdf(mode, lambda));
    const double root = oracle::bisect(
        [&](double s) { return cell_size_pdf(s + 1e-7, lambda) - cell_size_pdf(s - 1e-7, lambda); }, 0.1 * mode,
        3.0 * mode, 80);
    CHECK(root == doctest::Approx(mode).epsilon(1e-6).scale(0));
  }

  TEST_CASE("users per BS: empty-cell probability") {
    const double l2 = 1e-6;
    for (double lu : {1e-6, 5e-5, 3e-4}) {
      const double k = kCellShape;
      CHECK(users_per_bs_pmf(0, lu, l2) == doctest::Approx(std::pow(k * l2 / (lu + k * l2), k)).epsilon(1e-13).scale(0));
    }
    CHECK(users_per_bs_pmf(0, kCellShape * l2, l2) == doctest::Approx(std::pow(2.0, -3.575)).epsilon(1e-13).scale(0));
    CHECK(std::pow(2.0, -3.575) == doctest::Approx(0.0839).epsilon(1e-3).scale(0));
  }

  TEST_CASE("users per BS: normalization and mean") {
    for (double ratio : {0.5, 3.0, 54.3}) {
      const auto p = users_per_bs_dist(ratio * 1e-6, 1e-6, 1e-13);
      CHECK(std::abs(p.total() + p.truncation_tail - 1.0) < 1e-9);
      CHECK(p.truncation_tail <= 1e-6);
      CHECK(std::abs(p.mean() - ratio) < 1e-6 * std::max(1.0, ratio));
    }
  }

  TEST_CASE("users per BS against Voronoi counting") {
    const auto counts = oracle::voronoi_cell_counts(4.0, 6.0, 1500, 11);
    std::vector<double> analytic(counts.size() + 50);
    for (std::size_t n = 0; n < analytic.size(); ++n) analytic[n] = users_per_bs_pmf(static_cast<int>(n), 4.0, 1.0);
    CHECK(oracle::total_variation(oracle::normalize(counts), analytic) <= 0.02);
  }
}

TEST_SUITE("sensing region") {
  TEST_CASE("vanishes as the threshold grows") {
    auto cfg = model::reference_scenario();
    cfg.sense_threshold = 1e30;
    CHECK(ssr_count_intensity(Tier::bs, cfg) < 1e-12);
    CHECK(ssr_count_intensity(Tier::d2d, cfg) < 1e-12);
  }

  TEST_CASE("gamma-function constant") {
    auto cfg = model::reference_scenario();
    cfg.pathloss = 4.0;
    cfg.fading_rate = 1.0;
    cfg.sense_threshold = cfg.power_bs / 1e4;
    const double expect = std::numbers::pi * cfg.lambda_bs * 100.0 * std::sqrt(std::numbers::pi) / 2.0;
    CHECK(ssr_count_intensity(Tier::bs, cfg) == doctest::Approx(expect).epsilon(1e-13).scale(0));
  }

  TEST_CASE("doubling the threshold scales by 2^(-2/beta)") {
    for (double beta : {2.5, 3.0, 4.0}) {
      auto cfg = model::reference_scenario();
      cfg.pathloss = beta;
      const double a = ssr_count_intensity(Tier::d2d, cfg);
      cfg.sense_threshold *= 2.0;
      CHECK(ssr_count_intensity(Tier::d2d, cfg) == doctest::Approx(a * std::pow(2.0, -2.0 / beta)).epsilon(1e-13).scale(0));
    }
  }

  TEST_CASE("reference calibration: one BS, five D2D transmitters") {
    const auto cfg = model::reference_scenario();
    CHECK(ssr_count_intensity(Tier::bs, cfg) == doctest::Approx(1.0).epsilon(1e-12).scale(0));
    CHECK(ssr_count_intensity(Tier::d2d, cfg) == doctest::Approx(5.0).epsilon(1e-12).scale(0));
  }

  TEST_CASE("thinned-PPP counts are Poisson") {
    const auto cfg = model::reference_scenario();
    const auto counts = oracle::sensed_counts(cfg.lambda_bs, cfg.power_bs, cfg.sense_threshold, 1.0, 4.0, 3000, 16, 3);
    const auto p = oracle::normalize(counts);
    CHECK(oracle::total_variation(p, oracle::poisson_pmf(1.0, 60)) <= 0.01);
  }
}

TEST_SUITE("heaviest load") {
  TEST_CASE("no sensed BS means zero load") {
    auto cfg = model::reference_scenario();
    cfg.sense_threshold = 1e40;
    for (int k : {0, 1, 5, 100}) CHECK(mqueue::heavy_load_cdf(k, cfg) == doctest::Approx(1.0).epsilon(1e-12).scale(0));
  }

  TEST_CASE("is a CDF") {
    const auto cfg = model::reference_scenario();
    double prev = 0.0;
    for (int k = 0; k < 800; ++k) {
      const double c = mqueue::heavy_load_cdf(k, cfg);
      CHECK(c >= prev - 1e-15);
      CHECK(c <= 1.0 + 1e-12);
      prev = c;
    }
    CHECK(prev == doctest::Approx(1.0).epsilon(1e-8).scale(0));
    CHECK(mqueue::heavy_load_cdf(0, cfg) > 0.0);  // includes the empty-region mass
    const auto d = mqueue::heavy_load_dist(cfg);
    CHECK(std::abs(d.pmf.total() + d.pmf.truncation_tail - 1.0) < 1e-9);
  }

  TEST_CASE("matches the order-statistic simulation") {
    const auto cfg = model::reference_scenario();
    const auto cell = users_per_bs_dist(bs_user_intensity(cfg), cfg.lambda_bs, 1e-12);
    const double mean_bs = ssr_count_intensity(Tier::bs, cfg);
    const auto mc = oracle::heaviest_load_cdf(mean_bs, cell.mass, 100000, 99);
    std::vector<double> analytic(mc.size());
    for (std::size_t k = 0; k < mc.size(); ++k) analytic[k] = mqueue::heavy_load_cdf(static_cast<int>(k), cfg);
    CHECK(oracle::sup_gap(analytic, mc) <= 0.01);
  }
}

TEST_SUITE("point patterns") {
  TEST_CASE("zero intensity is empty") {
    CHECK(sample_ppp(0.0, Window{100.0}, std::uint64_t{3}).size() == 0);
    CHECK_THROWS_AS(sample_ppp(-1.0, Window{100.0}, std::uint64_t{3}), Error);
  }

  TEST_CASE("count mean and determinism") {
    double total = 0.0;
    std::mt19937_64 rng(123);
    const Window w{10.0};
    for (int i = 0; i < 10000; ++i) {
      const auto p = sample_ppp(0.5, w, rng);
      total += static_cast<double>(p.size());
      for (const auto& q : p.points) {
        REQUIRE(q.x >= 0.0);
        REQUIRE(q.x < 10.0);
        REQUIRE(q.y >= 0.0);
        REQUIRE(q.y < 10.0);
      }
    }
    CHECK(std::abs(total / 10000.0 - 50.0) < 0.5);
    const auto a = sample_ppp(0.5, w, std::uint64_t{9});
    const auto b = sample_ppp(0.5, w, std::uint64_t{9});
    CHECK(a.points == b.points);
    CHECK(a.seed == 9);
  }

  TEST_CASE("torus metric and CSV") {
    const Window w{10.0};
    CHECK(w.distance({0.5, 0.5}, {9.5, 9.5}) == doctest::Approx(std::sqrt(2.0)));
    CHECK(w.wrap({-1.0, 12.0}) == Point{9.0, 2.0});
    PointPattern p;
    p.points = {{1.0, 2.0}, {3.5, 4.25}};
    std::ostringstream os;
    write_pattern_csv(os, p);
    CHECK(os.str() == "x,y\n1,2\n3.5,4.25\n");
  }

  TEST_CASE("grid index agrees with brute force") {
    const Window w{50.0};
    const auto pts = sample_ppp(0.2, w, std::uint64_t{4});
    GridIndex idx(pts.points, w);
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 50.0);
    for (int t = 0; t < 500; ++t) {
      const Point q{u(rng), u(rng)};
      int best = -1;
      double bd = 1e300;
      for (std::size_t i = 0; i < pts.size(); ++i) {
        const double d = w.distance2(q, pts.points[i]);
        if (d < bd) {
          bd = d;
          best = static_cast<int>(i);
        }
      }
      CHECK(idx.nearest(q) == best);
      std::vector<int> near;
      idx.within(q, 3.0, near);
      std::size_t brute = 0;
      for (const auto& p : pts.points) brute += w.distance(q, p) <= 3.0;
      CHECK(near.size() == brute);
    }
  }
}
