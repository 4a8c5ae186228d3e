#pragma once

// Reference computations used to check the library. Everything here is
// written from first principles with std:: random engines and brute force,
// and shares no code with the library under test.

#include <cstdint>
#include <functional>
#include <vector>

namespace oracle {

// sum_{j=1..n} j^{-nu}
double harmonic(int n, double nu);

// Root of a continuous f with a sign change on [lo, hi].
double bisect(const std::function<double(double)>& f, double lo, double hi, int iterations = 200);

// Simpson rule on [a, b] with n (even) panels.
double simpson(const std::function<double(double)>& f, double a, double b, int n);

double total_variation(const std::vector<double>& p, const std::vector<double>& q);
double sup_gap(const std::vector<double>& p, const std::vector<double>& q);
double mean(const std::vector<double>& p);
std::vector<double> normalize(const std::vector<std::uint64_t>& counts);
std::vector<double> poisson_pmf(double mean, int n_max);

struct QueueSample {
  std::vector<double> queue_length;  // at slot starts, after warmup
  std::vector<double> delay;         // service slot minus arrival slot
};

// c servers, Poisson(load) batches per slot, FIFO, unit service. Arrivals
// of slot t join after slot t's service and leave at slot t+1 at the
// earliest.
QueueSample slotted_multiserver(double load, int servers, std::int64_t slots, std::uint64_t seed,
                                std::int64_t warmup = 10000);

// Two Poisson classes sharing c servers; the high class is always served
// first. Statistics are for the low class.
QueueSample slotted_priority(double high, double low, int servers, std::int64_t slots, std::uint64_t seed,
                             std::int64_t warmup = 10000);

// Fraction of users whose strongest long-term link (P r^-beta) comes from a
// D2D transmitter rather than a BS. PPPs on a torus, `users` per realization.
double association_d2d_fraction(double lambda_d2d, double lambda_bs, double p_d2d, double p_bs, double beta,
                                double side, int realizations, int users, std::uint64_t seed);

// Histogram of the user count of every Voronoi cell, BSs at unit intensity
// on a torus of side `side`, users at intensity `ratio`.
std::vector<std::uint64_t> voronoi_cell_counts(double ratio, double side, int realizations, std::uint64_t seed);

// Counts of nodes with P h r^-beta > gamma, h ~ Exp(mu), around
// `probes_per_realization` probe points whose sensing disks do not overlap.
std::vector<std::uint64_t> sensed_counts(double intensity, double power, double gamma, double mu, double beta,
                                         int realizations, int probes_per_realization, std::uint64_t seed);

// Max of `bs` i.i.d. draws from `cell_pmf`, with bs ~ Poisson(mean_bs); 0
// when no BS is drawn. Returns the empirical CDF.
std::vector<double> heaviest_load_cdf(double mean_bs, const std::vector<double>& cell_pmf, int trials,
                                      std::uint64_t seed);

}  // namespace oracle
