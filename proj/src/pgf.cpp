#include "cdcache/pgf.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <vector>

#include "cdcache/error.hpp"

namespace cdcache::mqueue {

PgfEvaluator::PgfEvaluator(std::string name, PointFn point, GridFn grid, nlohmann::json metadata)
    : name_(std::move(name)), point_(std::move(point)), grid_(std::move(grid)), metadata_(std::move(metadata)) {
  if (!point_) throw Error(ErrorCode::domain, "PGF evaluator needs a point function");
}

void PgfEvaluator::evaluate(std::span<const cplx> z, std::span<cplx> out) const {
  if (z.size() != out.size()) throw Error(ErrorCode::domain, "PGF batch size mismatch");
  if (grid_) {
    grid_(z, out);
    return;
  }
  for (std::size_t i = 0; i < z.size(); ++i) out[i] = point_(z[i]);
}

namespace {

// FFTW's planner is not re-entrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

bool is_power_of_two(std::size_t w) { return w != 0 && (w & (w - 1)) == 0; }

cplx unit_point(std::size_t w, std::size_t W) {
  return std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(w) / static_cast<double>(W));
}

// Samples at w = 0..W/2; the rest follow by conjugate symmetry.
void sample_half(const PgfEvaluator& pgf, std::size_t W, std::vector<cplx>& half) {
  std::vector<cplx> z(W / 2 + 1);
  for (std::size_t w = 0; w < z.size(); ++w) z[w] = unit_point(w, W);
  half.assign(z.size(), {});
  pgf.evaluate(z, half);
}

std::vector<double> raw_inverse(const std::vector<cplx>& half, std::size_t W, const std::string& name) {
  for (const cplx& g : half) {
    if (!std::isfinite(g.real()) || !std::isfinite(g.imag())) {
      throw Error(ErrorCode::numerical, "PGF '" + name + "' is not finite on the unit circle");
    }
  }
  fftw_complex* in = fftw_alloc_complex(half.size());
  double* out = fftw_alloc_real(W);
  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft_c2r_1d(static_cast<int>(W), in, out, FFTW_ESTIMATE);
  }
  // c2r applies exp(+i...); conjugating the input gives the exp(-i...) sum.
  for (std::size_t w = 0; w < half.size(); ++w) {
    in[w][0] = half[w].real();
    in[w][1] = -half[w].imag();
  }
  fftw_execute(plan);
  std::vector<double> p(out, out + W);
  {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(in);
  fftw_free(out);
  for (double& v : p) v /= static_cast<double>(W);
  return p;
}

DiscretePmf finalize(std::vector<double> p, const std::string& name) {
  double sum = 0.0;
  for (std::size_t n = 0; n < p.size(); ++n) {
    if (p[n] < 0.0) {
      if (p[n] < -1e-9) {
        throw Error(ErrorCode::numerical, "inversion of '" + name + "' gave mass " + std::to_string(p[n]) +
                                              " at n = " + std::to_string(n));
      }
      p[n] = 0.0;
    }
    p[n] = std::min(p[n], 1.0);
    sum += p[n];
  }
  if (!(sum > 0.0)) throw Error(ErrorCode::numerical, "inversion of '" + name + "' has no mass");
  for (double& v : p) v /= sum;
  double tail = 0.0;
  while (p.size() > 1 && tail + p.back() <= 1e-12) {
    tail += p.back();
    p.pop_back();
  }
  DiscretePmf out;
  out.mass = std::move(p);
  out.truncation_tail = tail;
  return out;
}

void check_size(std::size_t W) {
  if (W < 256 || !is_power_of_two(W)) throw Error(ErrorCode::domain, "transform size must be a power of two >= 256");
}

}  // namespace

DiscretePmf idft_invert(const PgfEvaluator& pgf, std::size_t W) {
  check_size(W);
  std::vector<cplx> half;
  sample_half(pgf, W, half);
  return finalize(raw_inverse(half, W, pgf.name()), pgf.name());
}

DiscretePmf invert_adaptive(const PgfEvaluator& pgf, const InversionOptions& options) {
  std::size_t W = options.initial_size;
  check_size(W);
  std::vector<cplx> half;
  sample_half(pgf, W, half);
  DiscretePmf prev = finalize(raw_inverse(half, W, pgf.name()), pgf.name());
  while (true) {
    const std::size_t W2 = 2 * W;
    if (W2 > options.max_size) {
      throw Error(ErrorCode::numerical, "inversion of '" + pgf.name() + "' did not settle by W = " +
                                            std::to_string(W));
    }
    // Even points of the finer grid are the previous samples.
    std::vector<cplx> odd_z;
    for (std::size_t j = 1; j < W2 / 2; j += 2) odd_z.push_back(unit_point(j, W2));
    std::vector<cplx> odd_g(odd_z.size());
    pgf.evaluate(odd_z, odd_g);
    std::vector<cplx> next(W2 / 2 + 1);
    for (std::size_t j = 0; j < next.size(); ++j) next[j] = (j % 2 == 0) ? half[j / 2] : odd_g[j / 2];
    half = std::move(next);
    W = W2;
    DiscretePmf cur = finalize(raw_inverse(half, W, pgf.name()), pgf.name());
    if (sup_distance(prev, cur) < options.tolerance) return cur;
    prev = std::move(cur);
  }
}

}  // namespace cdcache::mqueue
