#include "cdcache/roots.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "cdcache/error.hpp"

namespace cdcache::mqueue {

double ComplexRootSet::min_pairwise_distance() const {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < roots.size(); ++i) {
    for (std::size_t j = i + 1; j < roots.size(); ++j) best = std::min(best, std::abs(roots[i] - roots[j]));
  }
  return best;
}

namespace detail {

cplx expm1(cplx w) {
  if (std::abs(w) < 1e-2) {
    cplx term = w;
    cplx sum = w;
    for (int k = 2; k <= 9; ++k) {
      term *= w / static_cast<double>(k);
      sum += term;
    }
    return sum;
  }
  return std::exp(w) - 1.0;
}

cplx exprel(cplx w) {
  if (std::abs(w) < 1e-2) {
    cplx term{1.0, 0.0};
    cplx sum{1.0, 0.0};
    for (int k = 2; k <= 10; ++k) {
      term *= w / static_cast<double>(k);
      sum += term;
    }
    return sum;
  }
  return (std::exp(w) - 1.0) / w;
}

cplx geometric_sum(cplx z, int c) {
  cplx sum{0.0, 0.0};
  cplx p{1.0, 0.0};
  for (int j = 0; j < c; ++j) {
    sum += p;
    p *= z;
  }
  return sum;
}

namespace {

bool finite(cplx w) { return std::isfinite(w.real()) && std::isfinite(w.imag()); }

cplx fixed_point_branch(cplx q, double a, cplx w) {
  for (int it = 0; it < 200000; ++it) {
    const cplx next = q * std::exp(a * (w - 1.0));
    const double step = std::abs(next - w);
    w = next;
    if (step <= 1e-15 * std::max(1.0, std::abs(w))) break;
  }
  return w;
}

bool newton_branch(cplx q, double a, cplx& w) {
  for (int it = 0; it < 60; ++it) {
    const cplx e = q * std::exp(a * (w - 1.0));
    const cplx step = (w - e) / (1.0 - a * e);
    w -= step;
    if (!finite(w)) return false;
    if (std::abs(step) <= 1e-10 * std::max(1.0, std::abs(w))) return true;
  }
  return false;
}

}  // namespace

cplx solve_branch(cplx q, double a, cplx guess) {
  if (a == 0.0) return q;
  cplx w = guess;
  if (newton_branch(q, a, w) && std::abs(w) <= 1.0 + 1e-9) return w;
  w = fixed_point_branch(q, a, q);
  newton_branch(q, a, w);
  return w;
}

cplx solve_branch(cplx q, double a) {
  // A few contraction steps land inside Newton's basin.
  cplx w = q;
  for (int i = 0; i < 3; ++i) w = q * std::exp(a * (w - 1.0));
  return solve_branch(q, a, w);
}

cplx solve_unit_branch(cplx b, double a, cplx guess) {
  if (a == 0.0) return expm1(b);
  auto newton = [&](cplx& d) {
    for (int it = 0; it < 60; ++it) {
      const cplx arg = a * d + b;
      const cplx step = (d - expm1(arg)) / (1.0 - a * std::exp(arg));
      d -= step;
      if (!finite(d)) return false;
      if (std::abs(step) <= 1e-10 * std::abs(d) || std::abs(step) < 1e-300) return true;
    }
    return false;
  };
  cplx d = guess;
  if (newton(d) && std::abs(1.0 + d) <= 1.0 + 1e-9) return d;
  d = expm1(b);
  for (int it = 0; it < 200000; ++it) {
    const cplx next = expm1(a * d + b);
    const double step = std::abs(next - d);
    d = next;
    if (step <= 1e-15 * std::abs(d) || step < 1e-300) break;
  }
  newton(d);
  return d;
}

}  // namespace detail

ComplexRootSet char_roots_inside(double load, int servers) {
  if (servers < 1) throw Error(ErrorCode::domain, "server count must be >= 1");
  if (!(load >= 0.0)) throw Error(ErrorCode::domain, "load must be non-negative");
  if (load >= servers) {
    throw Error(ErrorCode::stability, "load " + std::to_string(load) + " is not below " +
                                          std::to_string(servers) + " servers");
  }
  ComplexRootSet set;
  set.family = RootFamily::characteristic;
  set.servers = servers;
  set.load = load;
  const double a = load / servers;
  for (int k = 1; k < servers; ++k) {
    const cplx unit = std::polar(1.0, 2.0 * std::numbers::pi * k / servers);
    cplx z = unit * std::max(a, 0.5);
    for (int it = 0; it < 10000; ++it) {
      const cplx next = unit * std::exp(a * (z - 1.0));
      const double step = std::abs(next - z);
      z = next;
      if (step < 1e-12) break;
    }
    // Damped Newton polish on the branch equation.
    for (int it = 0; it < 50; ++it) {
      const cplx e = unit * std::exp(a * (z - 1.0));
      const cplx f = z - e;
      if (std::abs(f) < 1e-16) break;
      cplx step = f / (1.0 - a * e);
      cplx trial = z - step;
      for (int h = 0; h < 30 && std::abs(trial - unit * std::exp(a * (trial - 1.0))) > std::abs(f); ++h) {
        step *= 0.5;
        trial = z - step;
      }
      z = trial;
    }
    set.roots.push_back(z);
  }
  for (const cplx& z : set.roots) {
    set.max_residual = std::max(set.max_residual, std::abs(std::pow(z, servers) - std::exp(load * (z - 1.0))));
  }
  if (set.max_residual > 1e-10) {
    throw Error(ErrorCode::numerical, "characteristic roots did not converge (residual " +
                                          std::to_string(set.max_residual) + ")");
  }
  if (servers > 2 && set.min_pairwise_distance() <= 1e-8) {
    throw Error(ErrorCode::numerical, "characteristic roots are not distinct");
  }
  return set;
}

ComplexRootSet kth_roots(cplx z, int servers) {
  if (servers < 1) throw Error(ErrorCode::domain, "root order must be >= 1");
  if (z == cplx{0.0, 0.0}) throw Error(ErrorCode::degenerate, "the c-th roots of 0 are not distinct");
  ComplexRootSet set;
  set.family = RootFamily::kth;
  set.servers = servers;
  set.point = z;
  const double r = std::pow(std::abs(z), 1.0 / servers);
  const double theta = std::arg(z);
  for (int k = 0; k < servers; ++k) {
    set.roots.push_back(std::polar(r, (theta + 2.0 * std::numbers::pi * k) / servers));
  }
  for (const cplx& v : set.roots) {
    set.max_residual = std::max(set.max_residual, std::abs(std::pow(v, servers) - z));
  }
  return set;
}

}  // namespace cdcache::mqueue
