#pragma once

#include <complex>
#include <vector>

namespace cdcache::mqueue {

using cplx = std::complex<double>;

enum class RootFamily {
  characteristic,  // z^c = exp(l (z - 1)), inside the unit disk, z != 1
  kth,             // v^c = z
  x_family,        // x^c = exp(lH (x - 1) + lL (z - 1))
  omega_family,    // w^c = z exp(lH (w - 1))
};

struct ComplexRootSet {
  RootFamily family = RootFamily::characteristic;
  std::vector<cplx> roots;
  int servers = 0;
  double load = 0.0;      // l for the characteristic family, lH otherwise
  double load_low = 0.0;  // lL (x family only)
  cplx point{0.0, 0.0};   // evaluation point z (kth, x and omega families)
  double max_residual = 0.0;

  std::size_t size() const { return roots.size(); }
  double min_pairwise_distance() const;
};

// The c-1 roots of z^c = exp(load (z - 1)) in the closed unit disk other
// than z = 1. Requires 0 <= load < c.
ComplexRootSet char_roots_inside(double load, int servers);

// The c distinct c-th roots of z (z != 0), in order of increasing angle
// offset k = 0..c-1.
ComplexRootSet kth_roots(cplx z, int servers);

namespace detail {

// exp(w) - 1 and (exp(w) - 1) / w without cancellation near w = 0.
cplx expm1(cplx w);
cplx exprel(cplx w);

// sum_{j<c} z^j
cplx geometric_sum(cplx z, int c);

// Root inside the unit disk of w = q * exp(a (w - 1)), |q| <= 1, 0 <= a < 1.
// `guess` seeds Newton; a fixed-point pass takes over if Newton wanders.
cplx solve_branch(cplx q, double a, cplx guess);
cplx solve_branch(cplx q, double a);

// Root of d = expm1(a d + b) near 0, i.e. the branch through 1 written as
// 1 + d. Accurate in relative terms when b is tiny.
cplx solve_unit_branch(cplx b, double a, cplx guess);

}  // namespace detail
}  // namespace cdcache::mqueue
