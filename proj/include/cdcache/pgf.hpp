#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <string>

#include <json.hpp>

#include "cdcache/pmf.hpp"

namespace cdcache::mqueue {

using cplx = std::complex<double>;

// A probability generating function of a non-negative integer variable.
// Immutable after construction; concurrent calls are safe as long as the
// wrapped callables are pure.
class PgfEvaluator {
 public:
  using PointFn = std::function<cplx(cplx)>;
  // Evaluates a batch of points given in order of increasing angle, which
  // lets root-based PGFs warm-start from the previous point.
  using GridFn = std::function<void(std::span<const cplx>, std::span<cplx>)>;

  PgfEvaluator(std::string name, PointFn point, GridFn grid = {}, nlohmann::json metadata = {});

  cplx operator()(cplx z) const { return point_(z); }
  void evaluate(std::span<const cplx> z, std::span<cplx> out) const;

  const std::string& name() const { return name_; }
  const nlohmann::json& metadata() const { return metadata_; }

 private:
  std::string name_;
  PointFn point_;
  GridFn grid_;
  nlohmann::json metadata_;
};

// Samples the PGF on W roots of unity and inverts with one DFT. W must be
// a power of two >= 256. Tiny negative masses (> -1e-9) are clipped; the
// mass is renormalized and trailing negligible entries are trimmed into
// truncation_tail.
DiscretePmf idft_invert(const PgfEvaluator& pgf, std::size_t W);

struct InversionOptions {
  std::size_t initial_size = 4096;
  double tolerance = 1e-10;  // sup-norm change between W and 2W
  std::size_t max_size = std::size_t{1} << 21;
};

// Doubles W, reusing earlier samples, until the PMF moves by less than
// `tolerance` in sup norm.
DiscretePmf invert_adaptive(const PgfEvaluator& pgf, const InversionOptions& options = {});

}  // namespace cdcache::mqueue
