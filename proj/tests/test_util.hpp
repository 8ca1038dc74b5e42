#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

#include "doctest.h"
#include "nnl/optim.hpp"
#include "nnl/rng.hpp"
#include "nnl/tensor.hpp"

namespace nnl::test {

inline Tensor random_tensor(Shape shape, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  Rng rng(seed);
  Tensor t(std::move(shape));
  for (auto& v : t.values()) v = lo + (hi - lo) * rng.uniform();
  return t;
}

inline double max_abs_diff(const Tensor& a, const Tensor& b) {
  REQUIRE(a.shape() == b.shape());
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

// Entries that disagree both relatively (1e-6) and beyond the round-off floor
// of a central difference, about eps |L| / h. Entries far below 1e-4 would
// otherwise compare that round-off rather than the gradient.
inline std::size_t fd_disagreements(const GradCheckReport& r, double loss_value, double h = 1e-6) {
  const double floor = 10.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(loss_value)) / h;
  std::size_t bad = 0;
  for (const auto& e : r.entries)
    if (e.rel_error >= 1e-6 && std::abs(e.analytic - e.numeric) >= floor) ++bad;
  return bad;
}

#define CHECK_TENSOR_NEAR(a, b, tol) CHECK(::nnl::test::max_abs_diff((a), (b)) <= (tol))

}  // namespace nnl::test
