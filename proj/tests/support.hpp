#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

#include "declutter/errors.hpp"
#include "declutter/image.hpp"
#include "declutter/rng.hpp"

namespace declutter::test {

inline BinaryMask random_mask(int w, int h, double density, std::uint64_t seed) {
  Rng rng(seed);
  BinaryMask m(w, h);
  for (auto& p : m.pixels()) p = rng.uniform() < density ? 1 : 0;
  return m;
}

inline double max_abs_diff(const GrayImage& a, const GrayImage& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a.pixels()[i] - b.pixels()[i]));
  return d;
}

}  // namespace declutter::test
