#pragma once

// Data-parallel image kernels. Every kernel has an OpenMP implementation and
// a plain serial reference with identical results; the serial versions are
// kept for the equivalence tests and the benchmark.

#include <cstdint>
#include <span>
#include <vector>

#include "declutter/image.hpp"

namespace declutter::kernels {

enum class Exec { serial, parallel };

/// Mirror index into [0, n) without repeating the edge sample (…2 1 | 0 1 2…).
int reflect_index(int i, int n);

/// Sampled Gaussian, radius ceil(truncate*sigma), normalised to unit sum.
std::vector<double> gaussian_kernel(double sigma, double truncate = 3.0);

/// Sampled first derivative of a Gaussian (odd kernel, index 0 is -radius),
/// scaled so that the response to the ramp f(x) = x is exactly 1.
std::vector<double> gaussian_derivative_kernel(double sigma, double truncate = 3.0);

/// Correlates rows with kx then columns with ky; kernels are centred
/// (odd length) and borders use reflect_index.
GrayImage convolve_separable(const GrayImage& src, std::span<const double> kx,
                             std::span<const double> ky, Exec exec = Exec::parallel);

/// Exact squared Euclidean distance to the nearest obstacle (nonzero) pixel.
/// Pixels with no reachable obstacle get +infinity.
GrayImage squared_distance(const BinaryMask& obstacles, Exec exec = Exec::parallel);

/// Index of the nearest centroid for each point (ties -> lower index).
std::vector<int> nearest_centroid(std::span<const double> xs, std::span<const double> ys,
                                  std::span<const double> cx, std::span<const double> cy,
                                  Exec exec = Exec::parallel);

}  // namespace declutter::kernels
