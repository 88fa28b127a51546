#pragma once

#include <vector>

#include "declutter/image.hpp"
#include "declutter/kernels.hpp"

namespace declutter::clutter {

/// Single-scale feature-congestion parameters. Pixel units for all sigmas.
struct FcmParams {
  double dog_sigma_inner = 2.0;
  double dog_sigma_outer = 3.2;
  double orientation_sigma = 2.0;
  double window_sigma = 5.0;
  double color_weight = 0.3;
  double orientation_weight = 1.0;
  // Typical full-swing responses; each feature's local std-dev is divided by
  // its constant before weighting.
  double contrast_norm = 25.0;
  double color_norm = 60.0;
  double orientation_norm = 25.0;
  double kernel_truncate = 3.0;
};

struct ClutterMap {
  GrayImage values;
};

Lab rgb_to_lab(const Rgb& rgb);
Image<Lab> rgb_to_lab(const RgbImage& image);

/// Pixel-wise clutter: weighted local standard deviation of luminance
/// contrast (DoG), chrominance (a, b) and four oriented edge responses.
/// Throws ImageTooSmall below 16x16.
ClutterMap compute_clutter_map(const RgbImage& image, const FcmParams& params = {},
                               kernels::Exec exec = kernels::Exec::parallel);

double global_score(const ClutterMap& map);

/// Mean over the disc of diameter `opening_px` around `center`, clipped to
/// the image. Throws OutOfBounds when the centre is outside.
double local_score(const ClutterMap& map, Pixel center, double opening_px);

}  // namespace declutter::clutter
