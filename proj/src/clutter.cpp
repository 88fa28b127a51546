#include "declutter/clutter.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <numeric>

#include "declutter/errors.hpp"

namespace declutter::clutter {

namespace {

double srgb_to_linear(double c) { return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4); }

double lab_f(double t) {
  constexpr double eps = 216.0 / 24389.0;
  constexpr double kappa = 24389.0 / 27.0;
  return t > eps ? std::cbrt(t) : (kappa * t + 16.0) / 116.0;
}

// D65 reference white.
constexpr double kXn = 0.95047;
constexpr double kYn = 1.00000;
constexpr double kZn = 1.08883;

// Local variance of f under the window blur, clamped at zero. The feature is
// centred on its global mean first so constant regions cancel exactly.
GrayImage local_variance(GrayImage f, std::span<const double> window, kernels::Exec exec) {
  const double mean = std::accumulate(f.pixels().begin(), f.pixels().end(), 0.0) / static_cast<double>(f.size());
  GrayImage sq(f.width(), f.height());
  for (std::size_t i = 0; i < f.size(); ++i) {
    f.pixels()[i] -= mean;
    sq.pixels()[i] = f.pixels()[i] * f.pixels()[i];
  }
  const GrayImage m1 = kernels::convolve_separable(f, window, window, exec);
  GrayImage m2 = kernels::convolve_separable(sq, window, window, exec);
  for (std::size_t i = 0; i < m2.size(); ++i)
    m2.pixels()[i] = std::max(0.0, m2.pixels()[i] - m1.pixels()[i] * m1.pixels()[i]);
  return m2;
}

}  // namespace

Lab rgb_to_lab(const Rgb& rgb) {
  const double r = srgb_to_linear(rgb.r);
  const double g = srgb_to_linear(rgb.g);
  const double b = srgb_to_linear(rgb.b);
  const double x = 0.4124564 * r + 0.3575761 * g + 0.1804375 * b;
  const double y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b;
  const double z = 0.0193339 * r + 0.1191920 * g + 0.9503041 * b;
  const double fx = lab_f(x / kXn);
  const double fy = lab_f(y / kYn);
  const double fz = lab_f(z / kZn);
  return {116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

Image<Lab> rgb_to_lab(const RgbImage& image) {
  Image<Lab> out(image.width(), image.height());
  // Rendered scenes hold a handful of distinct colours.
  Rgb last_in{-1.0, -1.0, -1.0};
  Lab last_out{};
  for (std::size_t i = 0; i < image.size(); ++i) {
    const Rgb& p = image.pixels()[i];
    if (!(p == last_in)) {
      last_in = p;
      last_out = rgb_to_lab(p);
    }
    out.pixels()[i] = last_out;
  }
  return out;
}

ClutterMap compute_clutter_map(const RgbImage& image, const FcmParams& params, kernels::Exec exec) {
  if (image.width() < 16 || image.height() < 16) throw ImageTooSmall("clutter map needs at least 16x16 pixels");
  const int w = image.width();
  const int h = image.height();

  const Image<Lab> lab = rgb_to_lab(image);
  GrayImage l(w, h), a(w, h), b(w, h);
  for (std::size_t i = 0; i < lab.size(); ++i) {
    l.pixels()[i] = lab.pixels()[i].l;
    a.pixels()[i] = lab.pixels()[i].a;
    b.pixels()[i] = lab.pixels()[i].b;
  }

  const double trunc = params.kernel_truncate;
  const auto g1 = kernels::gaussian_kernel(params.dog_sigma_inner, trunc);
  const auto g2 = kernels::gaussian_kernel(params.dog_sigma_outer, trunc);
  const auto go = kernels::gaussian_kernel(params.orientation_sigma, trunc);
  const auto dgo = kernels::gaussian_derivative_kernel(params.orientation_sigma, trunc);
  const auto window = kernels::gaussian_kernel(params.window_sigma, trunc);

  GrayImage contrast = kernels::convolve_separable(l, g1, g1, exec);
  {
    const GrayImage outer = kernels::convolve_separable(l, g2, g2, exec);
    for (std::size_t i = 0; i < contrast.size(); ++i) contrast.pixels()[i] -= outer.pixels()[i];
  }

  const GrayImage gx = kernels::convolve_separable(l, dgo, go, exec);
  const GrayImage gy = kernels::convolve_separable(l, go, dgo, exec);
  // 0, 90, 45 and 135 degree edge responses; the diagonal ones are steered
  // from the axis-aligned derivative pair.
  std::array<GrayImage, 4> orient{gx, gy, GrayImage(w, h), GrayImage(w, h)};
  const double s = std::numbers::sqrt2 / 2.0;
  for (std::size_t i = 0; i < gx.size(); ++i) {
    orient[2].pixels()[i] = s * (gx.pixels()[i] + gy.pixels()[i]);
    orient[3].pixels()[i] = s * (gy.pixels()[i] - gx.pixels()[i]);
  }

  const GrayImage var_c = local_variance(std::move(contrast), window, exec);
  const GrayImage var_a = local_variance(std::move(a), window, exec);
  const GrayImage var_b = local_variance(std::move(b), window, exec);
  std::array<GrayImage, 4> var_o;
  for (int k = 0; k < 4; ++k) var_o[k] = local_variance(std::move(orient[k]), window, exec);

  ClutterMap map{GrayImage(w, h)};
  const double wo = params.orientation_weight / 4.0;
  for (std::size_t i = 0; i < map.values.size(); ++i) {
    double orient_sum = 0.0;
    for (int k = 0; k < 4; ++k) orient_sum += std::sqrt(var_o[k].pixels()[i]);
    map.values.pixels()[i] =
        std::sqrt(var_c.pixels()[i]) / params.contrast_norm +
        params.color_weight * std::sqrt(var_a.pixels()[i] + var_b.pixels()[i]) / params.color_norm +
        wo * orient_sum / params.orientation_norm;
  }
  return map;
}

double global_score(const ClutterMap& map) {
  const auto px = map.values.pixels();
  return std::accumulate(px.begin(), px.end(), 0.0) / static_cast<double>(px.size());
}

double local_score(const ClutterMap& map, Pixel center, double opening_px) {
  if (!map.values.contains(center)) throw OutOfBounds("local_score: centre outside the image");
  const double r = 0.5 * opening_px;
  const int ir = static_cast<int>(std::ceil(r));
  double sum = 0.0;
  long count = 0;
  for (int dy = -ir; dy <= ir; ++dy) {
    for (int dx = -ir; dx <= ir; ++dx) {
      if (dx * dx + dy * dy > r * r) continue;
      const int x = center.x + dx;
      const int y = center.y + dy;
      if (!map.values.contains(x, y)) continue;
      sum += map.values(x, y);
      ++count;
    }
  }
  return sum / static_cast<double>(count);
}

}  // namespace declutter::clutter
