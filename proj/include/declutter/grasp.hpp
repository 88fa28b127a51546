#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "declutter/image.hpp"
#include "declutter/kernels.hpp"
#include "declutter/types.hpp"

namespace declutter::grasp {

struct GdiParams {
  double lct = 16.0;   // px, lateral clearance
  double hct = 0.02;   // m, height clearance
  int finger_width_px = 5;
  int samples_per_side = 10;
};

/// Linear object-count model k = b0 + b1 * area + b2 * global_clutter.
struct KModel {
  std::array<double, 3> beta{1.0, 0.0, 0.0};
  int k_max = 25;
};

struct KSample {
  double area = 0.0;
  double global_clutter = 0.0;
  double k = 0.0;
};

/// mask(p) = 1 iff background(p) - depth(p) >= delta. Throws ShapeMismatch.
BinaryMask depth_filter(const DepthImage& depth, const DepthImage& background, double delta = 0.01);

double estimate_area_spread(const BinaryMask& mask);

/// Least squares through the 3x3 normal equations. Throws RankDeficient.
KModel fit_k_model(const std::vector<KSample>& samples, int k_max = 25);

int estimate_k(double area, double global_clutter, const KModel& model, int k_max);
inline int estimate_k(double area, double global_clutter, const KModel& model) {
  return estimate_k(area, global_clutter, model, model.k_max);
}

struct KMeansResult {
  std::vector<geom::Vec2> centroids;  // final Lloyd centroids (sub-pixel)
  std::vector<Pixel> snapped;          // nearest set pixel to each centroid
  std::vector<double> objective;       // within-cluster SSE after each assignment
  int iterations = 0;
};

/// k-means++ seeded Lloyd iterations on set-pixel coordinates (max 50
/// iterations, stops once no centroid moves 0.5 px). Throws TooFewPixels.
KMeansResult kmeans(const BinaryMask& mask, int k, std::uint64_t seed,
                    kernels::Exec exec = kernels::Exec::parallel);

inline std::vector<Pixel> cluster_candidates(const BinaryMask& mask, int k, std::uint64_t seed) {
  return kmeans(mask, k, seed).snapped;
}

/// Points sampled by compute_gdi, in image coordinates.
std::vector<geom::Vec2> gdi_sample_points(Pixel center, double angle, const GdiParams& params, double opening_px);

/// True when the grasp rectangle fits inside the image.
bool gdi_rectangle_inside(int width, int height, Pixel center, double angle, const GdiParams& params,
                          double opening_px);

/// Fraction of finger-region samples whose depth clears the centre depth by
/// hct. Throws RectangleOutOfBounds.
double compute_gdi(const DepthImage& depth, Pixel center, double angle, const GdiParams& params,
                   double opening_px);

/// Angles searched by plan_grasps: 0, 15, ..., 165 degrees.
std::vector<double> candidate_angles();

struct PlanInputs {
  int k = 10;
  GdiParams gdi;
  double opening_px = 40.0;
  int n_top = 3;
  std::uint64_t seed = 0;
  double depth_delta = 0.01;
};

/// Ranked poses from a mask with a fixed cluster count. Throws NoCandidates
/// when the mask is empty.
std::vector<GraspPose> plan_grasps_with_k(const DepthImage& depth, const BinaryMask& mask, const PlanInputs& in);

/// Full pipeline: depth filter, area spread, k estimate, clustering, per
/// centroid angle search, GDI ranking.
std::vector<GraspPose> plan_grasps(const DepthImage& depth, const DepthImage& background, const KModel& k_model,
                                   double global_clutter, const GdiParams& params, double opening_px, int n_top,
                                   std::uint64_t seed);

}  // namespace declutter::grasp
