#pragma once

#include "declutter/image.hpp"
#include "declutter/kernels.hpp"
#include "declutter/types.hpp"

namespace declutter::push {

struct DistanceField {
  GrayImage values;  // Euclidean distance in pixels
};

/// Squared Euclidean distance (exact integers stored as double) to the
/// nearest object pixel or to the virtual one-pixel ring outside the image.
GrayImage squared_distance_with_border(const BinaryMask& mask, kernels::Exec exec = kernels::Exec::parallel);

DistanceField distance_transform(const BinaryMask& mask, kernels::Exec exec = kernels::Exec::parallel);

/// Argmax of the field; ties go to the smallest row-major index.
Pixel freest_point(const DistanceField& field);

struct PushParams {
  double entry_delta = 0.02;   // m
  double step_px = 2.0;
  double probe_margin = 0.001;  // m
};

/// Straight push from behind `selected_center` towards the freest point.
/// Throws NoEntryPoint when the backward walk leaves the image first.
PushAction plan_push(const DepthImage& depth, const BinaryMask& mask, Pixel selected_center,
                     const PushParams& params = {});

}  // namespace declutter::push
