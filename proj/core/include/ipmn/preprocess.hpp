#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ipmn/volume.hpp"

namespace ipmn {

/// Separable Gaussian smoothing with sigma in millimetres. The kernel is
/// truncated at 3 sigma (and at the grid extent); near the border the weights
/// are renormalized over the in-grid taps.
Volume gaussian_blur(const Volume& v, double sigma_mm);

/// Homomorphic bias-field correction:
///   L = ln(1 + v),  F = blur(L, sigma_mm),  out = exp(L - F + mean(F)) - 1,
/// clipped at zero. Requires non-negative input.
Volume correct_bias(const Volume& v, double sigma_mm = 30.0);

/// Median over the clipped (2r+1)^3 neighbourhood. Even-sized neighbourhoods
/// at the border take the lower median, so outputs are always input values.
Volume denoise_median(const Volume& v, int radius_vox = 1);

/// Learned piecewise-linear landmark map onto a standard intensity scale.
struct NyulModel {
  std::vector<double> ranks;               // percentile ranks in (0, 100), strictly increasing
  std::vector<double> standard_landmarks;  // strictly increasing, same length as ranks
  std::array<double, 2> scale_bounds{0.0, 100.0};

  bool operator==(const NyulModel&) const = default;
};

/// {1, 10, 20, ..., 90, 99}
std::vector<double> default_nyul_ranks();

void validate(const NyulModel& model);

/// Each image's [p_first, p_last] landmark span is mapped linearly onto
/// scale_bounds; the standard landmarks are the per-rank means. When `masks`
/// is nonempty it must pair with `images` and restricts the percentiles to
/// foreground voxels.
NyulModel nyul_train(std::span<const Volume> images, std::span<const Mask> masks,
                     std::span<const double> ranks, std::array<double, 2> scale_bounds = {0.0, 100.0});

/// Maps the image's own landmarks onto the standard landmarks; values beyond
/// the first/last landmark follow the terminal segment slopes. The whole
/// volume is transformed; `mask` only selects the voxels used for landmarks.
Volume nyul_apply(const Volume& v, const NyulModel& model, const Mask* mask = nullptr);

std::string to_json(const NyulModel& model);
NyulModel nyul_from_json(std::string_view json);

}  // namespace ipmn
