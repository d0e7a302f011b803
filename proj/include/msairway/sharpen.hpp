#pragma once

#include "msairway/grid.hpp"

namespace msairway {

/// 3x3 Laplacian sharpening: centre weight 1 + 4*amount, 4-neighbours
/// -amount, edge-replicated borders, result clamped to [0, 255].
SliceImage sharpen(const SliceImage& img, double amount = 1.0);

/// Same convolution without the final clamp.
FloatGrid sharpen_unclamped(const FloatGrid& img, double amount);

}  // namespace msairway
