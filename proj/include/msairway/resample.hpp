#pragma once

#include <vector>

#include "msairway/grid.hpp"

namespace msairway {

/// How bilinear sampling treats neighbours that fall outside the image.
enum class Boundary {
  Clamp,    // repeat the edge pixel
  Reflect,  // mirror about the edge pixel without repeating it
};

void check_ratio(int ir);

namespace detail {

// Source taps for one output coordinate along one axis.
struct Taps {
  std::size_t lo;
  std::size_t hi;
  double w_hi;
};

std::vector<Taps> axis_taps(std::size_t n_src, int ir, Boundary b);

}  // namespace detail

/// Bilinear up-sampling by an integer ratio using the pixel-center mapping
/// src = (dst + 0.5) / ir - 0.5. A ratio of 1 returns the input unchanged.
/// Arithmetic is done in double for every element type.
template <class T>
Grid2D<T> upsample_bilinear(const Grid2D<T>& img, int ir, Boundary boundary = Boundary::Clamp) {
  check_ratio(ir);
  if (ir == 1) return img;
  const auto ty = detail::axis_taps(img.ny(), ir, boundary);
  const auto tx = detail::axis_taps(img.nx(), ir, boundary);
  Grid2D<T> out(Shape2{ty.size(), tx.size()});
  for (std::size_t y = 0; y < ty.size(); ++y) {
    const auto& a = ty[y];
    for (std::size_t x = 0; x < tx.size(); ++x) {
      const auto& b = tx[x];
      const double top = (1.0 - b.w_hi) * img(a.lo, b.lo) + b.w_hi * img(a.lo, b.hi);
      const double bot = (1.0 - b.w_hi) * img(a.hi, b.lo) + b.w_hi * img(a.hi, b.hi);
      out(y, x) = static_cast<T>((1.0 - a.w_hi) * top + a.w_hi * bot);
    }
  }
  return out;
}

SliceImage upsample_bilinear(const SliceImage& img, int ir, Boundary boundary = Boundary::Clamp);

/// out(i, j) = in(i / ir, j / ir).
template <class T>
Grid2D<T> upsample_nearest(const Grid2D<T>& in, int ir) {
  check_ratio(ir);
  if (ir == 1) return in;
  const auto r = static_cast<std::size_t>(ir);
  Grid2D<T> out(Shape2{in.ny() * r, in.nx() * r});
  for (std::size_t y = 0; y < out.ny(); ++y) {
    const std::size_t sy = y / r;
    for (std::size_t x = 0; x < out.nx(); ++x) out(y, x) = in(sy, x / r);
  }
  return out;
}

/// out(i, j) = in(i * ir, j * ir); both dimensions must be divisible by ir.
template <class T>
Grid2D<T> downsample_nearest(const Grid2D<T>& in, int ir) {
  check_ratio(ir);
  const auto r = static_cast<std::size_t>(ir);
  if (in.ny() % r != 0 || in.nx() % r != 0) {
    throw ShapeError("cannot downsample " + to_string(in.shape()) + " by " + std::to_string(ir) +
                     ": dimensions not divisible");
  }
  if (ir == 1) return in;
  Grid2D<T> out(Shape2{in.ny() / r, in.nx() / r});
  for (std::size_t y = 0; y < out.ny(); ++y) {
    for (std::size_t x = 0; x < out.nx(); ++x) out(y, x) = in(y * r, x * r);
  }
  return out;
}

}  // namespace msairway
