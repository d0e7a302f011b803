#include "msairway/resample.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace msairway {

void check_ratio(int ir) {
  if (ir < 1) throw RangeError("interpolation ratio must be >= 1, got " + std::to_string(ir));
}

namespace {

std::size_t resolve(std::ptrdiff_t i, std::size_t n, Boundary b) {
  const auto last = static_cast<std::ptrdiff_t>(n) - 1;
  if (i >= 0 && i <= last) return static_cast<std::size_t>(i);
  if (b == Boundary::Clamp || n == 1) return i < 0 ? 0 : static_cast<std::size_t>(last);
  // Mirror without repeating the edge: -1 -> 1, n -> n - 2.
  const auto r = i < 0 ? -i : 2 * last - i;
  return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(r, 0, last));
}

}  // namespace

std::vector<detail::Taps> detail::axis_taps(std::size_t n_src, int ir, Boundary b) {
  std::vector<Taps> taps(n_src * static_cast<std::size_t>(ir));
  for (std::size_t d = 0; d < taps.size(); ++d) {
    const double src = (static_cast<double>(d) + 0.5) / ir - 0.5;
    const double f = std::floor(src);
    const auto i0 = static_cast<std::ptrdiff_t>(f);
    taps[d] = {resolve(i0, n_src, b), resolve(i0 + 1, n_src, b), src - f};
  }
  return taps;
}

SliceImage upsample_bilinear(const SliceImage& img, int ir, Boundary boundary) {
  auto g = upsample_bilinear(img.grid(), ir, boundary);
  // Convex weights keep values in range up to float rounding.
  for (auto& v : g.values()) v = std::clamp(v, 0.0F, 255.0F);
  return SliceImage(std::move(g));
}

}  // namespace msairway
