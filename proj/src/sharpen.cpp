#include "msairway/sharpen.hpp"

#include <algorithm>
#include <cmath>

namespace msairway {

FloatGrid sharpen_unclamped(const FloatGrid& img, double amount) {
  if (!(amount >= 0.0) || !std::isfinite(amount)) {
    throw RangeError("sharpen amount must be a non-negative number");
  }
  if (amount == 0.0) return img;
  const auto ny = img.ny();
  const auto nx = img.nx();
  FloatGrid out(img.shape());
  for (std::size_t y = 0; y < ny; ++y) {
    const std::size_t up = y == 0 ? 0 : y - 1;
    const std::size_t dn = y + 1 == ny ? y : y + 1;
    for (std::size_t x = 0; x < nx; ++x) {
      const std::size_t lf = x == 0 ? 0 : x - 1;
      const std::size_t rt = x + 1 == nx ? x : x + 1;
      const double cross = static_cast<double>(img(up, x)) + img(dn, x) + img(y, lf) + img(y, rt);
      out(y, x) = static_cast<float>((1.0 + 4.0 * amount) * img(y, x) - amount * cross);
    }
  }
  return out;
}

SliceImage sharpen(const SliceImage& img, double amount) {
  auto g = sharpen_unclamped(img.grid(), amount);
  for (auto& v : g.values()) v = std::clamp(v, 0.0F, 255.0F);
  return SliceImage(std::move(g));
}

}  // namespace msairway
