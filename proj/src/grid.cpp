#include "msairway/grid.hpp"

#include <algorithm>
#include <cmath>

namespace msairway {

std::string to_string(const Shape2& s) {
  return std::to_string(s.ny) + "x" + std::to_string(s.nx);
}

std::string to_string(const Shape3& s) {
  return std::to_string(s.nz) + "x" + std::to_string(s.ny) + "x" + std::to_string(s.nx);
}

namespace {

void check_range(const FloatGrid& g, float lo, float hi, const char* what) {
  for (float v : g.values()) {
    if (!(v >= lo && v <= hi)) {
      throw RangeError(std::string(what) + " value " + std::to_string(v) + " outside [" +
                       std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }
  }
}

void check_shape3(const Shape3& s) {
  if (s.nz == 0 || s.ny == 0 || s.nx == 0) {
    throw ShapeError("volume dimensions must be >= 1, got " + to_string(s));
  }
}

}  // namespace

SliceImage::SliceImage(FloatGrid grid) : grid_(std::move(grid)) {
  check_range(grid_, 0.0F, 255.0F, "slice image");
}

ProbMap::ProbMap(FloatGrid grid) : grid_(std::move(grid)) {
  check_range(grid_, 0.0F, 1.0F, "probability");
}

Volume::Volume(Shape3 shape, Spacing3 spacing, std::vector<std::int16_t> hu)
    : shape_(shape), spacing_(spacing), data_(std::move(hu)) {
  check_shape3(shape_);
  if (data_.size() != shape_.size()) {
    throw ShapeError("volume payload has " + std::to_string(data_.size()) +
                     " voxels, dimensions " + to_string(shape_) + " need " +
                     std::to_string(shape_.size()));
  }
}

Mask3D::Mask3D(Shape3 shape, Spacing3 spacing)
    : shape_(shape), spacing_(spacing), data_(shape.size(), 0) {
  check_shape3(shape_);
}

Mask3D::Mask3D(Shape3 shape, Spacing3 spacing, std::vector<std::uint8_t> bits)
    : shape_(shape), spacing_(spacing), data_(std::move(bits)) {
  check_shape3(shape_);
  if (data_.size() != shape_.size()) {
    throw ShapeError("mask payload has " + std::to_string(data_.size()) +
                     " voxels, dimensions " + to_string(shape_) + " need " +
                     std::to_string(shape_.size()));
  }
  for (auto& b : data_) {
    if (b > 1) throw RangeError("mask voxel value " + std::to_string(b) + " is not 0 or 1");
  }
}

std::size_t Mask3D::count() const {
  return static_cast<std::size_t>(std::count(data_.begin(), data_.end(), std::uint8_t{1}));
}

Mask2D Mask3D::slice(std::size_t z) const {
  if (z >= shape_.nz) {
    throw IndexError("slice " + std::to_string(z) + " out of range [0, " +
                     std::to_string(shape_.nz) + ")");
  }
  const auto n = shape_.ny * shape_.nx;
  std::vector<std::uint8_t> out(data_.begin() + static_cast<std::ptrdiff_t>(z * n),
                                data_.begin() + static_cast<std::ptrdiff_t>((z + 1) * n));
  return Mask2D(shape_.slice(), std::move(out));
}

void Mask3D::set_slice(std::size_t z, const Mask2D& m) {
  if (z >= shape_.nz) {
    throw IndexError("slice " + std::to_string(z) + " out of range [0, " +
                     std::to_string(shape_.nz) + ")");
  }
  if (m.shape() != shape_.slice()) {
    throw ShapeError("slice shape " + to_string(m.shape()) + " does not match mask " +
                     to_string(shape_));
  }
  const auto n = shape_.ny * shape_.nx;
  auto dst = data_.begin() + static_cast<std::ptrdiff_t>(z * n);
  for (std::size_t i = 0; i < n; ++i) dst[static_cast<std::ptrdiff_t>(i)] = m.values()[i] ? 1 : 0;
}

}  // namespace msairway
