#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "msairway/error.hpp"

namespace msairway {

struct Shape2 {
  std::size_t ny = 0;
  std::size_t nx = 0;

  std::size_t size() const { return ny * nx; }
  friend bool operator==(const Shape2&, const Shape2&) = default;
};

struct Shape3 {
  std::size_t nz = 0;
  std::size_t ny = 0;
  std::size_t nx = 0;

  std::size_t size() const { return nz * ny * nx; }
  Shape2 slice() const { return {ny, nx}; }
  friend bool operator==(const Shape3&, const Shape3&) = default;
};

/// Voxel spacing in millimetres.
struct Spacing3 {
  double dz = 1.0;
  double dy = 1.0;
  double dx = 1.0;
  friend bool operator==(const Spacing3&, const Spacing3&) = default;
};

std::string to_string(const Shape2& s);
std::string to_string(const Shape3& s);

/// Dense row-major 2D grid, x fastest.
template <class T>
class Grid2D {
 public:
  Grid2D() = default;
  explicit Grid2D(Shape2 shape, T fill = T{})
      : shape_(shape), data_(shape.size(), fill) {}
  Grid2D(Shape2 shape, std::vector<T> data) : shape_(shape), data_(std::move(data)) {
    if (data_.size() != shape_.size()) {
      throw ShapeError("grid data length " + std::to_string(data_.size()) +
                       " does not match shape " + to_string(shape_));
    }
  }

  const Shape2& shape() const { return shape_; }
  std::size_t ny() const { return shape_.ny; }
  std::size_t nx() const { return shape_.nx; }
  std::size_t size() const { return data_.size(); }

  T& operator()(std::size_t y, std::size_t x) { return data_[y * shape_.nx + x]; }
  const T& operator()(std::size_t y, std::size_t x) const { return data_[y * shape_.nx + x]; }

  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }
  const std::vector<T>& vector() const { return data_; }

  friend bool operator==(const Grid2D&, const Grid2D&) = default;

 private:
  Shape2 shape_;
  std::vector<T> data_;
};

using Mask2D = Grid2D<std::uint8_t>;
using FloatGrid = Grid2D<float>;

/// Normalized display-unit image, every value in [0, 255].
class SliceImage {
 public:
  SliceImage() = default;
  explicit SliceImage(FloatGrid grid);

  const FloatGrid& grid() const { return grid_; }
  const Shape2& shape() const { return grid_.shape(); }
  float operator()(std::size_t y, std::size_t x) const { return grid_(y, x); }

  friend bool operator==(const SliceImage&, const SliceImage&) = default;

 private:
  FloatGrid grid_;
};

/// Per-pixel foreground probability, every value in [0, 1].
class ProbMap {
 public:
  ProbMap() = default;
  explicit ProbMap(FloatGrid grid);

  const FloatGrid& grid() const { return grid_; }
  const Shape2& shape() const { return grid_.shape(); }
  float operator()(std::size_t y, std::size_t x) const { return grid_(y, x); }

  friend bool operator==(const ProbMap&, const ProbMap&) = default;

 private:
  FloatGrid grid_;
};

/// CT volume in Hounsfield units, x fastest then y then z.
class Volume {
 public:
  Volume() = default;
  Volume(Shape3 shape, Spacing3 spacing, std::vector<std::int16_t> hu);

  const Shape3& shape() const { return shape_; }
  const Spacing3& spacing() const { return spacing_; }
  std::span<const std::int16_t> values() const { return data_; }

  std::int16_t operator()(std::size_t z, std::size_t y, std::size_t x) const {
    return data_[(z * shape_.ny + y) * shape_.nx + x];
  }

  friend bool operator==(const Volume&, const Volume&) = default;

 private:
  Shape3 shape_;
  Spacing3 spacing_;
  std::vector<std::int16_t> data_;
};

/// Binary volumetric mask; voxel values are 0 or 1.
class Mask3D {
 public:
  Mask3D() = default;
  explicit Mask3D(Shape3 shape, Spacing3 spacing = {});
  Mask3D(Shape3 shape, Spacing3 spacing, std::vector<std::uint8_t> bits);

  const Shape3& shape() const { return shape_; }
  const Spacing3& spacing() const { return spacing_; }
  std::span<const std::uint8_t> values() const { return data_; }
  std::span<std::uint8_t> values() { return data_; }

  std::size_t index(std::size_t z, std::size_t y, std::size_t x) const {
    return (z * shape_.ny + y) * shape_.nx + x;
  }
  std::uint8_t operator()(std::size_t z, std::size_t y, std::size_t x) const {
    return data_[index(z, y, x)];
  }
  void set(std::size_t z, std::size_t y, std::size_t x, bool on) {
    data_[index(z, y, x)] = on ? 1 : 0;
  }

  std::size_t count() const;
  Mask2D slice(std::size_t z) const;
  void set_slice(std::size_t z, const Mask2D& m);

  // Equality ignores spacing; masks compare by occupancy.
  friend bool operator==(const Mask3D& a, const Mask3D& b) {
    return a.shape_ == b.shape_ && a.data_ == b.data_;
  }

 private:
  Shape3 shape_;
  Spacing3 spacing_;
  std::vector<std::uint8_t> data_;
};

}  // namespace msairway
