#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "msairway/grid.hpp"

namespace msairway {

/// HU display window spanning [level - width/2, level + width/2].
struct WindowSpec {
  double width_hu = 1500.0;
  double level_hu = -500.0;

  void validate() const;
};

/// Interpolation ratios in use and the fixed tile edge length.
struct ScaleSpec {
  std::vector<int> ratios{1, 2, 4, 8};
  std::size_t tile_dim = 512;

  void validate() const;
};

/// Maps one axial slice through the window onto [0, 255]. With `quantize`
/// the result is rounded to the nearest integer level.
SliceImage window_normalize(const Volume& vol, const WindowSpec& win, std::size_t z,
                            bool quantize = false);

/// Scalar form of the window map, exposed for tests and tools.
double window_value(double hu, const WindowSpec& win);

// Volume files: a text header plus a raw little-endian payload, x fastest.
//
//   NDims = 3
//   DimSize = nx ny nz
//   ElementSpacing = dx dy dz
//   ElementType = INT16 | UINT8
//   ElementDataFile = <path relative to the header>
//
// Writing places the payload next to the header with the extension
// replaced by ".raw".
enum class ElementType { Int16, UInt8 };

Volume read_volume(const std::filesystem::path& header);
void write_volume(const Volume& vol, const std::filesystem::path& header);

/// Masks are stored as UINT8. Reading also accepts INT16 payloads holding 0/1.
Mask3D read_mask(const std::filesystem::path& header);
void write_mask(const Mask3D& mask, const std::filesystem::path& header);

// STX1 tensor exchange: 8-byte magic "STX1\0\0\0\0", one JSON header line
// {"dtype":"f32"|"u8","order":"C","shape":[ny,nx]} terminated by '\n', then
// the raw little-endian payload.
enum class TensorDType { F32, U8 };

struct Tensor2D {
  TensorDType dtype = TensorDType::F32;
  FloatGrid data;
};

Tensor2D read_tensor(const std::filesystem::path& path);
void write_tensor(const FloatGrid& grid, const std::filesystem::path& path,
                  TensorDType dtype = TensorDType::F32);

SliceImage read_slice_image(const std::filesystem::path& path);
ProbMap read_prob_map(const std::filesystem::path& path);
inline void write_tensor(const SliceImage& img, const std::filesystem::path& path,
                         TensorDType dtype = TensorDType::F32) {
  write_tensor(img.grid(), path, dtype);
}
inline void write_tensor(const ProbMap& pm, const std::filesystem::path& path) {
  write_tensor(pm.grid(), path, TensorDType::F32);
}

}  // namespace msairway
