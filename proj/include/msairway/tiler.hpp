#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "msairway/grid.hpp"

namespace msairway {

/// Partition of an image into a grid of square tiles. The bottom and right
/// edges are padded up to a whole number of tiles.
struct TileLayout {
  Shape2 src;
  std::size_t tile_dim = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t pad_bottom = 0;
  std::size_t pad_right = 0;

  std::size_t count() const { return rows * cols; }
  friend bool operator==(const TileLayout&, const TileLayout&) = default;
};

TileLayout make_layout(Shape2 src, std::size_t tile_dim);

/// Number of tiles a (ny, nx) image splits into.
inline std::size_t tile_count(Shape2 src, std::size_t tile_dim) {
  return make_layout(src, tile_dim).count();
}

enum class Padding {
  Edge,  // replicate the last row / column (images)
  Zero,  // fill with T{} (masks)
};

template <class T>
struct TileSet {
  TileLayout layout;
  std::vector<Grid2D<T>> tiles;  // row-major, top-left first
};

template <class T>
TileSet<T> split(const Grid2D<T>& img, std::size_t tile_dim, Padding padding) {
  TileSet<T> ts{make_layout(img.shape(), tile_dim), {}};
  const auto& l = ts.layout;
  ts.tiles.reserve(l.count());
  for (std::size_t r = 0; r < l.rows; ++r) {
    for (std::size_t c = 0; c < l.cols; ++c) {
      Grid2D<T> tile(Shape2{tile_dim, tile_dim});
      for (std::size_t y = 0; y < tile_dim; ++y) {
        std::size_t sy = r * tile_dim + y;
        const bool pad_y = sy >= img.ny();
        if (pad_y) sy = img.ny() - 1;
        for (std::size_t x = 0; x < tile_dim; ++x) {
          std::size_t sx = c * tile_dim + x;
          const bool pad_x = sx >= img.nx();
          if (pad_x) sx = img.nx() - 1;
          tile(y, x) = (padding == Padding::Zero && (pad_y || pad_x)) ? T{} : img(sy, sx);
        }
      }
      ts.tiles.push_back(std::move(tile));
    }
  }
  return ts;
}

void check_tileset(const TileLayout& layout, std::size_t n_tiles,
                   const std::vector<Shape2>& tile_shapes);

/// Reassembles the tiles and crops the padding.
template <class T>
Grid2D<T> merge(const TileSet<T>& ts) {
  const auto& l = ts.layout;
  std::vector<Shape2> shapes;
  shapes.reserve(ts.tiles.size());
  for (const auto& t : ts.tiles) shapes.push_back(t.shape());
  check_tileset(l, ts.tiles.size(), shapes);

  Grid2D<T> out(l.src);
  for (std::size_t y = 0; y < l.src.ny; ++y) {
    const auto row_tile = y / l.tile_dim;
    const auto ty = y % l.tile_dim;
    for (std::size_t x = 0; x < l.src.nx; ++x) {
      out(y, x) = ts.tiles[row_tile * l.cols + x / l.tile_dim](ty, x % l.tile_dim);
    }
  }
  return out;
}

/// On-disk tile location: <root>/<case>/<ir>/<z>/<row>_<col>.stx
std::filesystem::path tile_path(const std::filesystem::path& root, const std::string& case_id,
                                int ir, std::size_t z, std::size_t row, std::size_t col);

}  // namespace msairway
