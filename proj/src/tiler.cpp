#include "msairway/tiler.hpp"

namespace msairway {

TileLayout make_layout(Shape2 src, std::size_t tile_dim) {
  if (tile_dim == 0) throw RangeError("tile dimension must be positive");
  if (src.ny == 0 || src.nx == 0) throw ShapeError("cannot split an empty image");
  TileLayout l;
  l.src = src;
  l.tile_dim = tile_dim;
  l.rows = (src.ny + tile_dim - 1) / tile_dim;
  l.cols = (src.nx + tile_dim - 1) / tile_dim;
  l.pad_bottom = l.rows * tile_dim - src.ny;
  l.pad_right = l.cols * tile_dim - src.nx;
  return l;
}

void check_tileset(const TileLayout& layout, std::size_t n_tiles,
                   const std::vector<Shape2>& tile_shapes) {
  if (layout.tile_dim == 0 || layout.rows * layout.tile_dim != layout.src.ny + layout.pad_bottom ||
      layout.cols * layout.tile_dim != layout.src.nx + layout.pad_right ||
      layout.pad_bottom >= layout.tile_dim || layout.pad_right >= layout.tile_dim) {
    throw ShapeError("inconsistent tile layout for " + to_string(layout.src));
  }
  if (n_tiles != layout.count()) {
    throw ShapeError("tile set holds " + std::to_string(n_tiles) + " tiles, layout needs " +
                     std::to_string(layout.count()));
  }
  const Shape2 want{layout.tile_dim, layout.tile_dim};
  for (std::size_t i = 0; i < tile_shapes.size(); ++i) {
    if (tile_shapes[i] != want) {
      throw ShapeError("tile " + std::to_string(i) + " has shape " + to_string(tile_shapes[i]) +
                       ", expected " + to_string(want));
    }
  }
}

std::filesystem::path tile_path(const std::filesystem::path& root, const std::string& case_id,
                                int ir, std::size_t z, std::size_t row, std::size_t col) {
  return root / case_id / std::to_string(ir) / std::to_string(z) /
         (std::to_string(row) + "_" + std::to_string(col) + ".stx");
}

}  // namespace msairway
