#include "msairway/connectivity.hpp"

#include <cstdlib>
#include <string>

#include "msairway/error.hpp"

namespace msairway {

Connectivity connectivity_from_int(int n) {
  switch (n) {
    case 6:
      return Connectivity::Six;
    case 18:
      return Connectivity::Eighteen;
    case 26:
      return Connectivity::TwentySix;
    default:
      throw RangeError("connectivity must be 6, 18 or 26, got " + std::to_string(n));
  }
}

std::vector<Offset3> neighbour_offsets(Connectivity c) {
  const int max_nonzero = c == Connectivity::Six ? 1 : c == Connectivity::Eighteen ? 2 : 3;
  std::vector<Offset3> out;
  for (int dz = -1; dz <= 1; ++dz) {
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        const int nz = std::abs(dz) + std::abs(dy) + std::abs(dx);
        if (nz > 0 && nz <= max_nonzero) out.push_back({dz, dy, dx});
      }
    }
  }
  return out;
}

}  // namespace msairway
