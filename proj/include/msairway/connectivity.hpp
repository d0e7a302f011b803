#pragma once

#include <array>
#include <vector>

namespace msairway {

/// Voxel neighbourhood: faces (6), faces+edges (18), faces+edges+corners (26).
enum class Connectivity { Six = 6, Eighteen = 18, TwentySix = 26 };

Connectivity connectivity_from_int(int n);

struct Offset3 {
  int dz;
  int dy;
  int dx;
};

/// All neighbour offsets of the neighbourhood, excluding the centre.
std::vector<Offset3> neighbour_offsets(Connectivity c);

}  // namespace msairway
