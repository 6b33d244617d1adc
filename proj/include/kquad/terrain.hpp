#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace kquad {

/// Piecewise-constant height field over flat ground at height 0.
struct TerrainBlock {
  double x_start{0.0};
  double x_end{0.0};
  double height{0.0};
};

struct TerrainProfile {
  std::vector<TerrainBlock> blocks;

  double height_at(double x) const;
  void validate() const;
};

/// Eight-block rough terrain: block start positions drawn over
/// [x0, x0 + path_length], widths 0.25-0.45 m, heights 0.05-0.07 m,
/// inter-block gap at least 0.05 m. Deterministic for a fixed seed.
TerrainProfile make_rough_terrain(std::uint64_t seed, int n_blocks = 8,
                                  double x0 = 0.8, double path_length = 4.0);

}  // namespace kquad
