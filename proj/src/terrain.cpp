#include "kquad/terrain.hpp"

#include <algorithm>
#include <random>

namespace kquad {

double TerrainProfile::height_at(double x) const {
  for (const auto& b : blocks)
    if (b.x_start <= x && x <= b.x_end) return b.height;
  return 0.0;
}

void TerrainProfile::validate() const {
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const auto& b = blocks[i];
    if (!(b.x_start < b.x_end))
      throw std::invalid_argument("TerrainProfile: empty block interval");
    if (i > 0 && b.x_start < blocks[i - 1].x_end)
      throw std::invalid_argument("TerrainProfile: overlapping blocks");
  }
}

TerrainProfile make_rough_terrain(std::uint64_t seed, int n_blocks, double x0,
                                  double path_length) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u_start(x0, x0 + path_length);
  std::uniform_real_distribution<double> u_width(0.25, 0.45);
  std::uniform_real_distribution<double> u_height(0.05, 0.07);

  std::vector<double> starts(static_cast<std::size_t>(n_blocks));
  for (auto& s : starts) s = u_start(rng);
  std::sort(starts.begin(), starts.end());

  TerrainProfile t;
  for (double s : starts) {
    const double w = u_width(rng);
    const double h = u_height(rng);
    if (!t.blocks.empty() && s < t.blocks.back().x_end + 0.05)
      s = t.blocks.back().x_end + 0.05;
    t.blocks.push_back({s, s + w, h});
  }
  t.validate();
  return t;
}

}  // namespace kquad
