#pragma once

#include <string>
#include <vector>

#include "rlab/grid.hpp"

namespace rlab {

// Per-cell visitation frequencies; sums to 1 over non-wall cells.
struct HeatmapGrid {
  int width = 0;
  int height = 0;
  std::vector<double> freq;  // [y * width + x], 0 on walls

  double at(int x, int y) const { return freq[static_cast<std::size_t>(y) * width + x]; }
  double& at_mut(int x, int y) { return freq[static_cast<std::size_t>(y) * width + x]; }
  double total() const;
};

HeatmapGrid heatmap_from_state_counts(const GridWorld& world, const std::vector<double>& counts);

// Binary 8-bit PGM (P5), row-major from the top row. Scaling is
// round(255 * freq / max_freq); an all-zero map writes all zeros. This file
// is the bit-exact contract; the SVG is presentation only.
void write_heatmap_pgm(const HeatmapGrid& grid, const std::string& path);
HeatmapGrid read_heatmap_pgm(const std::string& path);

void write_heatmap_svg(const HeatmapGrid& grid, const GridSpec& spec, const std::string& path);

}  // namespace rlab
