#include "rlab/heatmap.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace rlab {

double HeatmapGrid::total() const {
  double t = 0.0;
  for (double f : freq) t += f;
  return t;
}

HeatmapGrid heatmap_from_state_counts(const GridWorld& world, const std::vector<double>& counts) {
  detail::check(static_cast<int>(counts.size()) == world.mdp.n_states, "count size mismatch");
  HeatmapGrid grid;
  grid.width = world.spec.width;
  grid.height = world.spec.height;
  grid.freq.assign(static_cast<std::size_t>(grid.width) * grid.height, 0.0);
  double total = 0.0;
  for (double c : counts) total += c;
  detail::check(total > 0.0, "empty visitation counts");
  for (int s = 0; s < world.mdp.n_states; ++s) {
    const Cell c = world.state_to_cell[s];
    grid.at_mut(c.x, c.y) = counts[s] / total;
  }
  return grid;
}

void write_heatmap_pgm(const HeatmapGrid& grid, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RlabError("cannot open for writing: " + path);
  const double peak = *std::max_element(grid.freq.begin(), grid.freq.end());
  out << "P5\n" << grid.width << " " << grid.height << "\n255\n";
  std::vector<unsigned char> bytes;
  bytes.reserve(grid.freq.size());
  for (double f : grid.freq) {
    const double scaled = peak > 0.0 ? 255.0 * f / peak : 0.0;
    bytes.push_back(static_cast<unsigned char>(std::lround(scaled)));
  }
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw RlabError("write failed: " + path);
}

HeatmapGrid read_heatmap_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw RlabError("cannot open pgm: " + path);
  std::string magic;
  int w = 0, h = 0, maxval = 0;
  in >> magic >> w >> h >> maxval;
  detail::check(magic == "P5" && maxval == 255 && w > 0 && h > 0, "unsupported pgm: " + path);
  in.get();  // single whitespace after the header
  std::vector<unsigned char> bytes(static_cast<std::size_t>(w) * h);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  detail::check(static_cast<std::size_t>(in.gcount()) == bytes.size(), "truncated pgm");
  HeatmapGrid grid;
  grid.width = w;
  grid.height = h;
  grid.freq.assign(bytes.size(), 0.0);
  double total = 0.0;
  for (unsigned char b : bytes) total += b;
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    grid.freq[i] = total > 0.0 ? bytes[i] / total : 0.0;
  }
  return grid;
}

void write_heatmap_svg(const HeatmapGrid& grid, const GridSpec& spec, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RlabError("cannot open for writing: " + path);
  const int cell = 16;
  const double peak = *std::max_element(grid.freq.begin(), grid.freq.end());
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << grid.width * cell
      << "\" height=\"" << grid.height * cell << "\">\n";
  char buf[192];
  for (int y = 0; y < grid.height; ++y) {
    for (int x = 0; x < grid.width; ++x) {
      std::string fill;
      if (spec.is_wall(x, y)) {
        fill = "#404040";
      } else {
        const double t = peak > 0.0 ? grid.at(x, y) / peak : 0.0;
        const int r = 255;
        const int gb = static_cast<int>(std::lround(255.0 * (1.0 - t)));
        std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, gb, gb);
        fill = buf;
      }
      std::snprintf(buf, sizeof(buf),
                    "<rect x=\"%d\" y=\"%d\" width=\"%d\" height=\"%d\" fill=\"%s\"/>\n",
                    x * cell, y * cell, cell, cell, fill.c_str());
      out << buf;
    }
  }
  if (spec.in_bounds(spec.start.x, spec.start.y)) {
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"%d\" y=\"%d\" font-size=\"12\" fill=\"black\">S</text>\n",
                  spec.start.x * cell + 4, spec.start.y * cell + 12);
    out << buf;
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"%d\" y=\"%d\" font-size=\"12\" fill=\"black\">G</text>\n",
                  spec.goal.x * cell + 4, spec.goal.y * cell + 12);
    out << buf;
  }
  out << "</svg>\n";
}

}  // namespace rlab
