#include "crossdiff/grid.hpp"

#include <fmt/core.h>

#include "crossdiff/errors.hpp"

namespace crossdiff {

double Box::measure() const {
  double m = extent(0);
  if (dim == 2) m *= extent(1);
  return m;
}

Grid::Grid(const Box& box, std::array<int, 2> cells) : box_(box), cells_(cells) {
  if (box_.dim != 1 && box_.dim != 2)
    throw InvalidParameter(fmt::format("grid dimension must be 1 or 2, got {}", box_.dim));
  if (box_.dim == 1) {
    cells_[1] = 1;
    box_.lower[1] = 0.0;
    box_.upper[1] = 0.0;
  }
  for (int a = 0; a < box_.dim; ++a) {
    if (cells_[a] < 1) throw InvalidParameter("grid needs at least one cell per axis");
    if (!(box_.extent(a) > 0.0)) throw InvalidParameter("grid extents must be positive");
    spacing_[a] = box_.extent(a) / cells_[a];
  }
  if (box_.dim == 1) spacing_[1] = 1.0;

  const int nx = cells_[0];
  const int ny = cells_[1];
  for (int iy = 0; iy < ny; ++iy)
    for (int ix = 0; ix + 1 < nx; ++ix) interior_.push_back({index(ix, iy), index(ix + 1, iy), 0});
  if (box_.dim == 2)
    for (int iy = 0; iy + 1 < ny; ++iy)
      for (int ix = 0; ix < nx; ++ix) interior_.push_back({index(ix, iy), index(ix, iy + 1), 1});

  for (int iy = 0; iy < ny; ++iy) {
    Point lo = center(index(0, iy));
    lo[0] = box_.lower[0];
    boundary_.push_back({index(0, iy), 0, -1, lo});
    Point hi = center(index(nx - 1, iy));
    hi[0] = box_.upper[0];
    boundary_.push_back({index(nx - 1, iy), 0, +1, hi});
  }
  if (box_.dim == 2) {
    for (int ix = 0; ix < nx; ++ix) {
      Point lo = center(index(ix, 0));
      lo[1] = box_.lower[1];
      boundary_.push_back({index(ix, 0), 1, -1, lo});
      Point hi = center(index(ix, ny - 1));
      hi[1] = box_.upper[1];
      boundary_.push_back({index(ix, ny - 1), 1, +1, hi});
    }
  }
}

Grid Grid::line(double lower, double upper, int cells) {
  return Grid(Box{1, {lower, 0.0}, {upper, 0.0}}, {cells, 1});
}

Grid Grid::rectangle(Point lower, Point upper, int nx, int ny) {
  return Grid(Box{2, lower, upper}, {nx, ny});
}

double Grid::cell_volume() const {
  return box_.dim == 1 ? spacing_[0] : spacing_[0] * spacing_[1];
}

double Grid::face_area(int axis) const {
  if (box_.dim == 1) return 1.0;
  return spacing_[1 - axis];
}

Point Grid::center(int cell) const {
  const auto [ix, iy] = coords(cell);
  Point p{box_.lower[0] + (ix + 0.5) * spacing_[0], 0.0};
  if (box_.dim == 2) p[1] = box_.lower[1] + (iy + 0.5) * spacing_[1];
  return p;
}

std::vector<int> Grid::boundary_cells() const {
  std::vector<int> out;
  for (int c = 0; c < size(); ++c) {
    const auto [ix, iy] = coords(c);
    bool edge = ix == 0 || ix == cells_[0] - 1;
    if (box_.dim == 2) edge = edge || iy == 0 || iy == cells_[1] - 1;
    if (edge) out.push_back(c);
  }
  return out;
}

}  // namespace crossdiff
