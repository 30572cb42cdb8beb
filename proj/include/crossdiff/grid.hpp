#pragma once

#include <array>
#include <span>
#include <vector>

namespace crossdiff {

// Second coordinate is unused (zero) on 1D grids.
using Point = std::array<double, 2>;

// Axis-aligned box in one or two dimensions.
struct Box {
  int dim = 1;
  Point lower{0.0, 0.0};
  Point upper{1.0, 1.0};

  double extent(int axis) const { return upper[axis] - lower[axis]; }
  double measure() const;
  bool operator==(const Box&) const = default;
};

struct InteriorFace {
  int lower;  // cell on the negative side
  int upper;  // cell on the positive side
  int axis;
};

struct BoundaryFace {
  int cell;
  int axis;
  int side;  // -1 for the lower wall, +1 for the upper wall
  Point center;
};

// Uniform cell-centered grid over a Box.
class Grid {
 public:
  Grid(const Box& box, std::array<int, 2> cells);

  static Grid line(double lower, double upper, int cells);
  static Grid rectangle(Point lower, Point upper, int nx, int ny);

  int dim() const { return box_.dim; }
  const Box& box() const { return box_; }
  int cells(int axis) const { return cells_[axis]; }
  int size() const { return cells_[0] * cells_[1]; }
  double spacing(int axis) const { return spacing_[axis]; }
  double cell_volume() const;
  // Sum of cell volumes.
  double measure() const { return cell_volume() * size(); }
  // Measure of a face normal to `axis` (1 in 1D).
  double face_area(int axis) const;

  int index(int ix, int iy = 0) const { return iy * cells_[0] + ix; }
  std::array<int, 2> coords(int cell) const { return {cell % cells_[0], cell / cells_[0]}; }
  Point center(int cell) const;

  const std::vector<InteriorFace>& interior_faces() const { return interior_; }
  const std::vector<BoundaryFace>& boundary_faces() const { return boundary_; }
  // Cells touching the domain boundary.
  std::vector<int> boundary_cells() const;

  bool operator==(const Grid& other) const {
    return box_ == other.box_ && cells_ == other.cells_;
  }

 private:
  Box box_;
  std::array<int, 2> cells_;
  std::array<double, 2> spacing_;
  std::vector<InteriorFace> interior_;
  std::vector<BoundaryFace> boundary_;
};

// Cell values of m species at one instant, stored species-major.
struct Field {
  double time = 0.0;
  int species = 0;
  int cells = 0;
  std::vector<double> values;

  Field() = default;
  Field(int species_count, int cell_count, double t = 0.0)
      : time(t), species(species_count), cells(cell_count),
        values(static_cast<std::size_t>(species_count) * cell_count, 0.0) {}

  double& at(int i, int cell) { return values[static_cast<std::size_t>(i) * cells + cell]; }
  double at(int i, int cell) const { return values[static_cast<std::size_t>(i) * cells + cell]; }

  std::span<double> component(int i) {
    return {values.data() + static_cast<std::size_t>(i) * cells, static_cast<std::size_t>(cells)};
  }
  std::span<const double> component(int i) const {
    return {values.data() + static_cast<std::size_t>(i) * cells, static_cast<std::size_t>(cells)};
  }
};

}  // namespace crossdiff
