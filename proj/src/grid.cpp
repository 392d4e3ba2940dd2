#include "skt/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "skt/errors.hpp"

namespace skt {

Grid Grid::line(int nx, double length_x) {
  Grid g;
  g.dim = 1;
  g.cells = {nx, 1};
  g.extent = {length_x, 1.0};
  g.validate();
  return g;
}

Grid Grid::rect(int nx, int ny, double length_x, double length_y) {
  Grid g;
  g.dim = 2;
  g.cells = {nx, ny};
  g.extent = {length_x, length_y};
  g.validate();
  return g;
}

void Grid::validate() const {
  if (dim != 1 && dim != 2) throw InputError("grid: dim must be 1 or 2");
  if (dim == 1 && cells[1] != 1) throw InputError("grid: 1d grid must have cells[1] == 1");
  for (int a = 0; a < dim; ++a)
    if (cells[a] < 2) throw InputError("grid: cell counts must be >= 2 along each active axis");
  for (int a = 0; a < dim; ++a) {
    if (!(extent[a] > 0) || !std::isfinite(extent[a]))
      throw InputError("grid: extents must be positive and finite");
  }
}

std::array<double, 2> Grid::center(int c) const {
  const int ix = c % cells[0];
  const int iy = c / cells[0];
  return {(ix + 0.5) * dx(0), dim == 2 ? (iy + 0.5) * dx(1) : 0.0};
}

int Grid::nfaces(int axis) const {
  if (axis == 0) return (cells[0] - 1) * cells[1];
  return cells[0] * (cells[1] - 1);
}

int Grid::face_lo(int axis, int f) const {
  if (axis == 0) {
    const int per_row = cells[0] - 1;
    const int iy = f / per_row;
    const int ix = f % per_row;
    return index(ix, iy);
  }
  return f;  // faces between rows iy and iy+1, flat order matches cell order
}

std::array<double, 2> Grid::face_center(int axis, int f) const {
  const int lo = face_lo(axis, f);
  const int ix = lo % cells[0];
  const int iy = lo / cells[0];
  if (axis == 0) return {(ix + 1.0) * dx(0), dim == 2 ? (iy + 0.5) * dx(1) : 0.0};
  return {(ix + 0.5) * dx(0), (iy + 1.0) * dx(1)};
}

double Field::min_value() const {
  return data.empty() ? 0.0 : *std::min_element(data.begin(), data.end());
}

double Field::max_value() const {
  return data.empty() ? 0.0 : *std::max_element(data.begin(), data.end());
}

std::vector<double> Field::masses() const {
  std::vector<double> out(n, 0.0);
  const double meas = grid.cell_measure();
  const int nc = grid.ncells();
  for (int i = 0; i < n; ++i) {
    double s = 0;
    const double* r = row(i);
    for (int c = 0; c < nc; ++c) s += r[c];
    out[i] = s * meas;
  }
  return out;
}

namespace {

// Integer cell ratio per axis, or throws; both grids must share extents.
std::array<int, 2> nesting_ratio(const Grid& fine, const Grid& coarse) {
  if (fine.dim != coarse.dim) throw InputError("transfer: grids differ in dimension");
  for (int a = 0; a < fine.dim; ++a) {
    if (fine.extent[a] != coarse.extent[a])
      throw InputError("transfer: grids must share extents");
  }
  std::array<int, 2> r{1, 1};
  for (int a = 0; a < fine.dim; ++a) {
    if (fine.cells[a] % coarse.cells[a] != 0)
      throw InputError("transfer: grids are not nested (cell counts do not divide)");
    r[a] = fine.cells[a] / coarse.cells[a];
    if (r[a] < 1) throw InputError("transfer: target grid is not coarser/finer as required");
  }
  return r;
}

}  // namespace

Field transfer(const Field& src, const Grid& to, TransferMode mode) {
  if (mode == TransferMode::restriction) {
    const auto r = nesting_ratio(src.grid, to);
    Field out(src.n, to);
    const double inv = 1.0 / (r[0] * r[1]);
    for (int i = 0; i < src.n; ++i) {
      for (int cy = 0; cy < to.cells[1]; ++cy) {
        for (int cx = 0; cx < to.cells[0]; ++cx) {
          double s = 0;
          for (int jy = 0; jy < r[1]; ++jy)
            for (int jx = 0; jx < r[0]; ++jx)
              s += src.at(i, src.grid.index(cx * r[0] + jx, cy * r[1] + jy));
          out.at(i, to.index(cx, cy)) = s * inv;
        }
      }
    }
    return out;
  }
  const auto r = nesting_ratio(to, src.grid);
  Field out(src.n, to);
  for (int i = 0; i < src.n; ++i) {
    for (int fy = 0; fy < to.cells[1]; ++fy)
      for (int fx = 0; fx < to.cells[0]; ++fx)
        out.at(i, to.index(fx, fy)) = src.at(i, src.grid.index(fx / r[0], fy / r[1]));
  }
  return out;
}

}  // namespace skt
