#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace skt {

// Uniform cell-centered grid on [0, extent[0]] (times [0, extent[1]] when dim == 2).
// Cells are indexed x-fastest: c = iy * cells[0] + ix.
struct Grid {
  int dim = 1;
  std::array<int, 2> cells{1, 1};        // cells[1] stays 1 in 1d
  std::array<double, 2> extent{1.0, 1.0};

  static Grid line(int nx, double length_x);
  static Grid rect(int nx, int ny, double length_x, double length_y);

  int ncells() const { return cells[0] * cells[1]; }
  double dx(int axis) const { return extent[axis] / cells[axis]; }
  double cell_measure() const { return dim == 2 ? dx(0) * dx(1) : dx(0); }
  double domain_measure() const { return dim == 2 ? extent[0] * extent[1] : extent[0]; }

  int index(int ix, int iy = 0) const { return iy * cells[0] + ix; }
  std::array<double, 2> center(int c) const;

  // Interior faces along `axis`; a face sits between flat cells (lo, lo + stride).
  int nfaces(int axis) const;
  // Flat cell index on the low side of interior face `f` along `axis`.
  int face_lo(int axis, int f) const;
  int face_stride(int axis) const { return axis == 0 ? 1 : cells[0]; }
  // Physical coordinates of the face center.
  std::array<double, 2> face_center(int axis, int f) const;

  bool operator==(const Grid&) const = default;

  void validate() const;  // throws InputError on nonsense
};

// n species of cell values on one grid, laid out species-major:
// data[i * ncells + c]. Fields are value-semantic snapshots.
struct Field {
  int n = 0;
  Grid grid;
  std::vector<double> data;

  Field() = default;
  Field(int n_species, const Grid& g)
      : n(n_species), grid(g), data(static_cast<std::size_t>(n_species) * g.ncells(), 0.0) {}

  double& at(int i, int c) { return data[static_cast<std::size_t>(i) * grid.ncells() + c]; }
  double at(int i, int c) const { return data[static_cast<std::size_t>(i) * grid.ncells() + c]; }
  double* row(int i) { return data.data() + static_cast<std::size_t>(i) * grid.ncells(); }
  const double* row(int i) const { return data.data() + static_cast<std::size_t>(i) * grid.ncells(); }

  double min_value() const;
  double max_value() const;
  std::vector<double> masses() const;  // per-species cell sums times cell measure

  bool same_layout(const Field& other) const { return n == other.n && grid == other.grid; }
};

struct StepMeta {
  double t_start = 0;
  double dt_used = 0;
  int newton_iters = 0;
  double residual_norm = 0;  // scaled, at acceptance
  int dt_halvings = 0;
};

// Snapshot sequence of one run; states[k] is the field at times[k];
// steps[k] describes the step from times[k] to times[k+1].
struct Trajectory {
  std::vector<double> times;
  std::vector<Field> states;
  std::vector<StepMeta> steps;
};

enum class TransferMode { restriction, prolongation };

// Restriction is block cell averaging onto a coarser nested grid (conserves mass);
// prolongation is piecewise-constant injection onto a finer nested grid.
// Grids must be nested: same extents, integer cell ratio per axis.
Field transfer(const Field& src, const Grid& to, TransferMode mode);

}  // namespace skt
