#pragma once

// Uniform 1-D grid bookkeeping and ghost-cell boundary handling.
//
// Cells are indexed 1..N in the scheme's convention; storage is 0-based.
// A ghost-extended field has N+4 rows covering logical cells -1..N+2,
// i.e. two ghost cells per boundary.

#include <vector>

#include "gorinn/common.hpp"

namespace gorinn {

enum class BoundaryKind { Periodic, Outflow };

/// Uniform grid on [x_left, x_right] with N cells. Cell i (1-based) is
/// centered at x_left + (i - 1/2) dx.
struct Grid {
  double x_left = 0.0;
  double x_right = 0.0;
  int n_cells = 0;
  double dx = 0.0;
  std::vector<double> cell_centers;
};

/// Builds a grid. The five-point update stencil needs at least 5 cells.
inline Grid make_grid(double x_left, double x_right, int n_cells) {
  if (!(x_right > x_left)) throw ConfigError("make_grid: x_right must exceed x_left");
  if (n_cells < 5) throw ConfigError("make_grid: need at least 5 cells (stencil spans i-2..i+2)");
  Grid g;
  g.x_left = x_left;
  g.x_right = x_right;
  g.n_cells = n_cells;
  g.dx = (x_right - x_left) / n_cells;
  g.cell_centers.resize(static_cast<std::size_t>(n_cells));
  for (int i = 0; i < n_cells; ++i) g.cell_centers[static_cast<std::size_t>(i)] = x_left + (i + 0.5) * g.dx;
  return g;
}

/// Discrete state at one time level: N cells x D components, row-major,
/// plus the metadata the update needs (time and cell size).
struct CellField {
  int n_cells = 0;
  int n_comp = 0;
  double time = 0.0;
  double dx = 0.0;
  std::vector<double> data;

  static CellField zeros(int n_cells, int n_comp, double dx, double time = 0.0) {
    CellField f;
    f.n_cells = n_cells;
    f.n_comp = n_comp;
    f.dx = dx;
    f.time = time;
    f.data.assign(static_cast<std::size_t>(n_cells) * n_comp, 0.0);
    return f;
  }

  double& at(int cell, int comp) { return data[static_cast<std::size_t>(cell) * n_comp + comp]; }
  double at(int cell, int comp) const {
    return data[static_cast<std::size_t>(cell) * n_comp + comp];
  }

  State state(int cell) const {
    State s(n_comp);
    for (int c = 0; c < n_comp; ++c) s[c] = at(cell, c);
    return s;
  }
  void set_state(int cell, const State& s) {
    for (int c = 0; c < n_comp; ++c) at(cell, c) = s[c];
  }

  bool all_finite() const {
    for (double v : data)
      if (!std::isfinite(v)) return false;
    return true;
  }
};

/// Per-component totals sum_i Q_i dx (the discretely conserved quantities).
inline State totals(const CellField& f) {
  State s(f.n_comp);
  for (int i = 0; i < f.n_cells; ++i)
    for (int c = 0; c < f.n_comp; ++c) s[c] += f.at(i, c) * f.dx;
  return s;
}

/// Extends a field by two ghost cells per side. Periodic wraps the domain;
/// outflow uses zero-order extrapolation. Row k of the result is logical
/// cell k - 1 (so rows 0,1 and N+2,N+3 are ghosts).
inline CellField fill_ghost(const CellField& f, BoundaryKind bc) {
  if (f.n_cells < 2) throw ConfigError("fill_ghost: need at least 2 cells");
  const int n = f.n_cells;
  CellField ext = CellField::zeros(n + 4, f.n_comp, f.dx, f.time);
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < f.n_comp; ++c) ext.at(i + 2, c) = f.at(i, c);
  for (int c = 0; c < f.n_comp; ++c) {
    if (bc == BoundaryKind::Periodic) {
      ext.at(0, c) = f.at(n - 2, c);      // Q_{-1} = Q_{N-1}
      ext.at(1, c) = f.at(n - 1, c);      // Q_0   = Q_N
      ext.at(n + 2, c) = f.at(0, c);      // Q_{N+1} = Q_1
      ext.at(n + 3, c) = f.at(1, c);      // Q_{N+2} = Q_2
    } else {
      ext.at(0, c) = f.at(0, c);          // Q_{-1} = Q_0 = Q_1
      ext.at(1, c) = f.at(0, c);
      ext.at(n + 2, c) = f.at(n - 1, c);  // Q_{N+1} = Q_{N+2} = Q_N
      ext.at(n + 3, c) = f.at(n - 1, c);
    }
  }
  return ext;
}

}  // namespace gorinn
