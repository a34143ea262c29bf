#include <catch2/catch_amalgamated.hpp>

#include "gorinn/grid.hpp"

using namespace gorinn;

TEST_CASE("make_grid produces uniform cells", "[grid]") {
  const Grid g1 = make_grid(-1.0, 1.0, 100);
  CHECK(g1.dx == Catch::Approx(0.02).epsilon(1e-14));
  CHECK(g1.cell_centers.front() == Catch::Approx(-0.99).epsilon(1e-14));
  CHECK(g1.cell_centers.back() == Catch::Approx(0.99).epsilon(1e-14));

  const Grid g2 = make_grid(0.0, 800.0, 100);
  CHECK(g2.dx == Catch::Approx(8.0).epsilon(1e-14));

  const Grid g3 = make_grid(0.0, 1.0, 5);
  REQUIRE(g3.cell_centers.size() == 5);
  CHECK(g3.cell_centers[0] == Catch::Approx(0.1).epsilon(1e-14));
  CHECK(g3.cell_centers[2] == Catch::Approx(0.5).epsilon(1e-14));
  CHECK(g3.cell_centers[4] == Catch::Approx(0.9).epsilon(1e-14));
}

TEST_CASE("make_grid rejects degenerate input", "[grid]") {
  CHECK_THROWS_AS(make_grid(0.0, 1.0, 4), ConfigError);
  CHECK_THROWS_AS(make_grid(1.0, 1.0, 10), ConfigError);
  CHECK_THROWS_AS(make_grid(2.0, 1.0, 10), ConfigError);
}

namespace {
CellField field_from(const std::vector<double>& v) {
  CellField f = CellField::zeros(static_cast<int>(v.size()), 1, 1.0);
  f.data = v;
  return f;
}
std::vector<double> column(const CellField& f) {
  std::vector<double> out;
  for (int i = 0; i < f.n_cells; ++i) out.push_back(f.at(i, 0));
  return out;
}
}  // namespace

TEST_CASE("fill_ghost periodic wraps two cells per side", "[grid]") {
  const CellField ext = fill_ghost(field_from({1, 2, 3, 4}), BoundaryKind::Periodic);
  CHECK(column(ext) == std::vector<double>{3, 4, 1, 2, 3, 4, 1, 2});
}

TEST_CASE("fill_ghost outflow extrapolates at zero order", "[grid]") {
  const CellField ext = fill_ghost(field_from({1, 2, 3, 4}), BoundaryKind::Outflow);
  CHECK(column(ext) == std::vector<double>{1, 1, 1, 2, 3, 4, 4, 4});
}

TEST_CASE("fill_ghost leaves the interior untouched", "[grid]") {
  const std::vector<double> v{0.5, -1.25, 3.75, 2.0, 9.5};
  for (auto bc : {BoundaryKind::Periodic, BoundaryKind::Outflow}) {
    const CellField ext = fill_ghost(field_from(v), bc);
    for (std::size_t i = 0; i < v.size(); ++i) CHECK(ext.at(static_cast<int>(i) + 2, 0) == v[i]);
  }
}

TEST_CASE("fill_ghost keeps constants constant under periodic wrap", "[grid]") {
  const CellField ext = fill_ghost(field_from({7.5, 7.5, 7.5, 7.5, 7.5, 7.5}), BoundaryKind::Periodic);
  for (int i = 0; i < ext.n_cells; ++i) CHECK(ext.at(i, 0) == 7.5);
}

TEST_CASE("fill_ghost needs at least two cells", "[grid]") {
  CHECK_THROWS_AS(fill_ghost(field_from({1.0}), BoundaryKind::Periodic), ConfigError);
}

TEST_CASE("totals sums component mass times dx", "[grid]") {
  CellField f = CellField::zeros(4, 2, 0.5);
  for (int i = 0; i < 4; ++i) {
    f.at(i, 0) = i + 1.0;
    f.at(i, 1) = -1.0;
  }
  const State t = totals(f);
  CHECK(t[0] == Catch::Approx(5.0));
  CHECK(t[1] == Catch::Approx(-2.0));
}
