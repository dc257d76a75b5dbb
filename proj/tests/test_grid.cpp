#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <vector>

#include "wavemap/analytic.hpp"
#include "wavemap/config.hpp"
#include "wavemap/evolver.hpp"
#include "wavemap/grid.hpp"

using namespace wavemap;

namespace {

double cubic(double r) { return 2.0 * r - 0.7 * r * r + 0.3 * r * r * r; }

FieldState cubic_state(const GridHierarchy& g) {
  return make_state(g, 0.5 * g.base_spacing(), cubic, [](double r) { return r * r; });
}

std::filesystem::path scratch_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("wavemap_test_" + name);
  std::filesystem::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("uniform hierarchy geometry") {
  const GridHierarchy g = build_uniform(32.0, 2048, 12);
  REQUIRE(g.levels.size() == 1);
  CHECK(g.finest_index() == 0);
  CHECK(g.outer_radius() == 32.0);
  CHECK(g.base_spacing() == 32.0 / 2048);
  CHECK(g.levels[0].nodes() == 2049);
  CHECK(g.levels[0].radius(2048) == 32.0);
  CHECK(g.max_depth == 12);
  CHECK_THROWS_AS(build_uniform(32.0, 15, 4), std::invalid_argument);
  CHECK_THROWS_AS(build_uniform(32.0, 2047, 4), std::invalid_argument);
  CHECK_THROWS_AS(build_uniform(-1.0, 64, 4), std::invalid_argument);
  CHECK_THROWS_AS(build_uniform(1.0, 64, 41), std::invalid_argument);
}

TEST_CASE("initial state pins the origin") {
  const GridHierarchy g = build_uniform(4.0, 64, 3);
  const FieldState s = cubic_state(g);
  CHECK(s.levels[0].u[0] == 0.0);
  CHECK(s.levels[0].v[0] == 0.0);
  CHECK(s.levels[0].u[3] == cubic(3 * g.base_spacing()));
  CHECK(s.levels[0].dt == 0.5 * g.base_spacing());
  CHECK_NOTHROW(validate(g, s));
}

TEST_CASE("midpoint interpolation is exact for cubics, including both ends") {
  const std::size_t n = 32;
  const double h = 0.25;
  std::vector<double> p(n + 1);
  for (std::size_t i = 0; i <= n; ++i) p[i] = cubic(h * static_cast<double>(i));
  for (std::size_t m = 0; m < n; ++m) {
    const double want = cubic(h * (static_cast<double>(m) + 0.5));
    CHECK(interpolate_midpoint(p, m) == doctest::Approx(want).epsilon(1e-13));
  }
  CHECK_THROWS(interpolate_midpoint(p, n));
}

TEST_CASE("refinement adds the inner half at half spacing") {
  GridHierarchy g = build_uniform(8.0, 64, 2);
  FieldState s = cubic_state(g);
  refine_in_place(g, s);
  REQUIRE(g.levels.size() == 2);
  const MeshLevel& f = g.levels[1];
  CHECK(f.index == 1);
  CHECK(f.spacing == g.base_spacing() / 2);
  CHECK(f.extent == 4.0);
  CHECK(f.intervals == 64);
  const auto& fu = s.levels[1].u;
  const auto& cu = s.levels[0].u;
  for (std::size_t i = 0; i <= 64; i += 2) CHECK(fu[i] == cu[i / 2]);
  for (std::size_t i = 1; i < 64; i += 2)
    CHECK(fu[i] == doctest::Approx(cubic(f.radius(i))).epsilon(1e-13));
  CHECK(s.levels[1].dt == s.levels[0].dt / 2);
  CHECK(s.levels[1].time == s.levels[0].time);
  CHECK_NOTHROW(validate(g, s));

  refine_in_place(g, s);
  CHECK(g.finest_index() == 2);
  CHECK_THROWS_AS(refine_in_place(g, s), DepthExhausted);

  GridHierarchy g1 = build_uniform(8.0, 64, 2);
  FieldState s1 = cubic_state(g1);
  const auto [g2, s2] = refine(g1, s1);
  CHECK(g1.levels.size() == 1);
  refine_in_place(g1, s1);
  CHECK(g2.levels.size() == 2);
  CHECK(s2.levels[1].u == s1.levels[1].u);
}

TEST_CASE("covering level and sampling") {
  GridHierarchy g = build_uniform(8.0, 64, 3);
  FieldState s = cubic_state(g);
  refine_in_place(g, s);
  refine_in_place(g, s);
  CHECK(g.covering_level(0.0) == 2);
  CHECK(g.covering_level(1.99) == 2);
  CHECK(g.covering_level(2.0) == 1);
  CHECK(g.covering_level(5.0) == 0);
  CHECK(g.covering_level(8.0) == 0);
  for (double r : {0.013, 1.0, 2.5, 7.9}) {
    CHECK(sample(g, s, r).u == doctest::Approx(cubic(r)).epsilon(1e-12));
    CHECK(sample(g, s, r).v == doctest::Approx(r * r).epsilon(1e-12));
  }
  const MeshLevel& lv = g.levels[1];
  for (std::size_t i : {0u, 5u, 64u}) CHECK(interpolate_level(lv, s.levels[1].u, lv.radius(i)) == s.levels[1].u[i]);
}

TEST_CASE("validate rejects inconsistent states") {
  GridHierarchy g = build_uniform(8.0, 64, 3);
  FieldState s = cubic_state(g);
  FieldState bad = s;
  bad.levels[0].u.pop_back();
  CHECK_THROWS_AS(validate(g, bad), std::invalid_argument);
  bad = s;
  bad.levels.clear();
  CHECK_THROWS_AS(validate(g, bad), std::invalid_argument);
}

TEST_CASE("snapshot round trip is bit exact") {
  SimConfig cfg;
  cfg.amplitude = 1.1;
  cfg.outer_radius = 8.0;
  cfg.base_points = 128;
  cfg.max_depth = 4;
  auto [g0, s0] = initial_state(cfg);
  Evolver ev(g0, s0, cfg.scheme());
  ev.advance_to(2.0);
  REQUIRE(ev.grid().levels.size() > 1);

  const auto dir = scratch_dir("snapshot");
  write_snapshot(dir / "snap", ev.grid(), ev.state(), "abc123");
  const Snapshot snap = read_snapshot(dir / "snap");
  CHECK(snap.config_hash == "abc123");
  REQUIRE(snap.grid.levels.size() == ev.grid().levels.size());
  CHECK(snap.grid.max_depth == ev.grid().max_depth);
  CHECK(snap.state.time == ev.state().time);
  for (std::size_t l = 0; l < snap.grid.levels.size(); ++l) {
    CHECK(snap.grid.levels[l].spacing == ev.grid().levels[l].spacing);
    CHECK(snap.state.levels[l].time == ev.state().levels[l].time);
    CHECK(std::memcmp(snap.state.levels[l].u.data(), ev.state().levels[l].u.data(),
                      snap.state.levels[l].u.size() * sizeof(double)) == 0);
    CHECK(std::memcmp(snap.state.levels[l].v.data(), ev.state().levels[l].v.data(),
                      snap.state.levels[l].v.size() * sizeof(double)) == 0);
  }
  CHECK_THROWS(read_snapshot(dir / "missing"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("restart from a snapshot reproduces the continuous run") {
  SimConfig cfg;
  cfg.amplitude = 0.5;
  cfg.outer_radius = 16.0;
  cfg.base_points = 256;
  cfg.adaptive = false;
  auto [g0, s0] = initial_state(cfg);

  Evolver straight(g0, s0, cfg.scheme());
  straight.advance_to(2.0);

  Evolver first(g0, s0, cfg.scheme());
  first.advance_to(1.0);
  const auto dir = scratch_dir("restart");
  write_snapshot(dir / "mid", first.grid(), first.state(), "h");
  const Snapshot snap = read_snapshot(dir / "mid");
  Evolver second(snap.grid, snap.state, cfg.scheme());
  second.advance_to(2.0);

  CHECK(second.time() == straight.time());
  CHECK(second.state().levels[0].u == straight.state().levels[0].u);
  CHECK(second.state().levels[0].v == straight.state().levels[0].v);
  std::filesystem::remove_all(dir);
}

TEST_CASE("fencepost convention and trivial states") {
  const GridHierarchy g = build_uniform(1.0, 16, 2);
  CHECK(g.levels[0].nodes() == 17);
  const GridHierarchy g2 = build_uniform(32.0, 1024, 2);
  CHECK(g2.base_spacing() == 0.03125);
  for (std::size_t i = 1; i <= 1024; ++i)
    CHECK(g2.levels[0].radius(i) - g2.levels[0].radius(i - 1) == 0.03125);

  GridHierarchy z = build_uniform(8.0, 64, 3);
  FieldState zs = make_state(z, 0.1, [](double) { return 0.0; }, [](double) { return 0.0; });
  refine_in_place(z, zs);
  for (double x : zs.levels[1].u) CHECK(x == 0.0);
  for (double x : zs.levels[1].v) CHECK(x == 0.0);
  const GridHierarchy c = build_uniform(8.0, 64, 3);
  const FieldState cs = cubic_state(c);
  CHECK(sample(c, cs, 0.0).u == 0.0);
  CHECK(sample(c, cs, 0.0).v == 0.0);
}

TEST_CASE("interpolation of the harmonic map converges at fourth order") {
  auto errors = [](std::size_t n) {
    GridHierarchy g = build_uniform(8.0, n, 2);
    FieldState s = make_state(g, 0.1, [](double r) { return analytic::static_solution(r); },
                              [](double) { return 0.0; });
    refine_in_place(g, s);
    double midpoint = 0.0, off_node = 0.0;
    const MeshLevel& f = g.levels[1];
    for (std::size_t i = 1; i < f.intervals; i += 2)
      midpoint = std::max(midpoint, std::fabs(s.levels[1].u[i] - analytic::static_solution(f.radius(i))));
    const GridHierarchy g0 = build_uniform(8.0, n, 2);
    const FieldState s0 = make_state(g0, 0.1, [](double r) { return analytic::static_solution(r); },
                                     [](double) { return 0.0; });
    for (double r = 0.0137; r < 7.9; r += 0.0731)
      off_node = std::max(off_node, std::fabs(sample(g0, s0, r).u - analytic::static_solution(r)));
    return std::pair{midpoint, off_node};
  };
  const auto [m1, o1] = errors(64);
  const auto [m2, o2] = errors(128);
  CHECK(std::log2(m1 / m2) > 3.6);
  CHECK(std::log2(o1 / o2) > 3.6);
}
