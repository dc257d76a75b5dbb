#pragma once

// Nested radial mesh hierarchy. Level k spans [0, R_0 / 2^k] with spacing
// h_0 / 2^k, so every level carries the same number of intervals. Levels are
// concentric at the origin and are never coarsened.

#include <cstddef>
#include <filesystem>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace wavemap {

struct MeshLevel {
  int index = 0;
  double spacing = 0.0;
  double extent = 0.0;
  std::size_t intervals = 0;  // nodes r_i = i * spacing, i = 0 .. intervals

  std::size_t nodes() const { return intervals + 1; }
  double radius(std::size_t i) const { return static_cast<double>(i) * spacing; }
};

struct GridHierarchy {
  std::vector<MeshLevel> levels;
  int max_depth = 20;

  int finest_index() const { return static_cast<int>(levels.size()) - 1; }
  const MeshLevel& finest() const { return levels.back(); }
  double outer_radius() const { return levels.front().extent; }
  double base_spacing() const { return levels.front().spacing; }

  /// Finest level whose half-open extent [0, R_k) contains r; level 0 also
  /// owns its outer endpoint.
  int covering_level(double r) const;
};

/// u and v = u_t on one level, with the level's own clock.
struct LevelField {
  std::vector<double> u;
  std::vector<double> v;
  double time = 0.0;
  double dt = 0.0;
};

struct FieldState {
  double time = 0.0;  // time of the finest level
  std::vector<LevelField> levels;
};

class DepthExhausted : public std::runtime_error {
 public:
  explicit DepthExhausted(int depth)
      : std::runtime_error("maximum refinement depth " + std::to_string(depth) + " reached"),
        depth_(depth) {}
  int depth() const { return depth_; }

 private:
  int depth_;
};

/// Single-level hierarchy on [0, outer_radius] with base_points intervals.
/// base_points must be even and at least 16.
GridHierarchy build_uniform(double outer_radius, std::size_t base_points, int max_depth = 20);

/// Fills level 0 from profiles of r; node 0 is forced to (0, 0).
FieldState make_state(const GridHierarchy& grid, double dt0,
                      const std::function<double(double)>& u0,
                      const std::function<double(double)>& v0);

/// Value at the midpoint between parent nodes m and m+1 (cubic, one-sided at
/// the origin).
double interpolate_midpoint(std::span<const double> parent, std::size_t m);

/// Adds a level on the inner half of the finest extent at half the spacing,
/// interpolating u and v from the parent. Throws DepthExhausted at max depth.
void refine_in_place(GridHierarchy& grid, FieldState& state);

std::pair<GridHierarchy, FieldState> refine(const GridHierarchy& grid, const FieldState& state);

/// Cubic Lagrange interpolation of nodal values on one level. Nodes return
/// their stored value exactly.
double interpolate_level(const MeshLevel& level, std::span<const double> values, double r);

struct FieldSample {
  double u = 0.0;
  double v = 0.0;
};

/// Evaluates (u, v) at r on the finest level covering r.
FieldSample sample(const GridHierarchy& grid, const FieldState& state, double r);

/// Checks geometric consistency of a hierarchy with its state; throws
/// std::invalid_argument describing the first violation.
void validate(const GridHierarchy& grid, const FieldState& state);

// Snapshot files: <stem>.json (time, per-level geometry and clocks) and
// <stem>.csv (columns level,r,u,v). Doubles are written in shortest
// round-trip form, so import reproduces the state bit for bit.

struct Snapshot {
  GridHierarchy grid;
  FieldState state;
  std::string config_hash;
};

void write_snapshot(const std::filesystem::path& stem, const GridHierarchy& grid,
                    const FieldState& state, const std::string& config_hash);

Snapshot read_snapshot(const std::filesystem::path& stem);

}  // namespace wavemap
