#include "wavemap/grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "wavemap/io.hpp"

namespace wavemap {

using nlohmann::json;

int GridHierarchy::covering_level(double r) const {
  for (int k = finest_index(); k > 0; --k) {
    if (r < levels[static_cast<std::size_t>(k)].extent) return k;
  }
  return 0;
}

GridHierarchy build_uniform(double outer_radius, std::size_t base_points, int max_depth) {
  if (!(outer_radius > 0.0) || !std::isfinite(outer_radius)) {
    throw std::invalid_argument("build_uniform: outer_radius must be positive");
  }
  if (base_points < 16) throw std::invalid_argument("build_uniform: base_points must be >= 16");
  if (base_points % 2 != 0) throw std::invalid_argument("build_uniform: base_points must be even");
  if (max_depth < 0 || max_depth > 40) {
    throw std::invalid_argument("build_uniform: max_depth must lie in [0, 40]");
  }
  GridHierarchy grid;
  grid.max_depth = max_depth;
  grid.levels.push_back(MeshLevel{0, outer_radius / static_cast<double>(base_points),
                                  outer_radius, base_points});
  return grid;
}

FieldState make_state(const GridHierarchy& grid, double dt0,
                      const std::function<double(double)>& u0,
                      const std::function<double(double)>& v0) {
  if (grid.levels.size() != 1) throw std::invalid_argument("make_state: expects a uniform grid");
  if (!(dt0 > 0.0)) throw std::invalid_argument("make_state: dt0 must be positive");
  const MeshLevel& lv = grid.levels.front();
  LevelField f;
  f.u.resize(lv.nodes());
  f.v.resize(lv.nodes());
  f.dt = dt0;
  for (std::size_t i = 1; i < lv.nodes(); ++i) {
    const double r = lv.radius(i);
    f.u[i] = u0(r);
    f.v[i] = v0(r);
  }
  f.u[0] = 0.0;
  f.v[0] = 0.0;
  FieldState state;
  state.levels.push_back(std::move(f));
  return state;
}

double interpolate_midpoint(std::span<const double> p, std::size_t m) {
  if (m + 1 >= p.size()) throw std::out_of_range("interpolate_midpoint: index past the end");
  if (m == 0) {
    if (p.size() < 4) throw std::out_of_range("interpolate_midpoint: need 4 nodes");
    return (5.0 * p[0] + 15.0 * p[1] - 5.0 * p[2] + p[3]) / 16.0;
  }
  if (m + 2 >= p.size()) {
    // one-sided at the far end: nodes m-2 .. m+1
    return (p[m - 2] - 5.0 * p[m - 1] + 15.0 * p[m] + 5.0 * p[m + 1]) / 16.0;
  }
  return (-p[m - 1] + 9.0 * p[m] + 9.0 * p[m + 1] - p[m + 2]) / 16.0;
}

namespace {

std::vector<double> prolong(std::span<const double> parent, std::size_t fine_intervals) {
  std::vector<double> fine(fine_intervals + 1);
  for (std::size_t j = 0; j <= fine_intervals; ++j) {
    const std::size_t m = j / 2;
    fine[j] = (j % 2 == 0) ? parent[m] : interpolate_midpoint(parent, m);
  }
  return fine;
}

}  // namespace

void refine_in_place(GridHierarchy& grid, FieldState& state) {
  if (grid.finest_index() >= grid.max_depth) throw DepthExhausted(grid.max_depth);
  if (state.levels.size() != grid.levels.size()) {
    throw std::invalid_argument("refine: state and grid level counts differ");
  }
  const MeshLevel parent = grid.finest();
  if (parent.intervals % 2 != 0 || parent.intervals < 4) {
    throw std::invalid_argument("refine: parent interval count must be even and >= 4");
  }
  MeshLevel child{parent.index + 1, parent.spacing / 2.0, parent.extent / 2.0, parent.intervals};
  const LevelField& pf = state.levels.back();
  LevelField cf;
  cf.u = prolong(pf.u, child.intervals);
  cf.v = prolong(pf.v, child.intervals);
  cf.u[0] = 0.0;
  cf.v[0] = 0.0;
  cf.time = pf.time;
  cf.dt = pf.dt / 2.0;
  grid.levels.push_back(child);
  state.levels.push_back(std::move(cf));
  state.time = state.levels.back().time;
}

std::pair<GridHierarchy, FieldState> refine(const GridHierarchy& grid, const FieldState& state) {
  GridHierarchy g = grid;
  FieldState s = state;
  refine_in_place(g, s);
  return {std::move(g), std::move(s)};
}

double interpolate_level(const MeshLevel& level, std::span<const double> values, double r) {
  if (values.size() != level.nodes()) throw std::invalid_argument("interpolate_level: size mismatch");
  if (!(r >= 0.0) || r > level.extent) throw std::out_of_range("interpolate_level: r outside level");
  const double s = r / level.spacing;
  const double nearest = std::round(s);
  if (std::fabs(s - nearest) <= 1e-12 * std::max(1.0, s)) {
    return values[static_cast<std::size_t>(nearest)];
  }
  const auto n = static_cast<std::ptrdiff_t>(level.intervals);
  auto start = static_cast<std::ptrdiff_t>(std::floor(s)) - 1;
  start = std::clamp<std::ptrdiff_t>(start, 0, n - 3);
  const double x = s - static_cast<double>(start);
  const double w0 = -(x - 1.0) * (x - 2.0) * (x - 3.0) / 6.0;
  const double w1 = x * (x - 2.0) * (x - 3.0) / 2.0;
  const double w2 = -x * (x - 1.0) * (x - 3.0) / 2.0;
  const double w3 = x * (x - 1.0) * (x - 2.0) / 6.0;
  const auto i = static_cast<std::size_t>(start);
  return w0 * values[i] + w1 * values[i + 1] + w2 * values[i + 2] + w3 * values[i + 3];
}

FieldSample sample(const GridHierarchy& grid, const FieldState& state, double r) {
  if (!(r >= 0.0) || !(r < grid.outer_radius())) {
    throw std::out_of_range("sample: r outside [0, outer radius)");
  }
  if (r == 0.0) return {0.0, 0.0};
  const int k = grid.covering_level(r);
  const MeshLevel& lv = grid.levels[static_cast<std::size_t>(k)];
  const LevelField& f = state.levels[static_cast<std::size_t>(k)];
  return {interpolate_level(lv, f.u, r), interpolate_level(lv, f.v, r)};
}

void validate(const GridHierarchy& grid, const FieldState& state) {
  if (grid.levels.empty()) throw std::invalid_argument("grid has no levels");
  if (state.levels.size() != grid.levels.size()) {
    throw std::invalid_argument("state has " + std::to_string(state.levels.size()) +
                                " levels, grid has " + std::to_string(grid.levels.size()));
  }
  const MeshLevel& base = grid.levels.front();
  for (std::size_t k = 0; k < grid.levels.size(); ++k) {
    const MeshLevel& lv = grid.levels[k];
    const double scale = std::ldexp(1.0, -static_cast<int>(k));
    if (lv.index != static_cast<int>(k) || lv.spacing != base.spacing * scale ||
        lv.extent != base.extent * scale || lv.intervals != base.intervals) {
      throw std::invalid_argument("level " + std::to_string(k) + " breaks the nesting law");
    }
    const LevelField& f = state.levels[k];
    if (f.u.size() != lv.nodes() || f.v.size() != lv.nodes()) {
      throw std::invalid_argument("level " + std::to_string(k) + " field size mismatch");
    }
    if (f.u[0] != 0.0 || f.v[0] != 0.0) {
      throw std::invalid_argument("level " + std::to_string(k) + " violates u(0)=v(0)=0");
    }
    if (f.dt != state.levels.front().dt * scale) {
      throw std::invalid_argument("level " + std::to_string(k) + " time step is not dt0/2^k");
    }
  }
}

void write_snapshot(const std::filesystem::path& stem, const GridHierarchy& grid,
                    const FieldState& state, const std::string& config_hash) {
  validate(grid, state);
  json header;
  header["format"] = "wavemap-snapshot";
  header["version"] = 1;
  header["config_hash"] = config_hash;
  header["time"] = io::format_double(state.time);
  header["max_depth"] = grid.max_depth;
  json levels = json::array();
  for (std::size_t k = 0; k < grid.levels.size(); ++k) {
    const MeshLevel& lv = grid.levels[k];
    levels.push_back({{"level", lv.index},
                      {"spacing", io::format_double(lv.spacing)},
                      {"extent", io::format_double(lv.extent)},
                      {"intervals", lv.intervals},
                      {"time", io::format_double(state.levels[k].time)},
                      {"dt", io::format_double(state.levels[k].dt)}});
  }
  header["levels"] = levels;

  std::string csv;
  csv.reserve(grid.levels.size() * grid.levels.front().nodes() * 64);
  csv += "level,r,u,v\n";
  for (std::size_t k = 0; k < grid.levels.size(); ++k) {
    const MeshLevel& lv = grid.levels[k];
    const LevelField& f = state.levels[k];
    const std::string lk = std::to_string(k);
    for (std::size_t i = 0; i < lv.nodes(); ++i) {
      csv += lk;
      csv += ',';
      csv += io::format_double(lv.radius(i));
      csv += ',';
      csv += io::format_double(f.u[i]);
      csv += ',';
      csv += io::format_double(f.v[i]);
      csv += '\n';
    }
  }
  std::filesystem::path jpath = stem;
  jpath += ".json";
  std::filesystem::path cpath = stem;
  cpath += ".csv";
  io::write_text_file(jpath, header.dump(2) + "\n");
  io::write_text_file(cpath, csv);
}

Snapshot read_snapshot(const std::filesystem::path& stem) {
  std::filesystem::path jpath = stem;
  jpath += ".json";
  std::filesystem::path cpath = stem;
  cpath += ".csv";
  const json header = json::parse(io::read_text_file(jpath));
  if (header.value("format", "") != "wavemap-snapshot") {
    throw std::invalid_argument("not a wavemap snapshot: " + jpath.string());
  }
  Snapshot snap;
  snap.config_hash = header.value("config_hash", "");
  snap.grid.max_depth = header.at("max_depth").get<int>();
  snap.state.time = io::parse_double(header.at("time").get<std::string>());
  for (const json& l : header.at("levels")) {
    MeshLevel lv;
    lv.index = l.at("level").get<int>();
    lv.spacing = io::parse_double(l.at("spacing").get<std::string>());
    lv.extent = io::parse_double(l.at("extent").get<std::string>());
    lv.intervals = l.at("intervals").get<std::size_t>();
    snap.grid.levels.push_back(lv);
    LevelField f;
    f.time = io::parse_double(l.at("time").get<std::string>());
    f.dt = io::parse_double(l.at("dt").get<std::string>());
    f.u.assign(lv.nodes(), 0.0);
    f.v.assign(lv.nodes(), 0.0);
    snap.state.levels.push_back(std::move(f));
  }

  const std::string csv = io::read_text_file(cpath);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  if (line != "level,r,u,v") throw std::invalid_argument("snapshot csv: unexpected header");
  std::vector<std::size_t> filled(snap.grid.levels.size(), 0);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::string_view sv(line);
    std::string_view cols[4];
    for (int c = 0; c < 4; ++c) {
      const auto comma = sv.find(',');
      if ((c < 3) == (comma == std::string_view::npos)) {
        throw std::invalid_argument("snapshot csv line " + std::to_string(lineno) +
                                    ": expected 4 columns");
      }
      cols[c] = sv.substr(0, comma);
      sv = c < 3 ? sv.substr(comma + 1) : std::string_view{};
    }
    const auto k = static_cast<std::size_t>(std::stoul(std::string(cols[0])));
    if (k >= snap.grid.levels.size()) {
      throw std::invalid_argument("snapshot csv line " + std::to_string(lineno) + ": bad level");
    }
    std::size_t& i = filled[k];
    const MeshLevel& lv = snap.grid.levels[k];
    if (i >= lv.nodes() || io::parse_double(cols[1]) != lv.radius(i)) {
      throw std::invalid_argument("snapshot csv line " + std::to_string(lineno) +
                                  ": node radius does not match the header geometry");
    }
    snap.state.levels[k].u[i] = io::parse_double(cols[2]);
    snap.state.levels[k].v[i] = io::parse_double(cols[3]);
    ++i;
  }
  for (std::size_t k = 0; k < filled.size(); ++k) {
    if (filled[k] != snap.grid.levels[k].nodes()) {
      throw std::invalid_argument("snapshot csv: level " + std::to_string(k) + " incomplete");
    }
  }
  validate(snap.grid, snap.state);
  return snap;
}

}  // namespace wavemap
