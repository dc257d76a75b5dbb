// wavemap: command-line front end.
//
// Exit codes: 0 success, 1 failed check or runtime error, 2 invalid input or
// unmet precondition, 3 bisection aborted on an inconclusive probe,
// 4 bisection aborted on a bracket inversion.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wavemap/analytic.hpp"
#include "wavemap/config.hpp"
#include "wavemap/experiments.hpp"
#include "wavemap/io.hpp"
#include "wavemap/selfcheck.hpp"

namespace fs = std::filesystem;
using namespace wavemap;

namespace {

enum Exit { kOk = 0, kFailed = 1, kInvalid = 2, kInconclusive = 3, kInversion = 4 };

struct Common {
  std::string config;
  std::string out;
  int jobs = 1;
  int max_depth = -1;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* app, Common& c, bool config_required) {
  auto* opt = app->add_option("--config", c.config, "JSON configuration file");
  if (config_required) opt->required()->check(CLI::ExistingFile);
  app->add_option("--out", c.out, "output directory (overrides output_dir)");
  app->add_option("--max-depth", c.max_depth, "maximum refinement depth")->check(CLI::Range(0, 40));
  app->add_option("--override", c.overrides, "set a config field, key=value (repeatable)");
}

SimConfig resolve_config(const Common& c) {
  SimConfig cfg = load_config(c.config);
  for (const std::string& kv : c.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw std::invalid_argument("--override expects key=value, got '" + kv + "'");
    }
    cfg.set_field(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (c.max_depth >= 0) cfg.max_depth = c.max_depth;
  if (!c.out.empty()) cfg.output_dir = c.out;
  cfg.validate();
  return cfg;
}

std::string header(const std::string& kind, const std::string& hash) {
  return "# wavemap " + kind + " schema=1 config_hash=" + hash + "\n";
}

std::string json_text(const nlohmann::json& j) { return j.dump(2) + "\n"; }

using io::format_double;

std::string refinements_csv(const RunOutcome& o, const std::string& hash) {
  std::string s = header("refinements", hash) + "level,t,lambda,sign,profile_error\n";
  for (const RefinementSample& r : o.refinement_samples) {
    s += std::to_string(r.level) + ',' + format_double(r.t) + ',' + format_double(r.lambda) + ',' +
         std::to_string(r.sign) + ',' + format_double(r.profile_error) + '\n';
  }
  return s;
}

std::string profiles_csv(const RunOutcome& o, const std::string& hash) {
  std::string s = header("rescaled-profile", hash) + "level,t,lambda,sign,eta,u_rescaled,u_static\n";
  for (const RefinementSample& r : o.refinement_samples) {
    for (const auto& row : r.profile) {
      s += std::to_string(r.level) + ',' + format_double(r.t) + ',' + format_double(r.lambda) + ',' +
           std::to_string(r.sign) + ',' + format_double(row[0]) + ',' + format_double(row[1]) + ',' +
           format_double(row[2]) + '\n';
    }
  }
  return s;
}

std::string rate_csv(const DiagnosticsSeries& series, double T, const std::string& hash) {
  std::string s = header("rate", hash) + "t,lambda,T_minus_t,ratio\n";
  for (const DiagnosticsRecord& r : series.records()) {
    if (!std::isfinite(r.lambda) || !(T > r.t)) continue;
    s += format_double(r.t) + ',' + format_double(r.lambda) + ',' + format_double(T - r.t) + ',' +
         format_double(r.lambda / (T - r.t)) + '\n';
  }
  return s;
}

int cmd_evolve(const Common& c) {
  const SimConfig cfg = resolve_config(c);
  const std::string hash = cfg.hash();
  const fs::path out = cfg.output_dir;
  const SnapshotSink sink = [&](const std::string& tag, const GridHierarchy& g, const FieldState& s) {
    write_snapshot(out / "snapshots" / tag, g, s, hash);
  };
  const RunOutcome o = run(cfg, sink);
  write_snapshot(out / "snapshots" / "final", o.final_grid, o.final_state, hash);
  io::write_text_file(out / "diagnostics.csv", o.diagnostics.to_csv(hash));
  io::write_text_file(out / "refinements.csv", refinements_csv(o, hash));
  io::write_text_file(out / "profiles.csv", profiles_csv(o, hash));
  if (o.kind == OutcomeKind::Blowup) {
    io::write_text_file(out / "rate.csv", rate_csv(o.diagnostics, o.T_est, hash));
  }
  io::write_text_file(out / "outcome.json", json_text(outcome_json(o, cfg)));

  std::cout << to_string(o.kind) << ": " << o.reason << "\n";
  if (o.kind == OutcomeKind::Dispersal && std::isfinite(o.lambda_min)) {
    std::cout << "  t_bounce=" << format_double(o.t_bounce)
              << " lambda_min=" << format_double(o.lambda_min) << "\n";
  }
  if (o.kind == OutcomeKind::Blowup) {
    std::cout << "  T_est=" << format_double(o.T_est);
    if (o.fit) std::cout << " alpha=" << format_double(o.fit->alpha);
    std::cout << " lambda_last=" << format_double(o.lambda_last) << "\n";
  }
  std::cout << "  artifacts in " << out.string() << " (config_hash " << hash << ")\n";
  return kOk;
}

int cmd_bisect(const Common& c, double lo, double hi, double tol) {
  const SimConfig cfg = resolve_config(c);
  const fs::path out = cfg.output_dir;
  const ProbeFn probe = [&cfg, &out](double amplitude) {
    SimConfig p = cfg;
    p.amplitude = amplitude;
    p.stop_on_dispersal = true;
    p.snapshot_times.clear();
    p.snapshot_at_refinement = false;
    const RunOutcome o = run(p);
    io::write_text_file(out / "probes" / ("A" + format_double(amplitude) + ".csv"),
                        o.diagnostics.to_csv(p.hash()));
    return probe_from_outcome(amplitude, o);
  };
  auto write = [&](const BisectionResult& r, const std::string& status) {
    nlohmann::json j = bisection_json(r, cfg);
    j["status"] = status;
    io::write_text_file(out / "bisection.json", json_text(j));
  };
  try {
    const BisectionResult r = bisect_critical_amplitude(lo, hi, tol, probe, c.jobs);
    write(r, "ok");
    std::cout << "A* in [" << format_double(r.lo) << ", " << format_double(r.hi) << "] after "
              << r.interior_probes() << " probes\n";
    return kOk;
  } catch (const BisectionPrecondition& e) {
    std::cerr << "precondition failed: " << e.what() << "\n";
    return kInvalid;
  } catch (const InconclusiveProbe& e) {
    write(e.partial(), "aborted: " + std::string(e.what()));
    std::cerr << e.what() << "\n";
    return kInconclusive;
  } catch (const BracketInversion& e) {
    write(e.partial(), "aborted: " + std::string(e.what()));
    std::cerr << e.what() << "\n";
    return kInversion;
  }
}

// Reads columns t and lambda from a CSV with a header row; '#' lines are
// comments. Returns the config hash found in a comment, if any.
std::string read_series(const std::string& path, std::vector<double>& t, std::vector<double>& l) {
  std::istringstream in(io::read_text_file(path));
  std::string line, hash;
  int ct = -1, cl = -1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto p = line.find("config_hash=");
      if (p != std::string::npos) hash = line.substr(p + 12);
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (ct < 0) {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (cells[i] == "t") ct = static_cast<int>(i);
        if (cells[i] == "lambda") cl = static_cast<int>(i);
      }
      if (ct < 0 || cl < 0) throw std::invalid_argument(path + ": header lacks columns t and lambda");
      continue;
    }
    if (static_cast<int>(cells.size()) <= std::max(ct, cl)) {
      throw std::invalid_argument(path + ": short row '" + line + "'");
    }
    t.push_back(io::parse_double(cells[static_cast<std::size_t>(ct)]));
    l.push_back(io::parse_double(cells[static_cast<std::size_t>(cl)]));
  }
  return hash;
}

int cmd_fit(const std::string& series, const std::string& out_dir, const FitWindow& w) {
  std::vector<double> t, l;
  const std::string source_hash = read_series(series, t, l);
  const std::string series_hash = io::hex64(io::fnv1a64(io::read_text_file(series)));
  const PowerLawFit fit = fit_power_law(t, l, w);
  nlohmann::json j = to_json(fit);
  j["format"] = "wavemap-fit";
  j["config_hash"] = source_hash;
  j["series_hash"] = series_hash;
  j["window"] = {{"lambda_max", w.lambda_max}, {"lambda_min", w.lambda_min}};
  const fs::path out = out_dir;
  io::write_text_file(out / "fit.json", json_text(j));
  std::string csv = header("fit-rate", source_hash) + "t,lambda,T_minus_t,model\n";
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!std::isfinite(l[i]) || !(fit.T > t[i])) continue;
    csv += format_double(t[i]) + ',' + format_double(l[i]) + ',' + format_double(fit.T - t[i]) + ',' +
           format_double(fit.prefactor * std::pow(fit.T - t[i], fit.alpha)) + '\n';
  }
  io::write_text_file(out / "fit_rate.csv", csv);
  std::cout << "T=" << format_double(fit.T) << " alpha=" << format_double(fit.alpha)
            << " residual=" << format_double(fit.residual) << " samples=" << fit.samples << "\n";
  return kOk;
}

int cmd_converge(const Common& c, double t_eval) {
  const SimConfig cfg = resolve_config(c);
  const ConvergenceResult r = convergence_study(cfg, t_eval);
  io::write_text_file(fs::path(cfg.output_dir) / "convergence.json",
                      json_text(convergence_json(r, cfg)));
  std::cout << "order=" << format_double(r.order) << " diffs=" << format_double(r.diff_coarse)
            << "," << format_double(r.diff_fine);
  if (r.flagged) std::cout << " FLAGGED: " << r.note;
  std::cout << "\n";
  return r.flagged ? kFailed : kOk;
}

int cmd_analytic_check(const std::string& out_dir) {
  const std::vector<CheckResult> checks = analytic_checks();
  bool all = true;
  nlohmann::json arr = nlohmann::json::array();
  for (const CheckResult& r : checks) {
    std::printf("%s %-32s value=%-12.4g bound=%-10.3g %s\n", r.passed ? "PASS" : "FAIL",
                r.name.c_str(), r.value, r.threshold, r.detail.c_str());
    all = all && r.passed;
    arr.push_back({{"name", r.name},
                   {"value", r.value},
                   {"threshold", r.threshold},
                   {"passed", r.passed},
                   {"detail", r.detail}});
  }
  if (!out_dir.empty()) {
    io::write_text_file(fs::path(out_dir) / "analytic_check.json",
                        json_text({{"format", "wavemap-analytic-check"}, {"checks", arr}}));
  }
  return all ? kOk : kFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"wavemap: equivariant wave maps into S^2 in 2+1 dimensions"};
  app.require_subcommand(1);

  Common evolve_opts;
  auto* evolve = app.add_subcommand("evolve", "run one configuration and write its artifacts");
  add_common(evolve, evolve_opts, true);

  Common bisect_opts;
  double lo = 0.5, hi = 1.5, tol = 1e-2;
  auto* bisect = app.add_subcommand("bisect", "bracket the critical amplitude");
  add_common(bisect, bisect_opts, true);
  bisect->add_option("--jobs", bisect_opts.jobs, "concurrent probes per round")
      ->check(CLI::Range(1, 256));
  bisect->add_option("--lo", lo, "dispersing amplitude")->capture_default_str();
  bisect->add_option("--hi", hi, "blowup amplitude")->capture_default_str();
  bisect->add_option("--tol", tol, "bracket width to reach")->capture_default_str();

  std::string series, fit_out = ".";
  FitWindow window;
  auto* fit = app.add_subcommand("fit", "fit lambda = c (T - t)^alpha to a series");
  fit->add_option("--series", series, "CSV with columns t and lambda")
      ->required()
      ->check(CLI::ExistingFile);
  fit->add_option("--out", fit_out, "output directory")->capture_default_str();
  fit->add_option("--lambda-max", window.lambda_max, "upper end of the fit window (0: none)");
  fit->add_option("--lambda-min", window.lambda_min, "lower end of the fit window (0: none)");

  Common conv_opts;
  double t_eval = 1.0;
  auto* converge = app.add_subcommand("converge", "three-resolution self-convergence study");
  add_common(converge, conv_opts, true);
  converge->add_option("--t", t_eval, "comparison time")->capture_default_str();

  std::string check_out;
  auto* check = app.add_subcommand("analytic-check", "run the analytic oracle suite");
  check->add_option("--out", check_out, "directory for analytic_check.json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kInvalid;
  }

  try {
    if (*evolve) return cmd_evolve(evolve_opts);
    if (*bisect) return cmd_bisect(bisect_opts, lo, hi, tol);
    if (*fit) return cmd_fit(series, fit_out, window);
    if (*converge) return cmd_converge(conv_opts, t_eval);
    if (*check) return cmd_analytic_check(check_out);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalid;
  } catch (const InsufficientDecade& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalid;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailed;
  }
  return kFailed;
}
