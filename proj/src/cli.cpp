#include "rstar/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <functional>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "rstar/serialize.hpp"
#include "rstar/threebody.hpp"
#include "rstar/twobody.hpp"

namespace rstar::cli {

namespace {

using nlohmann::json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Rows of JSON scalars under a fixed header; null marks a missing field.
struct Table {
  std::vector<std::string> header;
  std::vector<json> rows;
};

std::string render_cell(const json& v) {
  if (v.is_null()) return "";
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw Error(ErrorCode::NonFinite, "non-finite value in output");
  return format_double(x);
}

std::string to_csv(const Table& t) {
  std::string s;
  for (std::size_t i = 0; i < t.header.size(); ++i) {
    if (i) s += ',';
    s += t.header[i];
  }
  s += '\n';
  for (const json& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) s += ',';
      s += render_cell(row[i]);
    }
    s += '\n';
  }
  return s;
}

json to_records(const Table& t) {
  json out = json::array();
  for (const json& row : t.rows) {
    json rec = json::object();
    for (std::size_t i = 0; i < t.header.size(); ++i) {
      if (!row[i].is_null()) rec[t.header[i]] = row[i];
    }
    out.push_back(rec);
  }
  return out;
}

json optional_value(double x) { return x > 0.0 ? json(x) : json(nullptr); }

const CLI::Validator kFinite(
    [](std::string& s) -> std::string {
      char* end = nullptr;
      const double x = std::strtod(s.c_str(), &end);
      if (end == s.c_str() || *end != '\0') return "not a number: " + s;
      if (!std::isfinite(x)) return "value must be finite: " + s;
      return {};
    },
    "FINITE");

struct Output {
  std::string format;
  std::string path;
};

// The flags are shared by all subcommands; the per-command default format is
// filled in by the callback of the command that ran.
void add_output_flags(CLI::App* sub, Output& o, const std::string& default_format) {
  sub->add_option("--format", o.format, "Output format (default " + default_format + ")")
      ->check(CLI::IsMember({"csv", "json"}));
  sub->add_option("-o,--output", o.path, "Write to this file instead of stdout");
}

void add_params(CLI::App* sub, ResonanceParams& p) {
  sub->add_option("--inv-a", p.inv_a, "Inverse scattering length 1/a")
      ->check(kFinite)
      ->capture_default_str();
  sub->add_option("--rstar", p.r_star, "Resonance width parameter R*")
      ->check(kFinite)
      ->capture_default_str();
}

std::string dimer_command(const ResonanceParams& p, const Output& o) {
  const DimerSolution d = dimer_observables(p);
  if (o.format == "json") return dump_finite(json(d), 2) + "\n";
  Table t{{"inv_a", "r_star", "kappa", "energy", "n_mol", "c4", "c6"},
          {json::array({d.params.inv_a, d.params.r_star, d.kappa, d.energy, d.n_mol, d.c4,
                        d.c6})}};
  return to_csv(t);
}

struct AmplitudeArgs {
  ResonanceParams p;
  double k_min = 0.0;
  double k_max = 0.0;
  int n = 0;
  std::string spacing = "linear";
};

std::string amplitude_command(const AmplitudeArgs& a, const Output& o) {
  const bool regularized = a.p.epsilon > 0.0;
  validate_params(a.p, regularized ? SolverKind::Regularized : SolverKind::TwoBody);
  if (!(a.k_min >= 0.0) || !(a.k_max >= a.k_min) || a.n < 1) {
    throw Error(ErrorCode::BadRange, "need 0 <= k_min <= k_max and n >= 1");
  }
  const bool log_spacing = a.spacing == "log";
  if (log_spacing && !(a.k_min > 0.0)) {
    throw Error(ErrorCode::BadRange, "log spacing needs k_min > 0");
  }
  Table t{{"k", "re_f0", "im_f0"}, {}};
  if (regularized) {
    t.header.push_back("re_f_eps");
    t.header.push_back("im_f_eps");
  }
  for (int i = 0; i < a.n; ++i) {
    const double frac = a.n == 1 ? 0.0 : static_cast<double>(i) / (a.n - 1);
    const double k = log_spacing ? a.k_min * std::pow(a.k_max / a.k_min, frac)
                                 : a.k_min + frac * (a.k_max - a.k_min);
    const auto f = f0(k, a.p);
    json row = json::array({k, f.real(), f.imag()});
    if (regularized) {
      const auto fe = f_eps(k, a.p);
      row.push_back(fe.real());
      row.push_back(fe.imag());
    }
    t.rows.push_back(row);
  }
  return o.format == "json" ? dump_finite(to_records(t), 2) + "\n" : to_csv(t);
}

struct SpectrumArgs {
  ResonanceParams p;
  int levels = 3;
  int n_points = 300;
  double k_min = 0.0;
  double k_max = 0.0;
  double q_min = 0.0;
  double q_max = 0.0;
  double ladder_ratio = 1.2;
};

RadialGrid spectrum_grid(const SpectrumArgs& a) {
  if (a.k_min > 0.0 || a.k_max > 0.0) {
    const RadialGrid fallback = default_spectrum_grid(a.p, a.levels, a.n_points);
    return build_log_gauss_grid(a.n_points, a.k_min > 0.0 ? a.k_min : fallback.k_min,
                                a.k_max > 0.0 ? a.k_max : fallback.k_max);
  }
  return default_spectrum_grid(a.p, a.levels, a.n_points);
}

// Writes what was found; an incomplete search is reported after the data.
std::string spectrum_command(const SpectrumArgs& a, const Output& o, std::string& warning) {
  validate_params(a.p, SolverKind::ThreeBody);
  if (a.levels < 1) throw UsageError("--levels must be >= 1");
  LevelSearchOptions opts;
  opts.q_min = a.q_min;
  opts.q_max = a.q_max;
  opts.ladder_ratio = a.ladder_ratio;
  const LevelSearch search = solve_levels(a.p, spectrum_grid(a), a.levels, opts);
  if (!search.complete()) {
    warning = std::string(to_string(ErrorCode::FewerLevelsFound)) + ": found " +
              std::to_string(search.levels.size()) + " of " + std::to_string(a.levels) +
              " levels";
  }
  if (o.format == "json") return dump_finite(json(search.levels), 2) + "\n";
  Table t{{"index", "q", "energy"}, {}};
  for (const TrimerLevel& l : search.levels) t.rows.push_back(json::array({l.index, l.q, l.energy}));
  return to_csv(t);
}

struct NkArgs {
  ResonanceParams p;
  int level = 0;
  LevelAnalysisOptions analysis;
};

std::string nk_command(const NkArgs& a, const Output& o) {
  if (a.level < 0) throw UsageError("--level must be >= 0");
  const LevelAnalysis r = analyze_level(a.p, a.level, a.analysis);
  const StmSolution& sol = r.solution;
  const MomentumDistribution& dist = r.distribution;

  json footer = {
      {"index", sol.level.index},
      {"q", sol.level.q},
      {"energy", sol.level.energy},
      {"c4_fit", dist.c4_fit},
      {"c6_fit", dist.c6_fit},
      {"c4_contact", 8.0 * std::numbers::pi * sol.n_mol / a.p.r_star},
      {"c6_contact", dist.c6_contact_spectator},
      {"fit_k_lo", dist.fit_window.first},
      {"fit_k_hi", dist.fit_window.second},
      {"n_mol", sol.n_mol},
      {"k_mol", sol.k_mol},
      {"norm_integral", dist.norm_integral},
      {"sum_rule_residual", dist.sum_rule_residual},
      {"energy_residual", r.energy_residual},
  };
  Table t{{"k", "n_k"}, {}};
  for (std::size_t i = 0; i < dist.k_samples.size(); ++i) {
    t.rows.push_back(json::array({dist.k_samples[i], dist.values[i]}));
  }
  if (o.format == "json") {
    return dump_finite(json{{"samples", to_records(t)}, {"summary", footer}}, 2) + "\n";
  }
  return to_csv(t) + dump_finite(footer) + "\n";
}

struct ScanArgs {
  double inv_a_from = 0.0;
  double inv_a_to = 0.0;
  int steps = 0;
  double r_star = 1.0;
  int levels = 2;
  int n_points = 300;
  int threads = 1;
};

std::string scan_command(const ScanArgs& a, const Output& o) {
  if (a.steps < 1) throw UsageError("--steps must be >= 1");
  if (a.levels < 1) throw UsageError("--levels must be >= 1");
  if (a.threads < 1) throw UsageError("--threads must be >= 1");
  validate_params({a.inv_a_from, a.r_star, 0.0}, SolverKind::ThreeBody);

  std::vector<double> inv_a(a.steps);
  for (int i = 0; i < a.steps; ++i) {
    const double frac = a.steps == 1 ? 0.0 : static_cast<double>(i) / (a.steps - 1);
    inv_a[i] = a.inv_a_from + frac * (a.inv_a_to - a.inv_a_from);
  }
  std::vector<LevelSearch> results(a.steps);
  std::vector<std::exception_ptr> failures(a.steps);
  auto work = [&](int first) {
    for (int i = first; i < a.steps; i += a.threads) {
      try {
        const ResonanceParams p{inv_a[i], a.r_star, 0.0};
        results[i] = solve_levels(p, default_spectrum_grid(p, a.levels, a.n_points), a.levels);
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };
  if (a.threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < a.threads; ++t) pool.emplace_back(work, t);
    for (auto& th : pool) th.join();
  }
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }

  Table t{{"inv_a"}, {}};
  for (int n = 0; n < a.levels; ++n) t.header.push_back("q" + std::to_string(n));
  for (int i = 0; i < a.steps; ++i) {
    json row = json::array({inv_a[i]});
    for (int n = 0; n < a.levels; ++n) {
      const auto& lv = results[i].levels;
      row.push_back(n < static_cast<int>(lv.size()) ? json(lv[n].q) : json(nullptr));
    }
    t.rows.push_back(row);
  }
  return o.format == "json" ? dump_finite(to_records(t), 2) + "\n" : to_csv(t);
}

struct CollapseArgs {
  std::vector<double> k_max_list;
  double inv_a = 0.0;
  double r_star = 1.0;
  int n_points = 320;
  double k_min = 1e-6;
};

std::string collapse_command(const CollapseArgs& a, const Output& o) {
  const auto rows = thomas_collapse_probe(a.inv_a, a.r_star, a.k_max_list, a.n_points, a.k_min);
  Table t{{"kmax", "q0_rstar0", "q0_rstar1"}, {}};
  for (const CollapseRow& r : rows) {
    t.rows.push_back(
        json::array({r.k_max, optional_value(r.q0_zero_range), optional_value(r.q0_finite)}));
  }
  return o.format == "json" ? dump_finite(to_records(t), 2) + "\n" : to_csv(t);
}

}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Few-boson solver for a narrow Feshbach resonance", "rstar"};
  app.require_subcommand(1);

  Output output;
  std::function<std::string()> action;
  std::string warning;

  ResonanceParams dimer_p;
  auto* dimer = app.add_subcommand("dimer", "Closed-form dimer observables");
  add_params(dimer, dimer_p);
  add_output_flags(dimer, output, "json");
  dimer->callback([&] {
    if (output.format.empty()) output.format = "json";
    action = [&] { return dimer_command(dimer_p, output); };
  });

  AmplitudeArgs amp;
  auto* amplitude = app.add_subcommand("amplitude", "Scattering amplitude on a k grid");
  add_params(amplitude, amp.p);
  amplitude->add_option("--eps", amp.p.epsilon, "Coupling cutoff range; > 0 adds f_eps columns")
      ->check(kFinite)
      ->capture_default_str();
  amplitude->add_option("--k-min", amp.k_min, "First k")->check(kFinite)->required();
  amplitude->add_option("--k-max", amp.k_max, "Last k")->check(kFinite)->required();
  amplitude->add_option("--n", amp.n, "Number of k values")->required();
  amplitude->add_option("--spacing", amp.spacing, "k spacing")
      ->check(CLI::IsMember({"linear", "log"}))
      ->capture_default_str();
  add_output_flags(amplitude, output, "csv");
  amplitude->callback([&] {
    if (output.format.empty()) output.format = "csv";
    action = [&] { return amplitude_command(amp, output); };
  });

  auto* trimer = app.add_subcommand("trimer", "Three-boson bound states");
  trimer->require_subcommand(1);

  SpectrumArgs spectrum_args;
  auto* spectrum = trimer->add_subcommand("spectrum", "Deepest trimer levels");
  add_params(spectrum, spectrum_args.p);
  spectrum->add_option("--levels", spectrum_args.levels, "Number of levels")->capture_default_str();
  spectrum->add_option("--n-points", spectrum_args.n_points, "Grid points")->capture_default_str();
  spectrum->add_option("--k-min", spectrum_args.k_min, "Grid lower end (0: default)")->check(kFinite);
  spectrum->add_option("--k-max", spectrum_args.k_max, "Grid upper end (0: default)")->check(kFinite);
  spectrum->add_option("--q-min", spectrum_args.q_min, "Search floor (0: default)")->check(kFinite);
  spectrum->add_option("--q-max", spectrum_args.q_max, "Search ceiling (0: default)")->check(kFinite);
  spectrum->add_option("--ladder-ratio", spectrum_args.ladder_ratio, "Bracketing ladder ratio")
      ->check(kFinite)
      ->capture_default_str();
  add_output_flags(spectrum, output, "csv");
  spectrum->callback([&] {
    if (output.format.empty()) output.format = "csv";
    action = [&] { return spectrum_command(spectrum_args, output, warning); };
  });

  NkArgs nk;
  auto* nk_cmd = trimer->add_subcommand("nk", "Momentum distribution of one level");
  add_params(nk_cmd, nk.p);
  nk_cmd->add_option("--level", nk.level, "Level index, 0 = ground")->capture_default_str();
  nk_cmd->add_option("--search-points", nk.analysis.search_points, "Grid points for the level search")
      ->capture_default_str();
  nk_cmd->add_option("--n-points", nk.analysis.n_points, "Grid points for the amplitude")
      ->capture_default_str();
  nk_cmd->add_option("--out-points", nk.analysis.out_points, "Number of n_k samples")
      ->capture_default_str();
  nk_cmd->add_option("--fit-k-lo", nk.analysis.nk.fit_k_lo, "Tail fit window start (0: default)")
      ->check(kFinite);
  nk_cmd->add_option("--fit-k-hi", nk.analysis.nk.fit_k_hi, "Tail fit window end (0: default)")
      ->check(kFinite);
  add_output_flags(nk_cmd, output, "csv");
  nk_cmd->callback([&] {
    if (output.format.empty()) output.format = "csv";
    action = [&] { return nk_command(nk, output); };
  });

  ScanArgs scan;
  auto* scan_cmd = app.add_subcommand("scan", "Trimer levels across a range of 1/a");
  scan_cmd->add_option("--inv-a-from", scan.inv_a_from, "First 1/a")->check(kFinite)->required();
  scan_cmd->add_option("--inv-a-to", scan.inv_a_to, "Last 1/a")->check(kFinite)->required();
  scan_cmd->add_option("--steps", scan.steps, "Number of 1/a values")->required();
  scan_cmd->add_option("--rstar", scan.r_star, "Resonance width parameter R*")
      ->check(kFinite)
      ->capture_default_str();
  scan_cmd->add_option("--levels", scan.levels, "Levels per row")->capture_default_str();
  scan_cmd->add_option("--n-points", scan.n_points, "Grid points")->capture_default_str();
  scan_cmd->add_option("--threads", scan.threads, "Worker threads")->capture_default_str();
  add_output_flags(scan_cmd, output, "csv");
  scan_cmd->callback([&] {
    if (output.format.empty()) output.format = "csv";
    action = [&] { return scan_command(scan, output); };
  });

  CollapseArgs col;
  auto* collapse = app.add_subcommand("collapse-probe", "Ground level versus momentum cutoff");
  collapse->add_option("--kmax-list", col.k_max_list, "Cutoffs, comma separated")
      ->delimiter(',')
      ->check(kFinite)
      ->required();
  collapse->add_option("--inv-a", col.inv_a, "Inverse scattering length 1/a")
      ->check(kFinite)
      ->capture_default_str();
  collapse->add_option("--rstar", col.r_star, "R* of the finite-range column")
      ->check(kFinite)
      ->capture_default_str();
  collapse->add_option("--n-points", col.n_points, "Grid points")->capture_default_str();
  collapse->add_option("--k-min", col.k_min, "Grid lower end")
      ->check(kFinite)
      ->capture_default_str();
  add_output_flags(collapse, output, "csv");
  collapse->callback([&] {
    if (output.format.empty()) output.format = "csv";
    action = [&] { return collapse_command(col, output); };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "UsageError: " << e.what() << "\n";
    return 2;
  }

  std::string payload;
  try {
    payload = action();
  } catch (const UsageError& e) {
    err << "UsageError: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << e.what() << "\n";
    return 3;
  }

  if (output.path.empty()) {
    out << payload;
  } else {
    std::ofstream file(output.path, std::ios::binary);
    if (!(file << payload)) {
      err << "IoError: cannot write " << output.path << "\n";
      return 1;
    }
  }
  if (!warning.empty()) {
    err << warning << "\n";
    return 3;
  }
  return 0;
}

}  // namespace rstar::cli
