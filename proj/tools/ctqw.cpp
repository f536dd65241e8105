// Command-line front end: generate-graph, run, sweep, fit.

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ctqw/ctqw.hpp"

namespace fs = std::filesystem;

namespace {

std::optional<std::uint64_t> seed_override() {
  const char* env = std::getenv("CTQW_SEED");
  if (env == nullptr || *env == '\0') return std::nullopt;
  std::uint64_t v = 0;
  const std::string s(env);
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw ctqw::ConfigError("CTQW_SEED must be a non-negative integer, got '" + s + "'");
  return v;
}

void apply_overrides(std::vector<ctqw::ExperimentConfig>& configs) {
  if (const auto seed = seed_override())
    for (auto& c : configs) c.seed = *seed;
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ctqw::ConfigError("cannot open " + path);
  try {
    return nlohmann::json::parse(is);
  } catch (const nlohmann::json::parse_error& e) {
    throw ctqw::ConfigError(path + ": " + e.what());
  }
}

void write_or_print(const std::string& text, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << text;
    return;
  }
  if (const auto parent = fs::path(out).parent_path(); !parent.empty()) fs::create_directories(parent);
  std::ofstream os(out, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + out + " for writing");
  os << text;
}

struct GenerateArgs {
  std::string family;
  std::size_t n = 0;
  std::uint64_t seed = 1;
  double avg_degree = 4.0;
  std::size_t k = 4;
  double p_rewire = 0.1;
  std::size_t m = 2;
  std::string out;
};

int cmd_generate(const GenerateArgs& a) {
  ctqw::TopologySpec spec;
  spec.family = ctqw::parse_family(a.family);
  spec.avg_degree = a.avg_degree;
  spec.k = a.k;
  spec.p_rewire = a.p_rewire;
  spec.m = a.m;
  const std::uint64_t seed = seed_override().value_or(a.seed);
  const auto g = ctqw::detail::run_stage("graph", [&] { return ctqw::build_graph(spec, a.n, ctqw::derive_seed(seed, ctqw::kGraphSeedStage)); });
  write_or_print(ctqw::canonical_json(g) + "\n", a.out);
  std::cerr << "graph: n=" << g.size() << " edges=" << g.edge_count() << " hash=" << ctqw::graph_hash(g) << "\n";
  return ctqw::kExitOk;
}

struct RunArgs {
  std::string config;
  std::string out_dir;
  bool emit_occupations = false;
  bool snapshots = false;
  std::string entropy_base;
};

int cmd_run(const RunArgs& a) {
  auto configs = ctqw::configs_from_json(read_json_file(a.config));
  if (configs.size() != 1) throw ctqw::ConfigError("run: expected a single config object; use `sweep --configs` for lists");
  apply_overrides(configs);
  auto& c = configs.front();
  if (a.emit_occupations) c.emit_occupations = true;
  if (a.snapshots) c.snapshots = true;
  if (!a.entropy_base.empty()) c.entropy_base = a.entropy_base == "2" ? ctqw::LogBase::Two : ctqw::LogBase::Natural;
  fs::path dir = a.out_dir.empty() ? fs::path(c.output_dir) : fs::path(a.out_dir);
  if (dir.empty()) throw ctqw::ConfigError("run: no output directory (pass --out-dir or set output_dir)");
  const auto outcome = ctqw::run(c, dir);
  std::cerr << "run '" << c.name << "': initial node " << outcome.manifest.initial_node << ", " << outcome.records.size()
            << " samples, " << outcome.manifest.wall_clock_seconds << " s -> " << dir.string() << "\n";
  return ctqw::kExitOk;
}

struct SweepArgs {
  std::string preset;
  std::string configs;
  std::string out_dir;
  std::size_t jobs = 1;
};

int cmd_sweep(const SweepArgs& a) {
  std::vector<ctqw::ExperimentConfig> configs =
      a.preset.empty() ? ctqw::configs_from_json(read_json_file(a.configs)) : ctqw::preset(a.preset);
  apply_overrides(configs);
  const auto result = ctqw::sweep(configs, a.out_dir, a.jobs);
  std::size_t failed = 0;
  for (const auto& r : result.rows)
    if (!r.ok) {
      ++failed;
      std::cerr << "run '" << r.name << "' failed: " << r.error << "\n";
    }
  std::cout << ctqw::summary_csv(result);
  if (failed == 0) return ctqw::kExitOk;
  std::cerr << failed << " of " << result.rows.size() << " runs failed\n";
  return ctqw::kExitPartialSweep;
}

struct FitArgs {
  std::string input;
  std::string column = "l1_coherence";
  std::string window;
  std::string out;
};

int cmd_fit(const FitArgs& a) {
  std::ifstream is(a.input);
  if (!is) throw ctqw::ConfigError("cannot open " + a.input);
  ctqw::CsvTable table;
  std::optional<std::pair<double, double>> window;
  try {
    table = ctqw::CsvTable::parse(is);
    if (!table.has("t")) throw ctqw::InvalidArgument("csv: no column named 't'");
    table.column(a.column);
  } catch (const ctqw::InvalidArgument& e) {
    throw ctqw::ConfigError(a.input + ": " + e.what());
  }
  if (!a.window.empty()) {
    const auto comma = a.window.find(',');
    double lo = 0.0, hi = 0.0;
    const char* s = a.window.data();
    const char* e = s + a.window.size();
    if (comma == std::string::npos || std::from_chars(s, s + comma, lo).ptr != s + comma ||
        std::from_chars(s + comma + 1, e, hi).ptr != e || !(lo < hi))
      throw ctqw::ConfigError("--window must be 'a,b' with a < b");
    window = std::make_pair(lo, hi);
  }
  const auto& t = table.column("t");
  const auto& v = table.column(a.column);
  if (t.empty()) throw ctqw::ConfigError(a.input + ": no data rows");
  const auto fit = ctqw::detail::run_stage("fit", [&] { return ctqw::fit_column(t, v, window, 0); });
  const double t_min = window ? std::max(window->first, t.front()) : t.front();
  const double t_max = window ? std::min(window->second, t.back()) : t.back();
  write_or_print(ctqw::fit_to_json(fit, t_min, t_max).dump(2) + "\n", a.out);
  if (!fit.converged) std::cerr << "warning: fit did not converge: " << fit.diagnostic << "\n";
  return ctqw::kExitOk;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Continuous-time quantum walks on graphs: simulation, metrics and decay fits"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(ctqw::kEngineVersion));

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate-graph", "Build a graph and write its canonical JSON");
  g->add_option("--family", gen.family, "cycle|complete|star|er|ws|ba")->required();
  g->add_option("--n", gen.n, "Number of nodes")->required();
  g->add_option("--seed", gen.seed, "Seed for random families (CTQW_SEED overrides)");
  g->add_option("--avg-degree", gen.avg_degree, "Erdős–Rényi mean degree");
  g->add_option("--k", gen.k, "Watts–Strogatz ring degree (even)");
  g->add_option("--p-rewire", gen.p_rewire, "Watts–Strogatz rewiring probability");
  g->add_option("--m", gen.m, "Barabási–Albert edges per new node");
  g->add_option("--out", gen.out, "Output file (stdout if omitted)");

  RunArgs run;
  auto* r = app.add_subcommand("run", "Run one experiment config");
  r->add_option("--config", run.config, "Config JSON")->required()->check(CLI::ExistingFile);
  r->add_option("--out-dir", run.out_dir, "Output directory");
  r->add_flag("--emit-occupations", run.emit_occupations, "Add p_k columns to metrics.csv");
  r->add_flag("--snapshots", run.snapshots, "Write density-matrix snapshots");
  r->add_option("--entropy-base", run.entropy_base, "Entropy logarithm: e or 2")->check(CLI::IsMember({"e", "2"}));

  SweepArgs sw;
  auto* s = app.add_subcommand("sweep", "Run a preset or a list of configs");
  auto* preset_opt = s->add_option("--preset", sw.preset, "Preset name")->check(CLI::IsMember(ctqw::preset_names()));
  auto* configs_opt = s->add_option("--configs", sw.configs, "JSON array of configs")->check(CLI::ExistingFile);
  preset_opt->excludes(configs_opt);
  s->add_option("--out-dir", sw.out_dir, "Output directory")->required();
  s->add_option("--jobs", sw.jobs, "Worker threads")->check(CLI::PositiveNumber);

  FitArgs fit;
  auto* f = app.add_subcommand("fit", "Fit a stretched exponential to one CSV column");
  f->add_option("--input", fit.input, "metrics.csv")->required()->check(CLI::ExistingFile);
  f->add_option("--column", fit.column, "Column to fit");
  f->add_option("--window", fit.window, "t_min,t_max");
  f->add_option("--out", fit.out, "Output file (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : ctqw::kExitConfig;
  }

  try {
    if (*g) return cmd_generate(gen);
    if (*r) return cmd_run(run);
    if (*s) {
      if (sw.preset.empty() && sw.configs.empty()) throw ctqw::ConfigError("sweep: pass --preset or --configs");
      return cmd_sweep(sw);
    }
    if (*f) return cmd_fit(fit);
  } catch (const ctqw::RunError& e) {
    std::cerr << "error [" << e.stage() << "]: " << e.what() << "\n";
    return e.exit_code();
  } catch (const ctqw::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return ctqw::kExitConfig;
  } catch (const ctqw::InvalidArgument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return ctqw::kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return ctqw::kExitNumeric;
  }
  return ctqw::kExitOk;
}
