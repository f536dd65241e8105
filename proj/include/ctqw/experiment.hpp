#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <iomanip>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ctqw/csv.hpp"
#include "ctqw/dynamics.hpp"
#include "ctqw/errors.hpp"
#include "ctqw/graph.hpp"
#include "ctqw/kohlrausch.hpp"
#include "ctqw/metrics.hpp"
#include "ctqw/random.hpp"
#include "ctqw/state.hpp"

namespace ctqw {

inline constexpr const char* kEngineVersion = "ctqw 1.0.0";

// Sub-seed stages derived from the top-level seed. Append new stages at the end.
inline constexpr std::uint64_t kGraphSeedStage = 0;
inline constexpr std::uint64_t kNodeSeedStage = 1;

enum class Family { Cycle, Complete, Star, ErdosRenyi, WattsStrogatz, BarabasiAlbert };

inline std::string family_name(Family f) {
  switch (f) {
  case Family::Cycle: return "cycle";
  case Family::Complete: return "complete";
  case Family::Star: return "star";
  case Family::ErdosRenyi: return "er";
  case Family::WattsStrogatz: return "ws";
  case Family::BarabasiAlbert: return "ba";
  }
  return "?";
}

inline Family parse_family(const std::string& s) {
  for (auto f : {Family::Cycle, Family::Complete, Family::Star, Family::ErdosRenyi, Family::WattsStrogatz, Family::BarabasiAlbert})
    if (family_name(f) == s) return f;
  throw ConfigError("unknown graph family '" + s + "' (expected cycle|complete|star|er|ws|ba)");
}

struct TopologySpec {
  Family family = Family::Cycle;
  double avg_degree = 4.0; // er
  std::size_t k = 4;       // ws
  double p_rewire = 0.1;   // ws
  std::size_t m = 2;       // ba
};

inline Graph build_graph(const TopologySpec& spec, std::size_t n, std::uint64_t seed) {
  switch (spec.family) {
  case Family::Cycle: return build_cycle(n);
  case Family::Complete: return build_complete(n);
  case Family::Star: return build_star(n);
  case Family::ErdosRenyi: return build_erdos_renyi(n, spec.avg_degree, seed);
  case Family::WattsStrogatz: return build_watts_strogatz(n, spec.k, spec.p_rewire, seed);
  case Family::BarabasiAlbert: return build_barabasi_albert(n, spec.m, seed);
  }
  throw ConfigError("unknown graph family");
}

enum class DqcModeTag { FixedInitial, MinOverLocalized };

struct ExperimentConfig {
  std::string name = "run";
  std::uint64_t seed = 1;
  std::size_t n = 10;
  TopologySpec topology{};
  EvolutionModel model = Noiseless{};
  NodePolicy::Kind policy = NodePolicy::Kind::Random;
  std::size_t explicit_index = 0;
  std::optional<TimeGrid> grid; // default depends on n
  DqcModeTag d_qc_mode = DqcModeTag::FixedInitial;
  LogBase entropy_base = LogBase::Natural;
  bool emit_occupations = false;
  bool snapshots = false;
  double tolerance = 1e-8;
  std::optional<std::pair<double, double>> fit_window;
  std::string output_dir;

  TimeGrid resolved_grid() const { return grid.value_or(TimeGrid::default_for(n)); }

  NodePolicy node_policy() const {
    NodePolicy p;
    p.kind = policy;
    p.index = explicit_index;
    p.seed = derive_seed(seed, kNodeSeedStage);
    return p;
  }
};

// ---------------------------------------------------------------------------
// JSON (fail-closed: unknown keys are errors)
// ---------------------------------------------------------------------------

namespace detail {

inline void reject_unknown(const nlohmann::json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + ": expected a JSON object");
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError(where + ": unknown field '" + key + "'");
  }
}

template <class T>
T get_or(const nlohmann::json& obj, const char* key, T fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(where + ": field '" + key + "' has the wrong type");
  }
}

inline const char* policy_name(NodePolicy::Kind k) {
  switch (k) {
  case NodePolicy::Kind::Random: return "random";
  case NodePolicy::Kind::HighestDegree: return "highest_degree";
  case NodePolicy::Kind::LowestDegree: return "lowest_degree";
  case NodePolicy::Kind::HighestCloseness: return "highest_closeness";
  case NodePolicy::Kind::ExplicitIndex: return "explicit";
  }
  return "?";
}

} // namespace detail

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  using detail::get_or;
  detail::reject_unknown(j, {"name", "seed", "n", "topology", "model", "node_policy", "time_grid", "d_qc_mode",
                             "entropy_base", "emit_occupations", "snapshots", "tolerance", "fit_window", "output_dir"},
                         "config");
  ExperimentConfig c;
  c.name = get_or<std::string>(j, "name", c.name, "config");
  c.seed = get_or<std::uint64_t>(j, "seed", c.seed, "config");
  if (!j.contains("n")) throw ConfigError("config: missing field 'n'");
  c.n = get_or<std::size_t>(j, "n", c.n, "config");

  if (!j.contains("topology")) throw ConfigError("config: missing field 'topology'");
  const auto& topo = j.at("topology");
  if (!topo.is_object() || !topo.contains("family")) throw ConfigError("topology: missing field 'family'");
  c.topology.family = parse_family(get_or<std::string>(topo, "family", "", "topology"));
  switch (c.topology.family) {
  case Family::ErdosRenyi: detail::reject_unknown(topo, {"family", "avg_degree"}, "topology"); break;
  case Family::WattsStrogatz: detail::reject_unknown(topo, {"family", "k", "p_rewire"}, "topology"); break;
  case Family::BarabasiAlbert: detail::reject_unknown(topo, {"family", "m"}, "topology"); break;
  default: detail::reject_unknown(topo, {"family"}, "topology"); break;
  }
  c.topology.avg_degree = get_or<double>(topo, "avg_degree", c.topology.avg_degree, "topology");
  c.topology.k = get_or<std::size_t>(topo, "k", c.topology.k, "topology");
  c.topology.p_rewire = get_or<double>(topo, "p_rewire", c.topology.p_rewire, "topology");
  c.topology.m = get_or<std::size_t>(topo, "m", c.topology.m, "topology");

  if (!j.contains("model")) throw ConfigError("config: missing field 'model'");
  const auto& model = j.at("model");
  if (!model.is_object() || !model.contains("type")) throw ConfigError("model: missing field 'type'");
  const auto type = get_or<std::string>(model, "type", "", "model");
  if (type == "noiseless") {
    detail::reject_unknown(model, {"type"}, "model");
    c.model = Noiseless{};
  } else if (type == "intrinsic") {
    detail::reject_unknown(model, {"type", "gamma"}, "model");
    c.model = Intrinsic{get_or<double>(model, "gamma", 0.1, "model")};
  } else if (type == "haken_strobl") {
    detail::reject_unknown(model, {"type", "gamma"}, "model");
    c.model = HakenStrobl{get_or<double>(model, "gamma", 0.1, "model")};
  } else if (type == "qsw") {
    detail::reject_unknown(model, {"type", "p"}, "model");
    c.model = QuantumStochasticWalk{get_or<double>(model, "p", 0.1, "model")};
  } else {
    throw ConfigError("model: unknown type '" + type + "' (expected noiseless|intrinsic|haken_strobl|qsw)");
  }

  if (j.contains("node_policy")) {
    const auto& pol = j.at("node_policy");
    if (!pol.is_object() || !pol.contains("type")) throw ConfigError("node_policy: missing field 'type'");
    const auto ptype = get_or<std::string>(pol, "type", "", "node_policy");
    bool found = false;
    for (auto k : {NodePolicy::Kind::Random, NodePolicy::Kind::HighestDegree, NodePolicy::Kind::LowestDegree,
                   NodePolicy::Kind::HighestCloseness, NodePolicy::Kind::ExplicitIndex})
      if (ptype == detail::policy_name(k)) {
        c.policy = k;
        found = true;
      }
    if (!found) throw ConfigError("node_policy: unknown type '" + ptype + "'");
    if (c.policy == NodePolicy::Kind::ExplicitIndex) {
      detail::reject_unknown(pol, {"type", "index"}, "node_policy");
      if (!pol.contains("index")) throw ConfigError("node_policy: 'explicit' needs 'index'");
      c.explicit_index = get_or<std::size_t>(pol, "index", 0, "node_policy");
    } else {
      detail::reject_unknown(pol, {"type"}, "node_policy");
    }
  }

  if (j.contains("time_grid")) {
    const auto& g = j.at("time_grid");
    detail::reject_unknown(g, {"t_end", "samples"}, "time_grid");
    const auto def = TimeGrid::default_for(c.n);
    c.grid = TimeGrid{get_or<double>(g, "t_end", def.t_end, "time_grid"), get_or<std::size_t>(g, "samples", def.samples, "time_grid")};
  }

  const auto mode = get_or<std::string>(j, "d_qc_mode", "fixed_initial", "config");
  if (mode == "fixed_initial") c.d_qc_mode = DqcModeTag::FixedInitial;
  else if (mode == "min_over_localized") c.d_qc_mode = DqcModeTag::MinOverLocalized;
  else throw ConfigError("config: d_qc_mode must be fixed_initial or min_over_localized");

  const auto base = get_or<std::string>(j, "entropy_base", "e", "config");
  if (base == "e") c.entropy_base = LogBase::Natural;
  else if (base == "2") c.entropy_base = LogBase::Two;
  else throw ConfigError("config: entropy_base must be \"e\" or \"2\"");

  c.emit_occupations = get_or<bool>(j, "emit_occupations", false, "config");
  c.snapshots = get_or<bool>(j, "snapshots", false, "config");
  c.tolerance = get_or<double>(j, "tolerance", c.tolerance, "config");
  if (j.contains("fit_window")) {
    const auto w = get_or<std::vector<double>>(j, "fit_window", {}, "config");
    if (w.size() != 2 || !(w[0] < w[1])) throw ConfigError("config: fit_window must be [t_min, t_max] with t_min < t_max");
    c.fit_window = std::make_pair(w[0], w[1]);
  }
  c.output_dir = get_or<std::string>(j, "output_dir", "", "config");
  return c;
}

inline nlohmann::ordered_json config_to_json(const ExperimentConfig& c) {
  nlohmann::ordered_json j;
  j["name"] = c.name;
  j["seed"] = c.seed;
  j["n"] = c.n;
  nlohmann::ordered_json topo;
  topo["family"] = family_name(c.topology.family);
  if (c.topology.family == Family::ErdosRenyi) topo["avg_degree"] = c.topology.avg_degree;
  if (c.topology.family == Family::WattsStrogatz) {
    topo["k"] = c.topology.k;
    topo["p_rewire"] = c.topology.p_rewire;
  }
  if (c.topology.family == Family::BarabasiAlbert) topo["m"] = c.topology.m;
  j["topology"] = topo;
  nlohmann::ordered_json model;
  model["type"] = model_name(c.model);
  if (const auto* m = std::get_if<Intrinsic>(&c.model)) model["gamma"] = m->gamma;
  if (const auto* m = std::get_if<HakenStrobl>(&c.model)) model["gamma"] = m->gamma;
  if (const auto* m = std::get_if<QuantumStochasticWalk>(&c.model)) model["p"] = m->p;
  j["model"] = model;
  nlohmann::ordered_json pol;
  pol["type"] = detail::policy_name(c.policy);
  if (c.policy == NodePolicy::Kind::ExplicitIndex) pol["index"] = c.explicit_index;
  j["node_policy"] = pol;
  const auto g = c.resolved_grid();
  j["time_grid"] = {{"t_end", g.t_end}, {"samples", g.samples}};
  j["d_qc_mode"] = c.d_qc_mode == DqcModeTag::FixedInitial ? "fixed_initial" : "min_over_localized";
  j["entropy_base"] = c.entropy_base == LogBase::Natural ? "e" : "2";
  j["emit_occupations"] = c.emit_occupations;
  j["snapshots"] = c.snapshots;
  j["tolerance"] = c.tolerance;
  if (c.fit_window) j["fit_window"] = {c.fit_window->first, c.fit_window->second};
  if (!c.output_dir.empty()) j["output_dir"] = c.output_dir;
  return j;
}

inline std::vector<ExperimentConfig> configs_from_json(const nlohmann::json& j) {
  std::vector<ExperimentConfig> out;
  if (j.is_array()) {
    for (const auto& c : j) out.push_back(config_from_json(c));
  } else {
    out.push_back(config_from_json(j));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Presets
// ---------------------------------------------------------------------------

namespace detail {

inline ExperimentConfig make_config(std::string name, std::size_t n, TopologySpec topo, EvolutionModel model,
                                    NodePolicy::Kind policy, std::uint64_t seed = 1, std::size_t index = 0) {
  ExperimentConfig c;
  c.name = std::move(name);
  c.n = n;
  c.topology = topo;
  c.model = model;
  c.policy = policy;
  c.explicit_index = index;
  c.seed = seed;
  return c;
}

inline std::vector<std::pair<std::string, EvolutionModel>> all_models() {
  return {{"noiseless", Noiseless{}}, {"haken_strobl", HakenStrobl{0.1}}, {"intrinsic", Intrinsic{0.1}}, {"qsw", QuantumStochasticWalk{0.1}}};
}

struct Placement {
  std::string label;
  TopologySpec topo;
  NodePolicy::Kind policy;
};

inline std::vector<Placement> simple_placements() {
  using K = NodePolicy::Kind;
  return {{"cycle", {Family::Cycle}, K::Random},
          {"star-hub", {Family::Star}, K::HighestDegree},
          {"star-peripheral", {Family::Star}, K::LowestDegree},
          {"complete", {Family::Complete}, K::Random}};
}

inline std::vector<Placement> complex_placements() {
  using K = NodePolicy::Kind;
  TopologySpec er{Family::ErdosRenyi};
  er.avg_degree = 4.0;
  TopologySpec ws{Family::WattsStrogatz};
  ws.k = 4;
  ws.p_rewire = 0.1;
  TopologySpec ba{Family::BarabasiAlbert};
  ba.m = 2;
  return {{"er", er, K::Random}, {"ws", ws, K::Random}, {"ba", ba, K::HighestDegree}};
}

} // namespace detail

inline const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"table1", "table2", "simple-n10", "complex-n100", "appendix-n50", "centrality-fig10"};
  return names;
}

/// Named experiment sets. All use seed 1 (random families) unless noted.
inline std::vector<ExperimentConfig> preset(const std::string& name) {
  using detail::make_config;
  std::vector<ExperimentConfig> out;
  const std::vector<std::pair<std::string, EvolutionModel>> decoherent{{"haken_strobl", HakenStrobl{0.1}},
                                                                       {"qsw", QuantumStochasticWalk{0.1}}};
  if (name == "table1") {
    for (const auto& [mname, model] : decoherent)
      for (const auto& p : detail::simple_placements()) out.push_back(make_config(p.label + "_" + mname, 10, p.topo, model, p.policy));
  } else if (name == "table2") {
    for (const auto& [mname, model] : decoherent)
      for (const auto& p : detail::complex_placements()) out.push_back(make_config(p.label + "_" + mname, 100, p.topo, model, p.policy));
  } else if (name == "simple-n10") {
    for (const auto& p : detail::simple_placements())
      for (const auto& [mname, model] : detail::all_models()) out.push_back(make_config(p.label + "_" + mname, 10, p.topo, model, p.policy));
  } else if (name == "complex-n100") {
    for (const auto& p : detail::complex_placements())
      for (const auto& [mname, model] : detail::all_models()) out.push_back(make_config(p.label + "_" + mname, 100, p.topo, model, p.policy));
  } else if (name == "appendix-n50") {
    auto placements = detail::simple_placements();
    for (auto& p : detail::complex_placements()) placements.push_back(p);
    for (const auto& p : placements)
      for (const auto& [mname, model] : detail::all_models()) out.push_back(make_config(p.label + "_" + mname, 50, p.topo, model, p.policy));
  } else if (name == "centrality-fig10") {
    using K = NodePolicy::Kind;
    TopologySpec ba{Family::BarabasiAlbert};
    ba.m = 2;
    // Node 0 belongs to the seed core and is usually among the hubs.
    const std::vector<std::pair<std::string, K>> policies{{"highest-degree", K::HighestDegree},
                                                          {"highest-closeness", K::HighestCloseness},
                                                          {"lowest-degree", K::LowestDegree},
                                                          {"node-0", K::ExplicitIndex}};
    for (const auto& [pname, kind] : policies)
      for (const auto& [mname, model] : detail::all_models())
        out.push_back(make_config("ba-" + pname + "_" + mname, 100, ba, model, kind, 1, 0));
  } else {
    std::string known;
    for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
    throw ConfigError("unknown preset '" + name + "' (known: " + known + ")");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Running
// ---------------------------------------------------------------------------

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumeric = 3;
inline constexpr int kExitPartialSweep = 4;

/// A run aborted in `stage`; `exit_code` follows the CLI convention.
class RunError : public std::runtime_error {
public:
  RunError(std::string stage, const std::string& what, int exit_code)
      : std::runtime_error(stage + ": " + what), stage_(std::move(stage)), exit_code_(exit_code) {}
  const std::string& stage() const noexcept { return stage_; }
  int exit_code() const noexcept { return exit_code_; }

private:
  std::string stage_;
  int exit_code_;
};

struct RunManifest {
  nlohmann::ordered_json config;
  std::size_t initial_node = 0;
  std::string graph_hash;
  double wall_clock_seconds = 0.0;
  std::vector<std::string> files; // relative to the run directory
  std::string engine_version = kEngineVersion;

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["engine_version"] = engine_version;
    j["config"] = config;
    j["initial_node"] = initial_node;
    j["graph_hash"] = graph_hash;
    j["wall_clock_seconds"] = wall_clock_seconds;
    j["files"] = files;
    return j;
  }
};

struct RunOutcome {
  RunManifest manifest;
  std::vector<MetricRecord> records;
};

namespace detail {

template <class F>
auto run_stage(const std::string& stage, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const RunError&) {
    throw;
  } catch (const ConfigError& e) {
    throw RunError(stage, e.what(), kExitConfig);
  } catch (const InvalidArgument& e) {
    throw RunError(stage, e.what(), kExitConfig);
  } catch (const std::exception& e) {
    throw RunError(stage, e.what(), kExitNumeric);
  }
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os << text;
  if (!os) throw std::runtime_error("write failed for " + path.string());
}

} // namespace detail

/// Evolve and measure without touching the filesystem.
inline RunOutcome simulate(const ExperimentConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  RunOutcome out;
  out.manifest.config = config_to_json(config);

  const Graph graph = detail::run_stage("graph", [&] {
    return build_graph(config.topology, config.n, derive_seed(config.seed, kGraphSeedStage));
  });
  out.manifest.graph_hash = graph_hash(graph);
  const std::size_t node = detail::run_stage("node-selection", [&] { return select_node(graph, config.node_policy()); });
  out.manifest.initial_node = node;

  detail::run_stage("evolution", [&] {
    check_model(config.model);
    const GraphHamiltonian h(graph);
    const TimeGrid grid = config.resolved_grid();
    grid.check();
    MetricOptions mopts;
    mopts.entropy_base = config.entropy_base;
    mopts.d_qc_mode = config.d_qc_mode == DqcModeTag::FixedInitial ? DistanceMode{FixedInitial{node}} : DistanceMode{MinOverLocalized{}};
    EvolveOptions eopts;
    eopts.tolerance = config.tolerance;
    out.records.reserve(grid.samples);
    evolve_observed(
        config.model, h, localized_state(config.n, node), grid,
        [&](double t, const DensityMatrix& rho) {
          const Eigen::VectorXd evals = hermitian_eigenvalues(rho.matrix());
          const auto diag = validate(rho, evals);
          if (!diag.valid()) {
            std::ostringstream msg;
            msg << "state at t = " << t << " is unphysical (hermiticity " << diag.hermiticity_defect << ", trace "
                << diag.trace_defect << ", min eigenvalue " << diag.min_eigenvalue << ")";
            throw InvalidStateError(msg.str());
          }
          out.records.push_back(compute_metrics(t, rho, h.spectrum(), node, mopts, &evals));
        },
        eopts);
    return 0;
  });
  out.manifest.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

/// Builds the graph, evolves, measures and writes graph.json, metrics.csv,
/// manifest.json (and snapshots/ when enabled) into `out_dir`.
inline RunOutcome run(const ExperimentConfig& config, const std::filesystem::path& out_dir) {
  const auto start = std::chrono::steady_clock::now();
  RunOutcome out = simulate(config);

  std::vector<std::string> files;
  detail::run_stage("output", [&] {
    std::filesystem::create_directories(out_dir);
    const Graph graph = build_graph(config.topology, config.n, derive_seed(config.seed, kGraphSeedStage));
    detail::write_text(out_dir / "graph.json", canonical_json(graph) + "\n");
    files.push_back("graph.json");
    std::ostringstream csv;
    write_metrics_csv(csv, out.records, config.emit_occupations);
    detail::write_text(out_dir / "metrics.csv", csv.str());
    files.push_back("metrics.csv");
    return 0;
  });

  if (config.snapshots) {
    detail::run_stage("snapshots", [&] {
      const auto dir = out_dir / "snapshots";
      std::filesystem::create_directories(dir);
      const GraphHamiltonian h(build_graph(config.topology, config.n, derive_seed(config.seed, kGraphSeedStage)));
      std::size_t index = 0;
      EvolveOptions eopts;
      eopts.tolerance = config.tolerance;
      evolve_observed(
          config.model, h, localized_state(config.n, out.manifest.initial_node), config.resolved_grid(),
          [&](double t, const DensityMatrix& rho) {
            std::ostringstream fname;
            fname << "state_" << std::setw(5) << std::setfill('0') << index++ << ".json";
            auto j = snapshot_json(rho);
            j["t"] = t;
            detail::write_text(dir / fname.str(), j.dump() + "\n");
            files.push_back("snapshots/" + fname.str());
          },
          eopts);
      return 0;
    });
  }

  files.push_back("manifest.json");
  out.manifest.files = files;
  out.manifest.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  detail::run_stage("output", [&] {
    detail::write_text(out_dir / "manifest.json", out.manifest.to_json().dump(2) + "\n");
    return 0;
  });
  return out;
}

// ---------------------------------------------------------------------------
// Fitting and sweeps
// ---------------------------------------------------------------------------

/// Kohlrausch fit of one metric column, restricted to `window` when given.
inline FitResult fit_column(std::span<const double> times, std::span<const double> values,
                            std::optional<std::pair<double, double>> window, std::uint64_t seed) {
  FitOptions opts;
  opts.seed = seed;
  if (!window) return fit_stretched_exponential(times, values, opts);
  const auto s = fit_window(times, values, window->first, window->second);
  return fit_stretched_exponential(s.times, s.values, opts);
}

inline nlohmann::ordered_json fit_to_json(const FitResult& f, double t_min, double t_max) {
  nlohmann::ordered_json j;
  j["C0"] = f.c0;
  j["lambda"] = f.lambda;
  j["beta"] = f.beta;
  j["rss"] = f.rss;
  j["converged"] = f.converged;
  j["window"] = {t_min, t_max};
  j["iterations"] = f.iterations;
  if (!f.diagnostic.empty()) j["diagnostic"] = f.diagnostic;
  return j;
}

/// The l1-coherence fit every sweep row reports; same seed as the `fit` command.
inline FitResult coherence_fit(const ExperimentConfig& config, const std::vector<MetricRecord>& records) {
  std::vector<double> t, v;
  for (const auto& r : records) {
    t.push_back(r.t);
    v.push_back(r.l1_coherence);
  }
  return fit_column(t, v, config.fit_window, 0);
}

struct SweepRow {
  std::string name;
  std::string topology;
  std::string model;
  std::size_t n = 0;
  bool ok = false;
  std::string error;
  int exit_code = kExitOk;
  FitResult fit;
  std::optional<RunManifest> manifest;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  bool all_ok() const {
    return std::all_of(rows.begin(), rows.end(), [](const SweepRow& r) { return r.ok; });
  }
};

inline std::string summary_csv(const SweepResult& result) {
  std::ostringstream os;
  os << "name,topology,model,n,ok,C0,lambda,beta,rss,converged\n";
  for (const auto& r : result.rows) {
    os << r.name << ',' << r.topology << ',' << r.model << ',' << r.n << ',' << (r.ok ? 1 : 0) << ',';
    if (r.ok)
      os << format_double(r.fit.c0) << ',' << format_double(r.fit.lambda) << ',' << format_double(r.fit.beta) << ','
         << format_double(r.fit.rss) << ',' << (r.fit.converged ? 1 : 0);
    else
      os << ",,,,";
    os << '\n';
  }
  return os.str();
}

/// Runs every config (each into out_dir/<name>) on `jobs` worker threads. Failures are
/// recorded per row and do not stop the sweep. Row order follows `configs`.
inline SweepResult sweep(const std::vector<ExperimentConfig>& configs, const std::filesystem::path& out_dir, std::size_t jobs = 1) {
  std::set<std::string> names;
  for (const auto& c : configs)
    if (!names.insert(c.name).second) throw ConfigError("sweep: duplicate run name '" + c.name + "'");

  SweepResult result;
  result.rows.resize(configs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      const auto& c = configs[i];
      SweepRow& row = result.rows[i];
      row.name = c.name;
      row.topology = family_name(c.topology.family);
      row.model = model_name(c.model);
      row.n = c.n;
      try {
        auto outcome = run(c, out_dir / c.name);
        row.fit = coherence_fit(c, outcome.records);
        double t_min = outcome.records.front().t, t_max = outcome.records.back().t;
        if (c.fit_window) {
          t_min = std::max(t_min, c.fit_window->first);
          t_max = std::min(t_max, c.fit_window->second);
        }
        detail::write_text(out_dir / c.name / "fit.json", fit_to_json(row.fit, t_min, t_max).dump(2) + "\n");
        row.manifest = std::move(outcome.manifest);
        row.ok = true;
      } catch (const RunError& e) {
        row.error = e.what();
        row.exit_code = e.exit_code();
      } catch (const std::exception& e) {
        row.error = e.what();
        row.exit_code = kExitNumeric;
      }
    }
  };
  const std::size_t n_workers = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(1, configs.size()));
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < n_workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  std::filesystem::create_directories(out_dir);
  detail::write_text(out_dir / "summary.csv", summary_csv(result));
  nlohmann::ordered_json summary = nlohmann::ordered_json::array();
  for (const auto& r : result.rows) {
    nlohmann::ordered_json j;
    j["name"] = r.name;
    j["topology"] = r.topology;
    j["model"] = r.model;
    j["n"] = r.n;
    j["ok"] = r.ok;
    if (r.ok) {
      j["C0"] = r.fit.c0;
      j["lambda"] = r.fit.lambda;
      j["beta"] = r.fit.beta;
      j["rss"] = r.fit.rss;
      j["converged"] = r.fit.converged;
    } else {
      j["error"] = r.error;
    }
    summary.push_back(j);
  }
  detail::write_text(out_dir / "summary.json", summary.dump(2) + "\n");
  return result;
}

} // namespace ctqw
