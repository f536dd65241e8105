// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
// CTQW_ACCEPTANCE_ONLY=1,5,8 restricts the run to the listed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ctqw/ctqw.hpp"
#include "oracles.hpp"

using namespace ctqw;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) { return std::chrono::duration<double>(Clock::now() - start).count(); }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double max_abs(const ComplexMatrix& m) { return m.cwiseAbs().maxCoeff(); }

const std::vector<EvolutionModel>& all_models() {
  static const std::vector<EvolutionModel> m{Noiseless{}, Intrinsic{0.1}, HakenStrobl{0.1}, QuantumStochasticWalk{0.1}};
  return m;
}

Graph family_graph(Family f, std::size_t n, std::uint64_t seed) {
  TopologySpec spec{f};
  spec.avg_degree = std::min(4.0, static_cast<double>(n - 1));
  spec.k = n > 4 ? 4 : 2;
  spec.m = 2;
  return build_graph(spec, n, derive_seed(seed, kGraphSeedStage));
}

const std::vector<Family>& all_families() {
  static const std::vector<Family> f{Family::Cycle, Family::Star, Family::Complete, Family::ErdosRenyi, Family::WattsStrogatz,
                                     Family::BarabasiAlbert};
  return f;
}

struct Coherence {
  std::vector<double> t, l1;
};

Coherence coherence_series(const EvolutionModel& model, const Graph& g, std::size_t node, const TimeGrid& grid) {
  Coherence c;
  const GraphHamiltonian h(g);
  evolve_observed(model, h, localized_state(g.size(), node), grid, [&](double t, const DensityMatrix& rho) {
    c.t.push_back(t);
    c.l1.push_back(l1_coherence(rho));
  });
  return c;
}

FitResult fit_l1(const Coherence& c) { return fit_column(c.t, c.l1, std::nullopt, 0); }

// ---------------------------------------------------------------------------

Outcome ac1_triangle() {
  const auto start = Clock::now();
  const GraphHamiltonian h(build_complete(3));
  double worst = 0.0;
  std::size_t samples = 0;
  evolve_observed(Noiseless{}, h, localized_state(3, 0), TimeGrid{30.0, 600}, [&](double t, const DensityMatrix& rho) {
    worst = std::max(worst, max_abs(rho.matrix() - triangle_analytic(t).matrix()));
    ++samples;
  });
  const double secs = seconds_since(start);
  return {worst <= 1e-8 && secs < 1.0 && samples == 600,
          fmt("max entry error %.2e over %zu samples (<= 1e-8), %.3f s (< 1 s)", worst, samples, secs)};
}

struct CptpReport {
  double herm = 0.0, trace = 0.0, min_eig = 0.0, noiseless_entropy = 0.0;
  std::size_t runs = 0, states = 0, violations = 0;
  std::string first_violation;
  double seconds = 0.0;
};

const CptpReport& cptp_suite() {
  static const CptpReport report = [] {
    CptpReport r;
    const auto start = Clock::now();
    for (std::size_t n : {3u, 10u, 50u})
      for (Family f : all_families()) {
        const Graph g = family_graph(f, n, 1);
        const GraphHamiltonian h(g);
        for (const auto& m : all_models()) {
          ++r.runs;
          evolve_observed(m, h, localized_state(n, 0), TimeGrid::default_for(n), [&](double t, const DensityMatrix& rho) {
            const Eigen::VectorXd evals = hermitian_eigenvalues(rho.matrix());
            const auto d = validate(rho, evals);
            ++r.states;
            r.herm = std::max(r.herm, d.hermiticity_defect);
            r.trace = std::max(r.trace, d.trace_defect);
            r.min_eig = std::min(r.min_eig, d.min_eigenvalue);
            if (!d.valid() && r.violations++ == 0)
              r.first_violation = fmt("%s/%s/n=%zu t=%.3f", family_name(f).c_str(), model_name(m).c_str(), n, t);
            if (std::holds_alternative<Noiseless>(m))
              r.noiseless_entropy = std::max(r.noiseless_entropy, entropy_from_eigenvalues(evals));
          });
        }
      }
    r.seconds = seconds_since(start);
    return r;
  }();
  return report;
}

Outcome ac2_cptp() {
  const auto& r = cptp_suite();
  std::string d = fmt("%zu runs, %zu states: max herm %.1e (<= 1e-10), max trace %.1e (<= 1e-9), min eig %.1e (>= -1e-9), "
                      "%zu violations, %.1f s (< 300 s)",
                      r.runs, r.states, r.herm, r.trace, r.min_eig, r.violations, r.seconds);
  if (r.violations) d += "; first: " + r.first_violation;
  return {r.violations == 0 && r.runs == 72 && r.seconds < 300.0, d};
}

Outcome ac3_noiseless_entropy() {
  const auto& r = cptp_suite();
  return {r.noiseless_entropy <= 1e-10, fmt("max entropy over noiseless runs %.2e (<= 1e-10)", r.noiseless_entropy)};
}

Outcome ac4_dqc_asymptote() {
  const GraphHamiltonian h(build_complete(10));
  MetricOptions opts;
  double worst = 0.0;
  std::size_t checked = 0;
  evolve_observed(Noiseless{}, h, localized_state(10, 0), TimeGrid::default_for(10), [&](double t, const DensityMatrix& rho) {
    if (t < 5.0) return;
    ++checked;
    worst = std::max(worst, std::abs(quantum_classical_distance(rho, h.spectrum(), t, FixedInitial{0}) - 0.9));
  });
  return {worst <= 1e-4 && checked > 0, fmt("max |d_qc - 0.9| for t >= 5: %.2e over %zu samples (<= 1e-4)", worst, checked)};
}

Outcome ac5_haken_strobl_classical() {
  const GraphHamiltonian h(build_cycle(10));
  const auto traj = evolve(HakenStrobl{0.1}, h, localized_state(10, 0), TimeGrid::default_for(10));
  const auto& last = traj.states.back();
  double dev = 0.0;
  for (double p : occupation_probabilities(last)) dev = std::max(dev, std::abs(p - 0.1));
  const double l1 = l1_coherence(last);
  return {dev <= 1e-3 && l1 <= 1e-3,
          fmt("t=%.0f: max |p_k - 0.1| = %.3e (<= 1e-3), l1 = %.3e (<= 1e-3)", traj.times.back(), dev, l1)};
}

Outcome ac6_star_hub_equals_complete() {
  const GraphHamiltonian star(build_star(10)), complete(build_complete(10));
  const TimeGrid grid{30.0, 600};
  const auto a = evolve(Noiseless{}, star, localized_state(10, 0), grid);
  const auto b = evolve(Noiseless{}, complete, localized_state(10, 0), grid);
  double worst = 0.0;
  for (std::size_t i = 0; i < a.states.size(); ++i) worst = std::max(worst, std::abs(a.states[i](0, 0).real() - b.states[i](0, 0).real()));
  return {worst <= 1e-8, fmt("max |p_hub(star) - p_0(complete)| over [0, 30]: %.2e (<= 1e-8)", worst)};
}

Outcome ac7_intrinsic_steady() {
  const auto a = coherence_series(Intrinsic{0.1}, build_star(10), 0, TimeGrid{30.0, 600});
  const auto b = coherence_series(Intrinsic{0.1}, build_complete(10), 0, TimeGrid{30.0, 600});
  const double diff = std::abs(a.l1.back() - b.l1.back());
  return {diff <= 0.02, fmt("l1(30): star-hub %.4f, complete %.4f, |diff| %.2e (<= 0.02)", a.l1.back(), b.l1.back(), diff)};
}

struct TableRow {
  const char* label;
  Family family;
  NodePolicy::Kind policy;
  double lambda, beta;
};

Outcome ac8_table1() {
  using K = NodePolicy::Kind;
  const std::vector<TableRow> hs{{"cycle", Family::Cycle, K::Random, 0.14, 0.86},
                                 {"star-hub", Family::Star, K::HighestDegree, 0.03, 0.90},
                                 {"star-peripheral", Family::Star, K::LowestDegree, 0.10, 0.71},
                                 {"complete", Family::Complete, K::Random, 0.03, 0.90}};
  const std::vector<TableRow> qsw{{"cycle", Family::Cycle, K::Random, 0.08, 2.03},
                                  {"star-hub", Family::Star, K::HighestDegree, 0.28, 2.62},
                                  {"star-peripheral", Family::Star, K::LowestDegree, 0.06, 1.23},
                                  {"complete", Family::Complete, K::Random, 2.00, 1.00}};
  const TimeGrid grid = TimeGrid::default_for(10);
  auto node_for = [](const Graph& g, K kind) {
    NodePolicy p;
    p.kind = kind;
    p.seed = derive_seed(1, kNodeSeedStage);
    return select_node(g, p);
  };
  auto block = [&](const std::vector<TableRow>& rows, const EvolutionModel& model, std::string& text) {
    bool ok = true;
    for (const auto& r : rows) {
      const Graph g = family_graph(r.family, 10, 1);
      const auto f = fit_l1(coherence_series(model, g, node_for(g, r.policy), grid));
      const bool hit = std::abs(f.lambda - r.lambda) <= 0.05 && std::abs(f.beta - r.beta) <= 0.10;
      ok = ok && hit;
      text += fmt(" %s %.3f/%.3f vs %.2f/%.2f%s;", r.label, f.lambda, f.beta, r.lambda, r.beta, hit ? "" : " MISS");
    }
    return ok;
  };

  std::string hs_text, qsw_text;
  const bool hs_ok = block(hs, HakenStrobl{0.1}, hs_text);
  const bool qsw_ok = block(qsw, QuantumStochasticWalk{0.1}, qsw_text);

  std::string scan_text;
  bool scan_ok = hs_ok;
  if (!hs_ok) {
    std::vector<double> hits;
    std::string best_row_text;
    int best_rows = -1;
    double best_gamma = 0.0;
    for (int i = 1; i <= 10; ++i) {
      const double gamma = 0.05 * i;
      int rows_hit = 0;
      std::string rows_text;
      for (const auto& r : hs) {
        const Graph g = family_graph(r.family, 10, 1);
        const auto f = fit_l1(coherence_series(HakenStrobl{gamma}, g, node_for(g, r.policy), grid));
        const bool hit = std::abs(f.lambda - r.lambda) <= 0.05 && std::abs(f.beta - r.beta) <= 0.10;
        rows_hit += hit;
        rows_text += fmt(" %s %.3f/%.3f;", r.label, f.lambda, f.beta);
      }
      if (rows_hit == 4) hits.push_back(gamma);
      if (rows_hit > best_rows) {
        best_rows = rows_hit;
        best_gamma = gamma;
        best_row_text = rows_text;
      }
    }
    scan_ok = !hits.empty();
    scan_text = fmt(" | gamma scan 0.05..0.50: %zu values fit all four rows; best gamma %.2f hits %d/4:", hits.size(), best_gamma, best_rows) +
                best_row_text;
  }
  return {scan_ok && qsw_ok, "HS(gamma=0.1):" + hs_text + " QSW(p=0.1):" + qsw_text + scan_text};
}

Outcome ac9_table2() {
  const auto start = Clock::now();
  using K = NodePolicy::Kind;
  struct Cell {
    const char* label;
    Family family;
    K policy;
    EvolutionModel model;
    double lambda, beta;
    std::vector<double> lambdas, betas;
  };
  std::vector<Cell> cells{{"HS/ER", Family::ErdosRenyi, K::Random, HakenStrobl{0.1}, 0.10, 0.84, {}, {}},
                          {"HS/WS", Family::WattsStrogatz, K::Random, HakenStrobl{0.1}, 0.17, 0.96, {}, {}},
                          {"HS/BA", Family::BarabasiAlbert, K::HighestDegree, HakenStrobl{0.1}, 0.24, 0.37, {}, {}},
                          {"QSW/ER", Family::ErdosRenyi, K::Random, QuantumStochasticWalk{0.1}, 0.71, 0.45, {}, {}},
                          {"QSW/WS", Family::WattsStrogatz, K::Random, QuantumStochasticWalk{0.1}, 1.53, 0.90, {}, {}},
                          {"QSW/BA", Family::BarabasiAlbert, K::HighestDegree, QuantumStochasticWalk{0.1}, 0.96, 0.62, {}, {}}};
  const TimeGrid grid = TimeGrid::default_for(100);
  for (std::uint64_t seed = 1; seed <= 20; ++seed)
    for (auto& c : cells) {
      const Graph g = family_graph(c.family, 100, seed);
      NodePolicy p;
      p.kind = c.policy;
      p.seed = derive_seed(seed, kNodeSeedStage);
      const auto f = fit_l1(coherence_series(c.model, g, select_node(g, p), grid));
      c.lambdas.push_back(f.lambda);
      c.betas.push_back(f.beta);
    }
  auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return 0.5 * (v[v.size() / 2 - 1] + v[v.size() / 2]);
  };
  bool cells_ok = true;
  std::string text;
  std::vector<double> ml, mb;
  for (auto& c : cells) {
    const double l = median(c.lambdas), b = median(c.betas);
    ml.push_back(l);
    mb.push_back(b);
    const bool hit = std::abs(l - c.lambda) <= 0.10 && std::abs(b - c.beta) <= 0.15;
    cells_ok = cells_ok && hit;
    text += fmt(" %s %.3f/%.3f vs %.2f/%.2f%s;", c.label, l, b, c.lambda, c.beta, hit ? "" : " MISS");
  }
  const bool beta_order = mb[2] < mb[0] && mb[0] < mb[1];
  const bool lambda_order = ml[4] > ml[5] && ml[5] > ml[3];
  const double secs = seconds_since(start);
  text += fmt(" orderings: HS beta BA<ER<WS %s, QSW lambda WS>BA>ER %s; %.0f s (< 1800 s)", beta_order ? "hold" : "FAIL",
              lambda_order ? "hold" : "FAIL", secs);
  return {cells_ok && beta_order && lambda_order && secs < 1800.0, "medians over 20 seeds:" + text};
}

Outcome ac10_fit_round_trip() {
  double worst = 0.0;
  int cases = 0;
  for (double beta : {0.3, 0.5, 0.8, 1.0, 1.3, 1.7, 2.1, 2.5})
    for (double lambda : {0.05, 0.3, 1.0, 2.0}) {
      std::vector<double> t, v;
      const double t_end = 6.0 / lambda;
      for (int i = 0; i < 300; ++i) {
        t.push_back(t_end * i / 299.0);
        v.push_back(kohlrausch(t.back(), 1.0, lambda, beta));
      }
      const auto f = fit_stretched_exponential(t, v);
      worst = std::max({worst, std::abs(f.lambda - lambda), std::abs(f.beta - beta)});
      ++cases;
    }
  std::vector<double> t{0, 1, 2, 3, 4, 5, 6}, flat(7, 0.4);
  const auto c = fit_stretched_exponential(t, flat);
  return {worst <= 1e-3 && !c.converged,
          fmt("%d synthetic cases, max parameter error %.2e (<= 1e-3); constant input converged=%s", cases, worst,
              c.converged ? "true" : "false")};
}

Outcome ac11_dissipators() {
  Rng rng(2024);
  double worst = 0.0;
  int states = 0;
  for (int i = 0; i < 100; ++i) {
    const std::size_t n = 2 + static_cast<std::size_t>(rng.index(7)); // 2..8
    const Family f = all_families()[rng.index(6)];
    Graph g = n < 3 ? build_complete(2) : family_graph(f, n, 1 + static_cast<std::uint64_t>(i));
    const GraphHamiltonian h(g);
    const DensityMatrix rho(oracle::random_density(static_cast<Eigen::Index>(n), 1 + static_cast<Eigen::Index>(rng.index(n)), rng));
    const double gamma = 0.05 + rng.uniform(), p = rng.uniform();
    worst = std::max(worst, max_abs(rhs(HakenStrobl{gamma}, h, rho) - oracle::haken_strobl_rhs(h.laplacian(), gamma, rho.matrix())));
    worst = std::max(worst, max_abs(rhs(QuantumStochasticWalk{p}, h, rho) - oracle::qsw_rhs(h.laplacian(), p, rho.matrix())));
    ++states;
  }
  return {worst <= 1e-12, fmt("%d random states (n <= 8), max |simplified - literal| %.2e (<= 1e-12)", states, worst)};
}

Outcome ac12_spectral_vs_rk() {
  double worst = 0.0;
  for (Family f : all_families()) {
    const GraphHamiltonian h(family_graph(f, 10, 1));
    const TimeGrid grid{20.0, 400};
    EvolveOptions forced;
    forced.force_integrator = true;
    const auto a = evolve(Intrinsic{0.1}, h, localized_state(10, 0), grid);
    const auto b = evolve(Intrinsic{0.1}, h, localized_state(10, 0), grid, forced);
    for (std::size_t i = 0; i < a.states.size(); ++i) worst = std::max(worst, max_abs(a.states[i].matrix() - b.states[i].matrix()));
  }
  return {worst <= 1e-6, fmt("6 topologies, N=10, t in [0, 20]: max entry difference %.2e (<= 1e-6)", worst)};
}

} // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"triangle closed form", ac1_triangle},
      {"CPTP suite", ac2_cptp},
      {"noiseless entropy", ac3_noiseless_entropy},
      {"d_qc asymptote", ac4_dqc_asymptote},
      {"Haken-Strobl classicalization", ac5_haken_strobl_classical},
      {"star hub equals complete", ac6_star_hub_equals_complete},
      {"intrinsic steady coherence", ac7_intrinsic_steady},
      {"simple-topology decay table", ac8_table1},
      {"random-network decay table", ac9_table2},
      {"fit round trip", ac10_fit_round_trip},
      {"dissipator equivalence", ac11_dissipators},
      {"spectral vs integrator", ac12_spectral_vs_rk},
  };

  std::set<int> only;
  if (const char* env = std::getenv("CTQW_ACCEPTANCE_ONLY")) {
    std::stringstream ss(env);
    std::string item;
    while (std::getline(ss, item, ',')) only.insert(std::stoi(item));
  }

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s AC%-2d %s: %s\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
