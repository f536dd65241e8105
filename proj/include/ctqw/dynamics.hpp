#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "ctqw/errors.hpp"
#include "ctqw/graph.hpp"
#include "ctqw/integrator.hpp"
#include "ctqw/state.hpp"

namespace ctqw {

// ---------------------------------------------------------------------------
// Evolution models
// ---------------------------------------------------------------------------

/// drho/dt = -i[L, rho]
struct Noiseless {};

/// Milburn intrinsic decoherence: -i[L, rho] - (gamma/2)[L, [L, rho]].
struct Intrinsic {
  double gamma = 0.1;
};

/// Position-basis dephasing with projector jump operators P_k = |k><k|:
/// -i[L, rho] + gamma (diag(rho) - rho).
struct HakenStrobl {
  double gamma = 0.1;
};

/// Quantum stochastic walk with jump operators P_kj = L_kj |k><j| over all (k, j),
/// diagonal pairs included: -(1-p) i[L, rho] + p (diag(W q) - {S, rho}/2),
/// W_kj = L_kj^2, q = diag(rho), S = diag(column sums of W).
struct QuantumStochasticWalk {
  double p = 0.1;
};

using EvolutionModel = std::variant<Noiseless, Intrinsic, HakenStrobl, QuantumStochasticWalk>;

inline void check_model(const EvolutionModel& model) {
  std::visit(
      [](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, Intrinsic> || std::is_same_v<M, HakenStrobl>) {
          if (!(m.gamma >= 0.0) || !std::isfinite(m.gamma)) throw InvalidArgument("decoherence rate gamma must be >= 0");
        } else if constexpr (std::is_same_v<M, QuantumStochasticWalk>) {
          if (!(m.p >= 0.0 && m.p <= 1.0)) throw InvalidArgument("QSW mixing p must lie in [0, 1]");
        }
      },
      model);
}

inline std::string model_name(const EvolutionModel& model) {
  constexpr const char* names[] = {"noiseless", "intrinsic", "haken_strobl", "qsw"};
  return names[model.index()];
}

/// Noiseless and Intrinsic have an exact eigenbasis solution.
/// Noiseless, Intrinsic, and the zero-rate limits of Haken–Strobl and QSW.
inline bool has_spectral_solution(const EvolutionModel& model) {
  if (const auto* hs = std::get_if<HakenStrobl>(&model)) return hs->gamma == 0.0;
  if (const auto* q = std::get_if<QuantumStochasticWalk>(&model)) return q->p == 0.0;
  return true;
}

// ---------------------------------------------------------------------------
// Hamiltonian
// ---------------------------------------------------------------------------

/// Eigen-decomposition L V = V diag(E), E ascending, V orthonormal.
struct SpectralDecomposition {
  Eigen::VectorXd energies;
  Eigen::MatrixXd vectors;

  static SpectralDecomposition of(const Eigen::MatrixXd& symmetric) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(symmetric);
    if (solver.info() != Eigen::Success) throw InvalidArgument("SpectralDecomposition: eigen-solver failed");
    return {solver.eigenvalues(), solver.eigenvectors()};
  }
};

/// Graph Laplacian used as the walk Hamiltonian, together with everything derived from
/// it once per graph: the spectrum and the QSW rate tables.
class GraphHamiltonian {
public:
  explicit GraphHamiltonian(Eigen::MatrixXd laplacian) : l_(std::move(laplacian)) {
    if (l_.rows() != l_.cols() || l_.rows() == 0) throw DimensionMismatch("GraphHamiltonian: Laplacian must be square");
    if ((l_ - l_.transpose()).cwiseAbs().maxCoeff() > 0.0) throw InvalidArgument("GraphHamiltonian: Laplacian must be symmetric");
    spectrum_ = SpectralDecomposition::of(l_);
    qsw_rates_ = l_.cwiseAbs2();
    qsw_escape_ = qsw_rates_.colwise().sum().transpose();
  }

  explicit GraphHamiltonian(const Graph& g) : GraphHamiltonian(ctqw::laplacian(g)) {}

  std::size_t dim() const noexcept { return static_cast<std::size_t>(l_.rows()); }
  const Eigen::MatrixXd& laplacian() const noexcept { return l_; }
  const SpectralDecomposition& spectrum() const noexcept { return spectrum_; }
  /// W_kj = L_kj^2
  const Eigen::MatrixXd& qsw_rates() const noexcept { return qsw_rates_; }
  /// s_j = sum_k W_kj
  const Eigen::VectorXd& qsw_escape() const noexcept { return qsw_escape_; }

private:
  Eigen::MatrixXd l_;
  SpectralDecomposition spectrum_;
  Eigen::MatrixXd qsw_rates_;
  Eigen::VectorXd qsw_escape_;
};

// ---------------------------------------------------------------------------
// Right-hand sides
// ---------------------------------------------------------------------------

namespace detail {

inline constexpr Complex kI{0.0, 1.0};

// Adds the dissipator of `model` (everything but the -i[L, rho] part) to `out`.
inline void add_dissipator(const EvolutionModel& model, const GraphHamiltonian& h, const ComplexMatrix& rho,
                           const ComplexMatrix& commutator, ComplexMatrix& out) {
  std::visit(
      [&](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, Intrinsic>) {
          // [L, C] with C = [L, rho]
          out.noalias() -= (0.5 * m.gamma) * (h.laplacian() * commutator - commutator * h.laplacian());
        } else if constexpr (std::is_same_v<M, HakenStrobl>) {
          out -= m.gamma * rho;
          out.diagonal() += m.gamma * rho.diagonal();
        } else if constexpr (std::is_same_v<M, QuantumStochasticWalk>) {
          const auto n = rho.rows();
          const Eigen::VectorXd& s = h.qsw_escape();
          for (Eigen::Index b = 0; b < n; ++b)
            for (Eigen::Index a = 0; a < n; ++a) out(a, b) -= 0.5 * m.p * (s(a) + s(b)) * rho(a, b);
          const Eigen::VectorXd q = rho.diagonal().real();
          out.diagonal() += (m.p * (h.qsw_rates() * q)).template cast<Complex>();
        }
      },
      model);
}

inline double unitary_weight(const EvolutionModel& model) {
  if (const auto* qsw = std::get_if<QuantumStochasticWalk>(&model)) return 1.0 - qsw->p;
  return 1.0;
}

/// rhs for Hermitian rho: uses rho L = (L rho)^dagger, so each commutator is one product.
inline void hermitian_rhs(const EvolutionModel& model, const GraphHamiltonian& h, const ComplexMatrix& rho,
                          ComplexMatrix& out, ComplexMatrix& scratch) {
  scratch.noalias() = h.laplacian() * rho;
  const ComplexMatrix commutator = scratch - scratch.adjoint();
  out = (-unitary_weight(model) * kI) * commutator;
  if (const auto* intrinsic = std::get_if<Intrinsic>(&model)) {
    // [L, C] for anti-Hermitian C equals L C + (L C)^dagger.
    scratch.noalias() = h.laplacian() * commutator;
    out -= (0.5 * intrinsic->gamma) * (scratch + scratch.adjoint());
    return;
  }
  add_dissipator(model, h, rho, commutator, out);
}

} // namespace detail

/// drho/dt for any square rho (Hermiticity not assumed).
inline ComplexMatrix rhs(const EvolutionModel& model, const GraphHamiltonian& h, const DensityMatrix& rho) {
  if (rho.dim() != h.dim())
    throw DimensionMismatch("rhs: state dimension " + std::to_string(rho.dim()) + " != Laplacian dimension " +
                            std::to_string(h.dim()));
  const auto& r = rho.matrix();
  const ComplexMatrix commutator = h.laplacian() * r - r * h.laplacian();
  ComplexMatrix out = (-detail::unitary_weight(model) * detail::kI) * commutator;
  detail::add_dissipator(model, h, r, commutator, out);
  return out;
}

// ---------------------------------------------------------------------------
// Time grids
// ---------------------------------------------------------------------------

/// `samples` uniform times on [0, t_end], endpoints included.
struct TimeGrid {
  double t_end = 30.0;
  std::size_t samples = 600;

  void check() const {
    if (!(t_end > 0.0) || !std::isfinite(t_end)) throw InvalidArgument("TimeGrid: t_end must be positive");
    if (samples < 2) throw InvalidArgument("TimeGrid: need at least 2 samples");
  }

  std::vector<double> times() const {
    check();
    std::vector<double> t(samples);
    for (std::size_t i = 0; i < samples; ++i)
      t[i] = t_end * static_cast<double>(i) / static_cast<double>(samples - 1);
    t.back() = t_end;
    return t;
  }

  /// [0, 30] x 600 for small graphs, [0, 10] x 400 beyond ten nodes.
  static TimeGrid default_for(std::size_t n) { return n <= 10 ? TimeGrid{30.0, 600} : TimeGrid{10.0, 400}; }
};

// ---------------------------------------------------------------------------
// Propagation
// ---------------------------------------------------------------------------

/// Closed-form Noiseless / Intrinsic propagation in the Laplacian eigenbasis:
/// rho~_mn(t) = rho~_mn(0) exp(-i w t - (gamma/2) w^2 t), w = E_m - E_n.
class SpectralPropagator {
public:
  SpectralPropagator(const EvolutionModel& model, const SpectralDecomposition& spec, const DensityMatrix& rho0)
      : spec_(spec) {
    if (!has_spectral_solution(model)) throw InvalidArgument("SpectralPropagator: model " + model_name(model) + " has no closed form");
    if (rho0.dim() != static_cast<std::size_t>(spec.energies.size())) throw DimensionMismatch("SpectralPropagator: dimension mismatch");
    gamma_ = std::holds_alternative<Intrinsic>(model) ? std::get<Intrinsic>(model).gamma : 0.0;
    rho0_eigen_ = spec.vectors.transpose() * rho0.matrix() * spec.vectors;
  }

  /// State in the eigenbasis, rho~(t).
  ComplexMatrix eigenbasis_at(double t) const {
    const auto n = rho0_eigen_.rows();
    const auto& e = spec_.energies;
    ComplexMatrix r(n, n);
    for (Eigen::Index b = 0; b < n; ++b)
      for (Eigen::Index a = 0; a < n; ++a) {
        const double w = e(a) - e(b);
        r(a, b) = rho0_eigen_(a, b) * std::exp(Complex(-0.5 * gamma_ * w * w * t, -w * t));
      }
    return r;
  }

  DensityMatrix at(double t) const {
    return DensityMatrix(spec_.vectors * eigenbasis_at(t) * spec_.vectors.transpose());
  }

private:
  const SpectralDecomposition& spec_;
  double gamma_ = 0.0;
  ComplexMatrix rho0_eigen_;
};

inline DensityMatrix evolve_spectral(const EvolutionModel& model, const SpectralDecomposition& spec,
                                     const DensityMatrix& rho0, double t) {
  if (t == 0.0) return rho0;
  return SpectralPropagator(model, spec, rho0).at(t);
}

struct EvolveOptions {
  double tolerance = 1e-8;
  bool force_integrator = false; // integrate Noiseless/Intrinsic numerically too
};

/// Calls `observe(t, rho)` at every grid time. Models with a closed form use the exact
/// spectral path, Haken–Strobl and QSW adaptive Dormand–Prince with tolerance `opts.tolerance`.
template <class Observer>
void evolve_observed(const EvolutionModel& model, const GraphHamiltonian& h, const DensityMatrix& rho0,
                     const TimeGrid& grid, Observer&& observe, const EvolveOptions& opts = {}) {
  check_model(model);
  if (rho0.dim() != h.dim()) throw DimensionMismatch("evolve: initial state dimension does not match Laplacian");
  if (!(opts.tolerance > 0.0)) throw InvalidArgument("evolve: tolerance must be positive");
  const auto times = grid.times();

  if (has_spectral_solution(model) && !opts.force_integrator) {
    const SpectralPropagator prop(model, h.spectrum(), rho0);
    for (double t : times) observe(t, t == 0.0 ? rho0 : prop.at(t));
    return;
  }

  ComplexMatrix scratch(rho0.matrix().rows(), rho0.matrix().cols());
  auto f = [&](double, const ComplexMatrix& rho, ComplexMatrix& out) { detail::hermitian_rhs(model, h, rho, out, scratch); };
  Dopri5Options ode;
  ode.abs_tol = opts.tolerance;
  ode.rel_tol = opts.tolerance;
  ode.max_norm = true;
  integrate_dopri5<ComplexMatrix>(f, rho0.matrix(), 0.0, times,
                                  [&](double t, const ComplexMatrix& rho) { observe(t, DensityMatrix(rho)); }, ode);
}

struct Trajectory {
  std::vector<double> times;
  std::vector<DensityMatrix> states;
};

inline Trajectory evolve(const EvolutionModel& model, const GraphHamiltonian& h, const DensityMatrix& rho0,
                         const TimeGrid& grid, const EvolveOptions& opts = {}) {
  Trajectory traj;
  traj.times.reserve(grid.samples);
  traj.states.reserve(grid.samples);
  evolve_observed(
      model, h, rho0, grid,
      [&](double t, const DensityMatrix& rho) {
        traj.times.push_back(t);
        traj.states.push_back(rho);
      },
      opts);
  return traj;
}

// ---------------------------------------------------------------------------
// Classical reference dynamics
// ---------------------------------------------------------------------------

inline constexpr double kHeatKernelClamp = -1e-12;

/// exp(-L t) from the spectrum; entries in [-1e-12, 0) are reported as 0.
inline Eigen::MatrixXd classical_heat_kernel(const SpectralDecomposition& spec, double t) {
  if (!(t >= 0.0)) throw InvalidArgument("classical_heat_kernel: t must be >= 0");
  const Eigen::VectorXd decay = (-spec.energies * t).array().exp();
  Eigen::MatrixXd k = spec.vectors * decay.asDiagonal() * spec.vectors.transpose();
  return k.unaryExpr([](double x) { return (x < 0.0 && x >= kHeatKernelClamp) ? 0.0 : x; });
}

/// Column j of exp(-L t): transition probabilities p_kj(t) out of node j.
inline Eigen::VectorXd heat_kernel_column(const SpectralDecomposition& spec, double t, std::size_t j) {
  if (!(t >= 0.0)) throw InvalidArgument("heat_kernel_column: t must be >= 0");
  if (j >= static_cast<std::size_t>(spec.energies.size())) throw InvalidArgument("heat_kernel_column: node out of range");
  const Eigen::VectorXd decay = (-spec.energies * t).array().exp();
  const Eigen::VectorXd coeff = decay.cwiseProduct(spec.vectors.row(static_cast<Eigen::Index>(j)).transpose());
  Eigen::VectorXd col = spec.vectors * coeff;
  return col.unaryExpr([](double x) { return (x < 0.0 && x >= kHeatKernelClamp) ? 0.0 : x; });
}

// ---------------------------------------------------------------------------
// Triangle reference solution
// ---------------------------------------------------------------------------

/// Closed-form noiseless state on the triangle started from |0><0|.
inline DensityMatrix triangle_analytic(double t) {
  if (!(t >= 0.0)) throw InvalidArgument("triangle_analytic: t must be >= 0");
  const Complex plus = std::exp(Complex(0.0, 3.0 * t));   // e^{3it}
  const Complex minus = std::exp(Complex(0.0, -3.0 * t)); // e^{-3it}
  const double c = std::cos(3.0 * t);
  const Complex r01 = (-1.0 + 2.0 * minus - plus) / 9.0;
  const Complex r10 = (-1.0 + 2.0 * plus - minus) / 9.0;
  const double pp = (2.0 - 2.0 * c) / 9.0;
  ComplexMatrix m(3, 3);
  m << (5.0 + 4.0 * c) / 9.0, r01, r01,
       r10, pp, pp,
       r10, pp, pp;
  return DensityMatrix(std::move(m));
}

} // namespace ctqw
