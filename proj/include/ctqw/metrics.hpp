#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "ctqw/dynamics.hpp"
#include "ctqw/errors.hpp"
#include "ctqw/state.hpp"

namespace ctqw {

enum class LogBase { Natural, Two };

/// Eigenvalues at or above this (negative) value count as zero in the entropy.
inline constexpr double kEigenvalueFloor = -1e-9;

inline std::vector<double> occupation_probabilities(const DensityMatrix& rho) {
  const auto n = rho.dim();
  std::vector<double> p(n);
  for (std::size_t k = 0; k < n; ++k) p[k] = std::max(0.0, rho(k, k).real());
  return p;
}

/// Sum of |rho_ij| over i != j.
inline double l1_coherence(const DensityMatrix& rho) {
  const auto& m = rho.matrix();
  return m.cwiseAbs().sum() - m.diagonal().cwiseAbs().sum();
}

namespace detail {

// Numerical-rank cutoff: eigenvalues below n * eps * max are treated as exact zeros,
// so rank-deficient states do not pick up sqrt(roundoff) contributions.
inline double rank_cutoff(const Eigen::VectorXd& evals) {
  const double top = std::max(evals.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
  return static_cast<double>(evals.size()) * std::numeric_limits<double>::epsilon() * top;
}

inline ComplexMatrix psd_sqrt(const ComplexMatrix& m) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(0.5 * (m + m.adjoint()));
  Eigen::VectorXd e = solver.eigenvalues();
  const double cut = rank_cutoff(e);
  for (Eigen::Index i = 0; i < e.size(); ++i) e(i) = e(i) > cut ? std::sqrt(e(i)) : 0.0;
  return solver.eigenvectors() * e.asDiagonal() * solver.eigenvectors().adjoint();
}

// [Tr sqrt(m)]^2 for PSD m.
inline double squared_trace_sqrt(const ComplexMatrix& m) {
  const Eigen::VectorXd e = hermitian_eigenvalues(m);
  const double cut = rank_cutoff(e);
  double s = 0.0;
  for (Eigen::Index i = 0; i < e.size(); ++i)
    if (e(i) > cut) s += std::sqrt(e(i));
  return std::clamp(s * s, 0.0, 1.0);
}

} // namespace detail

/// Uhlmann fidelity [Tr sqrt(sqrt(a) b sqrt(a))]^2.
inline double fidelity(const DensityMatrix& a, const DensityMatrix& b) {
  if (a.dim() != b.dim()) throw DimensionMismatch("fidelity: states have different dimensions");
  const ComplexMatrix sa = detail::psd_sqrt(a.matrix());
  return detail::squared_trace_sqrt(sa * b.matrix() * sa);
}

/// Fidelity against a pure state: <psi|rho|psi>.
inline double fidelity(const PureState& psi, const DensityMatrix& rho) {
  if (psi.dim() != rho.dim()) throw DimensionMismatch("fidelity: states have different dimensions");
  const auto& v = psi.amplitudes();
  return std::clamp((v.adjoint() * rho.matrix() * v)(0).real(), 0.0, 1.0);
}

/// Fidelity between a diagonal state with populations `p` and rho; sqrt(diag p) is exact.
inline double fidelity_diagonal(const Eigen::VectorXd& p, const DensityMatrix& rho) {
  if (static_cast<std::size_t>(p.size()) != rho.dim()) throw DimensionMismatch("fidelity: states have different dimensions");
  const Eigen::VectorXd s = p.cwiseMax(0.0).cwiseSqrt();
  const ComplexMatrix m = s.asDiagonal() * rho.matrix() * s.asDiagonal();
  return detail::squared_trace_sqrt(m);
}

/// -sum lambda log(lambda) from precomputed eigenvalues.
inline double entropy_from_eigenvalues(const Eigen::VectorXd& evals, LogBase base = LogBase::Natural) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < evals.size(); ++i) {
    const double l = evals(i);
    if (l < kEigenvalueFloor)
      throw InvalidStateError("von_neumann_entropy: eigenvalue " + std::to_string(l) + " below " + std::to_string(kEigenvalueFloor));
    if (l > 0.0) s -= l * std::log(l);
  }
  if (base == LogBase::Two) s /= std::numbers::ln2;
  return std::max(0.0, s);
}

inline double von_neumann_entropy(const DensityMatrix& rho, LogBase base = LogBase::Natural) {
  return entropy_from_eigenvalues(hermitian_eigenvalues(rho.matrix()), base);
}

/// sum_k p_kj(t) |k><k| with p_kj the heat-kernel transition probabilities out of j.
inline DensityMatrix classical_state(const SpectralDecomposition& spec, double t, std::size_t j) {
  const Eigen::VectorXd p = heat_kernel_column(spec, t, j);
  return DensityMatrix(p.cast<Complex>().asDiagonal().toDenseMatrix());
}

inline DensityMatrix classical_state(const Eigen::MatrixXd& laplacian, double t, std::size_t j) {
  return classical_state(SpectralDecomposition::of(laplacian), t, j);
}

/// Compare against the classical walk from one fixed starting node.
struct FixedInitial {
  std::size_t node = 0;
};
/// 1 - min_j F over all localized starting nodes j (n fidelity evaluations per sample).
struct MinOverLocalized {};
using DistanceMode = std::variant<FixedInitial, MinOverLocalized>;

/// 1 - F(rho_classical(t), rho_quantum(t)).
inline double quantum_classical_distance(const DensityMatrix& rho_q, const SpectralDecomposition& spec, double t,
                                         const DistanceMode& mode) {
  const auto n = static_cast<std::size_t>(spec.energies.size());
  if (rho_q.dim() != n) throw DimensionMismatch("quantum_classical_distance: state and Laplacian dimensions differ");
  if (const auto* fixed = std::get_if<FixedInitial>(&mode)) {
    return std::clamp(1.0 - fidelity_diagonal(heat_kernel_column(spec, t, fixed->node), rho_q), 0.0, 1.0);
  }
  const Eigen::MatrixXd kernel = classical_heat_kernel(spec, t);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < n; ++j)
    best = std::min(best, fidelity_diagonal(kernel.col(static_cast<Eigen::Index>(j)), rho_q));
  return std::clamp(1.0 - best, 0.0, 1.0);
}

struct MetricRecord {
  double t = 0.0;
  std::vector<double> occupations;
  double l1_coherence = 0.0;
  double fidelity_with_initial = 0.0;
  double entropy = 0.0;
  double d_qc = 0.0;
};

struct MetricOptions {
  DistanceMode d_qc_mode = FixedInitial{};
  LogBase entropy_base = LogBase::Natural;
};

/// All five quantifiers for one sampled state evolved from |initial_node><initial_node|.
/// `evals` are the state's eigenvalues when the caller already has them.
inline MetricRecord compute_metrics(double t, const DensityMatrix& rho, const SpectralDecomposition& spec,
                                    std::size_t initial_node, const MetricOptions& opts,
                                    const Eigen::VectorXd* evals = nullptr) {
  MetricRecord r;
  r.t = t;
  r.occupations = occupation_probabilities(rho);
  r.l1_coherence = l1_coherence(rho);
  r.fidelity_with_initial = std::clamp(rho(initial_node, initial_node).real(), 0.0, 1.0);
  r.entropy = evals ? entropy_from_eigenvalues(*evals, opts.entropy_base) : von_neumann_entropy(rho, opts.entropy_base);
  DistanceMode mode = opts.d_qc_mode;
  if (auto* fixed = std::get_if<FixedInitial>(&mode)) fixed->node = initial_node;
  r.d_qc = quantum_classical_distance(rho, spec, t, mode);
  return r;
}

inline std::vector<MetricRecord> metric_series(const Trajectory& traj, const SpectralDecomposition& spec,
                                               std::size_t initial_node, const MetricOptions& opts = {}) {
  std::vector<MetricRecord> out;
  out.reserve(traj.times.size());
  for (std::size_t i = 0; i < traj.times.size(); ++i)
    out.push_back(compute_metrics(traj.times[i], traj.states[i], spec, initial_node, opts));
  return out;
}

} // namespace ctqw
