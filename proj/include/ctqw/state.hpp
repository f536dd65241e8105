#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <utility>

#include <Eigen/Dense>
#include <json.hpp>

#include "ctqw/errors.hpp"

namespace ctqw {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

/// Tolerances a physical density matrix must meet.
struct StateTolerances {
  double hermiticity = 1e-10;
  double trace = 1e-9;
  double min_eigenvalue = -1e-9;
};

/// N x N density matrix in the node (position) basis.
///
/// Construction never checks or repairs physicality; call `validate` to get the
/// defects. Integrator drift is meant to be visible, not silently renormalized.
class DensityMatrix {
public:
  explicit DensityMatrix(ComplexMatrix entries) : rho_(std::move(entries)) {
    if (rho_.rows() != rho_.cols() || rho_.rows() == 0)
      throw DimensionMismatch("DensityMatrix: entries must be a non-empty square matrix");
  }

  std::size_t dim() const noexcept { return static_cast<std::size_t>(rho_.rows()); }
  const ComplexMatrix& matrix() const noexcept { return rho_; }
  Complex operator()(std::size_t i, std::size_t j) const { return rho_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)); }

  Complex trace() const { return rho_.trace(); }

private:
  ComplexMatrix rho_;
};

/// Normalized state vector.
class PureState {
public:
  explicit PureState(ComplexVector amplitudes) : psi_(std::move(amplitudes)) {
    if (psi_.size() == 0) throw InvalidArgument("PureState: empty amplitude vector");
    if (std::abs(psi_.norm() - 1.0) > 1e-12)
      throw InvalidArgument("PureState: amplitudes must have unit norm, got " + std::to_string(psi_.norm()));
  }

  static PureState basis(std::size_t n, std::size_t j) {
    if (j >= n) throw InvalidArgument("PureState::basis: index out of range");
    ComplexVector v = ComplexVector::Zero(static_cast<Eigen::Index>(n));
    v(static_cast<Eigen::Index>(j)) = 1.0;
    return PureState(std::move(v));
  }

  std::size_t dim() const noexcept { return static_cast<std::size_t>(psi_.size()); }
  const ComplexVector& amplitudes() const noexcept { return psi_; }
  DensityMatrix density() const { return DensityMatrix(psi_ * psi_.adjoint()); }

private:
  ComplexVector psi_;
};

/// |j><j| on n nodes.
inline DensityMatrix localized_state(std::size_t n, std::size_t j) {
  if (j >= n)
    throw InvalidArgument("localized_state: node " + std::to_string(j) + " out of range for n = " + std::to_string(n));
  ComplexMatrix rho = ComplexMatrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  rho(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)) = 1.0;
  return DensityMatrix(std::move(rho));
}

struct StateDiagnostics {
  double hermiticity_defect = 0.0; // max |rho - rho^dagger|
  double trace_defect = 0.0;       // |Tr rho - 1|
  double min_eigenvalue = 0.0;     // of the Hermitian part
  bool hermitian = true;
  bool unit_trace = true;
  bool positive = true;

  bool valid() const noexcept { return hermitian && unit_trace && positive; }
};

/// Eigenvalues of the Hermitian part, ascending.
inline Eigen::VectorXd hermitian_eigenvalues(const ComplexMatrix& m) {
  const ComplexMatrix h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h, Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

/// `evals` are the eigenvalues of rho's Hermitian part.
inline StateDiagnostics validate(const DensityMatrix& rho, const Eigen::VectorXd& evals, const StateTolerances& tol = {}) {
  const auto& m = rho.matrix();
  StateDiagnostics d;
  d.hermiticity_defect = (m - m.adjoint()).cwiseAbs().maxCoeff();
  d.trace_defect = std::abs(m.trace() - Complex(1.0, 0.0));
  d.min_eigenvalue = evals.minCoeff();
  d.hermitian = d.hermiticity_defect <= tol.hermiticity;
  d.unit_trace = d.trace_defect <= tol.trace;
  d.positive = d.min_eigenvalue >= tol.min_eigenvalue;
  return d;
}

inline StateDiagnostics validate(const DensityMatrix& rho, const StateTolerances& tol = {}) {
  return validate(rho, hermitian_eigenvalues(rho.matrix()), tol);
}

/// Tr rho^2; for Hermitian rho this is the squared Frobenius norm.
inline double purity(const DensityMatrix& rho) {
  return rho.matrix().cwiseAbs2().sum();
}

// Snapshot format: {"dim": n, "entries": [[re, im], ...]} in row-major order.

inline nlohmann::ordered_json snapshot_json(const DensityMatrix& rho) {
  nlohmann::ordered_json entries = nlohmann::ordered_json::array();
  const auto n = static_cast<Eigen::Index>(rho.dim());
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) entries.push_back({rho.matrix()(i, j).real(), rho.matrix()(i, j).imag()});
  nlohmann::ordered_json out;
  out["dim"] = rho.dim();
  out["entries"] = std::move(entries);
  return out;
}

template <class Json>
DensityMatrix density_from_snapshot(const Json& j) {
  try {
    const auto n = j.at("dim").template get<std::size_t>();
    const auto& entries = j.at("entries");
    if (n == 0 || entries.size() != n * n) throw InvalidArgument("snapshot: entry count does not match dim");
    ComplexMatrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    std::size_t k = 0;
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < n; ++c, ++k)
        m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
            Complex(entries[k].at(0).template get<double>(), entries[k].at(1).template get<double>());
    return DensityMatrix(std::move(m));
  } catch (const nlohmann::detail::exception& e) {
    throw InvalidArgument(std::string("snapshot: ") + e.what());
  }
}

} // namespace ctqw
