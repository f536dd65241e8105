#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "ctqw/ctqw.hpp"
#include "oracles.hpp"

using namespace ctqw;

namespace {

DensityMatrix diag_state(std::initializer_list<double> p) {
  ComplexMatrix m = ComplexMatrix::Zero(static_cast<Eigen::Index>(p.size()), static_cast<Eigen::Index>(p.size()));
  Eigen::Index i = 0;
  for (double x : p) {
    m(i, i) = x;
    ++i;
  }
  return DensityMatrix(m);
}

DensityMatrix uniform_superposition(std::size_t n) {
  return PureState(ComplexVector::Constant(static_cast<Eigen::Index>(n), 1.0 / std::sqrt(static_cast<double>(n)))).density();
}

} // namespace

TEST(Occupations, BasicCases) {
  EXPECT_EQ(occupation_probabilities(localized_state(3, 0)), (std::vector<double>{1, 0, 0}));
  const auto p = occupation_probabilities(triangle_analytic(std::numbers::pi / 3.0));
  EXPECT_NEAR(p[0], 1.0 / 9.0, 1e-15);
  EXPECT_NEAR(p[1], 4.0 / 9.0, 1e-15);
  const auto u = occupation_probabilities(DensityMatrix(ComplexMatrix::Identity(4, 4) / 4.0));
  for (double x : u) EXPECT_DOUBLE_EQ(x, 0.25);
}

TEST(Coherence, L1Values) {
  EXPECT_EQ(l1_coherence(diag_state({0.2, 0.3, 0.5})), 0.0);
  EXPECT_NEAR(l1_coherence(uniform_superposition(7)), 6.0, 1e-13);
  EXPECT_NEAR(l1_coherence(triangle_analytic(std::numbers::pi / 3.0)), 16.0 / 9.0, 1e-14);
}

TEST(Fidelity, BasicCases) {
  const auto a = localized_state(4, 0);
  EXPECT_NEAR(fidelity(a, a), 1.0, 1e-12);
  EXPECT_NEAR(fidelity(a, localized_state(4, 1)), 0.0, 1e-14);
  const DensityMatrix mixed(ComplexMatrix::Identity(4, 4) / 4.0);
  EXPECT_NEAR(fidelity(PureState::basis(4, 0), mixed), 0.25, 1e-15);
  EXPECT_NEAR(fidelity(a, mixed), 0.25, 1e-12);
  EXPECT_NEAR(fidelity(mixed, a), 0.25, 1e-12);
  EXPECT_THROW(fidelity(a, localized_state(3, 0)), DimensionMismatch);
}

TEST(Fidelity, CommutingStatesReduceToClassicalOverlap) {
  const auto p = diag_state({0.1, 0.2, 0.3, 0.4});
  const auto q = diag_state({0.4, 0.4, 0.1, 0.1});
  const double expected = oracle::classical_fidelity({0.1, 0.2, 0.3, 0.4}, {0.4, 0.4, 0.1, 0.1});
  EXPECT_NEAR(fidelity(p, q), expected, 1e-12);
  Eigen::VectorXd pv(4);
  pv << 0.1, 0.2, 0.3, 0.4;
  EXPECT_NEAR(fidelity_diagonal(pv, q), expected, 1e-12);
}

TEST(Fidelity, PurePathMatchesGeneralAndIsSymmetric) {
  Rng rng(21);
  for (int trial = 0; trial < 30; ++trial) {
    const Eigen::Index n = 2 + trial % 9;
    ComplexVector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = Complex(rng.uniform() - 0.5, rng.uniform() - 0.5);
    const PureState psi(v / v.norm());
    const DensityMatrix rho(oracle::random_density(n, 1 + trial % 4, rng));
    const double fast = fidelity(psi, rho);
    EXPECT_NEAR(fast, fidelity(psi.density(), rho), 1e-8);
    EXPECT_NEAR(fidelity(rho, psi.density()), fidelity(psi.density(), rho), 1e-8);
    // Two mixed states, symmetric too.
    const DensityMatrix sigma(oracle::random_density(n, n, rng));
    EXPECT_NEAR(fidelity(rho, sigma), fidelity(sigma, rho), 1e-8);
    EXPECT_GE(fidelity(rho, sigma), 0.0);
    EXPECT_LE(fidelity(rho, sigma), 1.0);
  }
}

TEST(Fidelity, PurePairIsSquaredOverlap) {
  ComplexVector a(3), b(3);
  a << Complex(0.6, 0), Complex(0, 0.8), 0;
  b << Complex(0, 0.6), 0, Complex(0.8, 0);
  const double overlap = std::norm(a.dot(b));
  EXPECT_NEAR(fidelity(PureState(a).density(), PureState(b).density()), overlap, 1e-10);
}

TEST(Entropy, BasicCases) {
  EXPECT_NEAR(von_neumann_entropy(localized_state(5, 1)), 0.0, 1e-15);
  EXPECT_NEAR(von_neumann_entropy(uniform_superposition(5)), 0.0, 1e-12);
  EXPECT_NEAR(von_neumann_entropy(DensityMatrix(ComplexMatrix::Identity(10, 10) / 10.0)), std::log(10.0), 1e-12);
  EXPECT_NEAR(von_neumann_entropy(diag_state({0.5, 0.5, 0.0})), std::log(2.0), 1e-15);
  EXPECT_NEAR(von_neumann_entropy(diag_state({0.5, 0.5, 0.0}), LogBase::Two), 1.0, 1e-15);
  EXPECT_THROW(von_neumann_entropy(diag_state({1.1, -0.1})), InvalidStateError);
  EXPECT_NO_THROW(von_neumann_entropy(diag_state({1.0 + 5e-10, -5e-10})));
}

TEST(Entropy, BoundedByLogN) {
  Rng rng(2);
  for (int i = 0; i < 20; ++i) {
    const DensityMatrix rho(oracle::random_density(6, 1 + i % 6, rng));
    const double s = von_neumann_entropy(rho);
    EXPECT_GE(s, 0.0);
    EXPECT_LT(s, std::log(6.0));
    // Unitary invariance: diagonal of eigenvalues gives the same entropy as Shannon.
    const Eigen::VectorXd e = hermitian_eigenvalues(rho.matrix());
    EXPECT_NEAR(s, oracle::shannon(std::vector<double>(e.data(), e.data() + e.size())), 1e-12);
  }
}

TEST(ClassicalState, TriangleClosedForm) {
  const auto l = laplacian(build_complete(3));
  for (double t : {0.0, 0.2, 1.0, 5.0}) {
    const auto c = classical_state(l, t, 0);
    EXPECT_NEAR(c(0, 0).real(), (1.0 + 2.0 * std::exp(-3.0 * t)) / 3.0, 1e-13);
    EXPECT_NEAR(c(1, 1).real(), (1.0 - std::exp(-3.0 * t)) / 3.0, 1e-13);
    EXPECT_NEAR(c(2, 2).real(), (1.0 - std::exp(-3.0 * t)) / 3.0, 1e-13);
    EXPECT_EQ(l1_coherence(c), 0.0);
    EXPECT_TRUE(validate(c).valid());
  }
  const auto far = classical_state(laplacian(build_cycle(6)), 200.0, 2);
  for (std::size_t k = 0; k < 6; ++k) EXPECT_NEAR(far(k, k).real(), 1.0 / 6.0, 1e-10);
}

TEST(Distance, TriangleAtPiOverThree) {
  const auto spec = SpectralDecomposition::of(laplacian(build_complete(3)));
  const double t = std::numbers::pi / 3.0;
  const auto rho = triangle_analytic(t);
  const double e = std::exp(-std::numbers::pi);
  // General definition: sqrt(sigma) is diagonal, eigenvalues of sqrt(sigma) rho sqrt(sigma) by brute force.
  const double p0 = (1 + 2 * e) / 3, p1 = (1 - e) / 3;
  Eigen::Vector3d s(std::sqrt(p0), std::sqrt(p1), std::sqrt(p1));
  const ComplexMatrix m = s.asDiagonal() * rho.matrix() * s.asDiagonal();
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(m);
  double tr = 0.0;
  for (int i = 0; i < 3; ++i)
    if (es.eigenvalues()(i) > 1e-12) tr += std::sqrt(es.eigenvalues()(i));
  EXPECT_NEAR(quantum_classical_distance(rho, spec, t, FixedInitial{0}), 1.0 - tr * tr, 1e-12);
  // rho is pure, so F = <psi| sigma |psi> = sum_k p_k rho_kk.
  EXPECT_NEAR(quantum_classical_distance(rho, spec, t, FixedInitial{0}), 1.0 - (p0 / 9.0 + 2.0 * p1 * 4.0 / 9.0), 1e-12);
}

TEST(Distance, ZeroAtStartAndMinModeBoundsFixed) {
  const auto g = build_barabasi_albert(12, 2, 3);
  const GraphHamiltonian h(g);
  EXPECT_NEAR(quantum_classical_distance(localized_state(12, 4), h.spectrum(), 0.0, FixedInitial{4}), 0.0, 1e-14);
  const auto traj = evolve(HakenStrobl{0.1}, h, localized_state(12, 4), TimeGrid{5.0, 11});
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    const double mn = quantum_classical_distance(traj.states[i], h.spectrum(), traj.times[i], MinOverLocalized{});
    for (std::size_t j = 0; j < 12; ++j) {
      const double fx = quantum_classical_distance(traj.states[i], h.spectrum(), traj.times[i], FixedInitial{j});
      // 1 - min_j F >= 1 - F_j for every j.
      EXPECT_GE(mn, fx - 1e-12);
      EXPECT_GE(fx, 0.0);
      EXPECT_LE(fx, 1.0);
    }
  }
}

TEST(Distance, NoiselessCompleteGraphAsymptote) {
  const GraphHamiltonian h(build_complete(10));
  const auto rho = evolve_spectral(Noiseless{}, h.spectrum(), localized_state(10, 0), 12.0);
  EXPECT_NEAR(quantum_classical_distance(rho, h.spectrum(), 12.0, FixedInitial{0}), 0.9, 1e-4);
}

TEST(MetricRecord, InitialRecordAndNoiselessEntropy) {
  const GraphHamiltonian h(build_watts_strogatz(10, 4, 0.2, 1));
  const auto traj = evolve(Noiseless{}, h, localized_state(10, 3), TimeGrid{10.0, 50});
  const auto records = metric_series(traj, h.spectrum(), 3);
  ASSERT_EQ(records.size(), 50u);
  const auto& r0 = records.front();
  EXPECT_EQ(r0.occupations[3], 1.0);
  EXPECT_EQ(r0.l1_coherence, 0.0);
  EXPECT_EQ(r0.fidelity_with_initial, 1.0);
  EXPECT_NEAR(r0.entropy, 0.0, 1e-15);
  EXPECT_NEAR(r0.d_qc, 0.0, 1e-14);
  for (const auto& r : records) {
    EXPECT_LE(r.entropy, 1e-10);
    double sum = 0.0;
    for (double p : r.occupations) sum += p;
    EXPECT_NEAR(sum, 1.0, 1e-8);
  }
}

TEST(MetricRecord, FidelityColumnMatchesUhlmann) {
  const GraphHamiltonian h(build_cycle(6));
  const auto traj = evolve(QuantumStochasticWalk{0.2}, h, localized_state(6, 0), TimeGrid{5.0, 6});
  const auto records = metric_series(traj, h.spectrum(), 0);
  for (std::size_t i = 0; i < records.size(); ++i)
    EXPECT_NEAR(records[i].fidelity_with_initial, fidelity(localized_state(6, 0), traj.states[i]), 1e-8);
}
