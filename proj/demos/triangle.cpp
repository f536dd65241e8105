// Noiseless walk on the triangle from node 0, compared with the closed form.

#include <cstdio>

#include "ctqw/ctqw.hpp"

int main() {
  const ctqw::GraphHamiltonian h(ctqw::build_complete(3));
  const ctqw::TimeGrid grid{3.0, 7};
  double worst = 0.0;
  std::printf("%6s %10s %10s %10s %10s\n", "t", "p0", "p1", "l1", "entropy");
  ctqw::evolve_observed(ctqw::Noiseless{}, h, ctqw::localized_state(3, 0), grid, [&](double t, const ctqw::DensityMatrix& rho) {
    const auto exact = ctqw::triangle_analytic(t);
    worst = std::max(worst, (rho.matrix() - exact.matrix()).cwiseAbs().maxCoeff());
    const auto p = ctqw::occupation_probabilities(rho);
    std::printf("%6.2f %10.6f %10.6f %10.6f %10.2e\n", t, p[0], p[1], ctqw::l1_coherence(rho), ctqw::von_neumann_entropy(rho));
  });
  std::printf("max deviation from closed form: %.3e\n", worst);
  return worst < 1e-8 ? 0 : 1;
}
