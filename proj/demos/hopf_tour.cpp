// Walks through the main quantities for the Hopf link and a perturbed copy:
// energy, linking number, the Clifford torus in the canonical family, the
// z-profile of family areas, and a short descent back to the minimizer.

#include <cstdio>

#include "mobius/mobius.hpp"

using namespace mobius;

int main() {
  const QuadratureSpec quad(128);
  const Link hopf = hopf_link();
  std::printf("Hopf link in S^3\n");
  std::printf("  energy        %s  (2 pi^2 = %s)\n", fmt(mobius_energy(hopf, quad)).c_str(), fmt(2 * kPi * kPi).c_str());
  std::printf("  linking       %d\n", linking_number(hopf_link_r3(), quad));
  std::printf("  separation    %s\n", fmt(hopf.alpha()).c_str());

  const CanonicalFamily fam(hopf, quad);
  std::printf("\nfamily areas at v = 0\n");
  for (double z : {0.1, 0.3, 0.5, 0.7, 0.9})
    std::printf("  z = %.1f  area %s\n", z, fmt(fam.area(family_coeffs(Point::Zero(), z)).area).c_str());

  const Link bent = perturbed_hopf_r3(11, 0.1);
  std::printf("\nperturbed copy (seed 11, amplitude 0.1): energy %s\n", fmt(mobius_energy(bent, QuadratureSpec(96))).c_str());
  MinimizeOptions opt;
  opt.max_iter = 400;
  const MinimizeResult r = minimize(bent, opt, [](const TraceRow& row) {
    if (row.iter % 50 == 0) std::printf("  iter %4d  energy %s  |grad| %s\n", row.iter, fmt(row.energy).c_str(), fmt(row.gradnorm).c_str());
  });
  const double e = r.trace.back().energy;
  std::printf("  %s after %d steps: energy - 2 pi^2 = %s\n", to_string(r.status), r.trace.back().iter,
              fmt(e - 2 * kPi * kPi).c_str());
  const RigidityReport rig = rigidity_report(r.link, quad);
  std::printf("  rigidity: ortho %s  chord spread %s  circles %s %s\n", fmt(rig.max_ortho_residual).c_str(),
              fmt(rig.chord_spread).c_str(), fmt(rig.circle_residuals[0]).c_str(), fmt(rig.circle_residuals[1]).c_str());
}
