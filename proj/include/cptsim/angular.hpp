#pragma once

// Angular-momentum coupling coefficients.  The general Clebsch-Gordan
// coefficient is evaluated with the Racah closed-form sum; the coefficients
// actually used by the model (optical and magnetic-dipole couplings between
// the F=3,4 ground and F'=3,4 excited manifolds of an I=7/2, J=1/2 atom)
// are cached in a dense table at startup.

#include <array>
#include <cstdint>

namespace cptsim {

// <j1 m1 j2 m2 | J M> in the Condon-Shortley convention.  Returns 0 for
// forbidden combinations (m1+m2 != M, triangle violation, |m|>j).
// Arguments are doubles so half-integer momenta are representable.
double clebsch_gordan_racah(double j1, double m1, double j2, double m2,
                            double bigj, double bigm);

// <F' m' | F 1 m q>: dipole-coupling coefficient between hyperfine levels.
// Zero unless m' = m + q and the triangle condition holds.
double clebsch_gordan(int f_prime, int m_prime, int f, int m, int q);

// Dense cache of <F' m'|F 1 m q> for F in {3,4}, F' in {3,4}, q in {-1,0,1}.
// A table object (rather than a free function) exists so the validation
// command can inject a controlled perturbation and prove the cross-check
// catches it.
class CgTable {
 public:
  CgTable(); // fills from clebsch_gordan_racah

  double get(int f_prime, int m_prime, int f, int m, int q) const;

  // Test hook: adds `epsilon` to one stored entry.
  void perturb(int f_prime, int m_prime, int f, int m, int q, double epsilon);

  // Largest absolute difference against a fresh Racah evaluation.
  double max_deviation_from_racah() const;

  // Shared default instance (unperturbed).
  static const CgTable& shared();

 private:
  // index: [f-3][m+4][f'-3][q+1], m in -4..4 (slots unused for |m|>F stay 0)
  std::array<double, 2 * 9 * 2 * 3> values_{};
  static int slot(int f_prime, int m_prime, int f, int m, int q);
};

} // namespace cptsim
