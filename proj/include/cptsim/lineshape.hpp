#pragma once

// Closed-form lineshape theory for one ground pair (g, e): resonance width,
// light shift, complex amplitude C, the symmetric+antisymmetric Lorentzian
// curve of Re(rho_ge), and the two-photon transmittance term F2 evaluated
// per tuned excited manifold.  Also the double-Lambda dark/bright state
// classification and the coupling-product suppression measure that governs
// which (m, m) resonances survive under linear-linear excitation.

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "cptsim/coupling.hpp"
#include "cptsim/levels.hpp"

namespace cptsim {

// One Lambda resonance: ground pair (g, e) by 1-based level index.
struct LambdaSystem {
  int g = 0; // 1..7   (F=3 sublevel)
  int e = 0; // 8..16  (F=4 sublevel)
};

// Half width (angular) of the two-photon resonance:
//   (G_g+G_e)/2 + (1/4) sum_u [ |O_gu|^2 gf/(gf^2+(d_u-d_e)^2)
//                             + |O_ue|^2 gf/(gf^2+(d_u-d_g)^2) ]
double lineshape_width(const LambdaSystem& sys, const Eigen::MatrixXcd& coupling,
                       const Eigen::VectorXd& detuning, double gamma_p,
                       double gamma_f);

// Light shift (angular) of the resonance center in delta_g - delta_e:
//   -(1/4) sum_u [ |O_gu|^2 (d_e-d_u)/(gf^2+(d_u-d_e)^2)
//                + |O_ue|^2 (d_g-d_u)/(gf^2+(d_u-d_g)^2) ]
double light_shift(const LambdaSystem& sys, const Eigen::MatrixXcd& coupling,
                   const Eigen::VectorXd& detuning, double gamma_f);

// Complex amplitude C of the resonance, grouping the excited sum by
// manifold with detunings x3 = Delta_opt + Delta'_hfs/2 (F'=3 group) and
// x4 = Delta_opt - Delta'_hfs/2 (F'=4 group):
//   C = - sum_{F'} [ gf / (4 (gf^2 + x^2)) ]
//         [ (rho_gg+rho_ee) + i (rho_gg-rho_ee) x/gf ] sum_u O_gu O*_eu
complexd amplitude_c(const LambdaSystem& sys, const AtomicData& atom,
                     const Eigen::MatrixXcd& coupling, double delta_opt,
                     double rho_gg, double rho_ee, double gamma_f);

// Symmetric/antisymmetric Lorentzian building blocks.
inline double lorentz_s(double x, double w) { return w / (x * x + w * w); }
inline double lorentz_a(double x, double w) { return x / (x * x + w * w); }

struct LineshapeParams {
  double width = 0;        // Delta_width (angular)
  double light_shift = 0;  // Delta_LS (angular)
  complexd c{0, 0};        // amplitude C
  // Ingredients of the per-manifold two-photon term F2:
  double delta_f3 = 0;     // Delta_opt + Delta'_hfs/2
  double delta_f4 = 0;     // Delta_opt - Delta'_hfs/2
  double sum_prod_f3_sq = 0; // |sum_{u in F'=3} O_gu O*_eu|^2
  double sum_prod_f4_sq = 0; // |sum_{u in F'=4} O_gu O*_eu|^2
  double rho_gg = 0, rho_ee = 0;
  double delta_g = 0, delta_e = 0; // ground detunings at the evaluation point
  double gamma_f = 0;
};

LineshapeParams lineshape_params(const LambdaSystem& sys, const AtomicData& atom,
                                 const Eigen::MatrixXcd& coupling,
                                 const Eigen::VectorXd& detuning,
                                 double delta_opt, double gamma_p,
                                 double gamma_f, double rho_gg, double rho_ee);

struct AnalyticPoint {
  double delta_ge = 0;   // delta_g - delta_e (angular)
  double re_rho_ge = 0;  // symmetric + antisymmetric Lorentzian mixture
  double f2_tuned = 0;   // two-photon transmittance term of the tuned manifold
};

// Evaluates the analytic curve on a grid of delta_g - delta_e values.
// `tuned_f_prime` picks which manifold's F2 expression is reported.
std::vector<AnalyticPoint> analytic_spectrum(const LineshapeParams& params,
                                             const std::vector<double>& delta_ge,
                                             int tuned_f_prime,
                                             double alpha, double big_gamma);

// --- double-Lambda (m, m) resonance logic under bichromatic lin-lin drive --

enum class DoubleLambdaClass {
  common_dark,     // one superposition is dark for both Lambda branches
  mutually_bright, // the dark state of one branch is bright for the other
  neither,
  inapplicable     // a required coupling leg vanishes
};

// Evaluates e^{2 i theta} against the dark condition
//   e^{2i theta} =  (O2_s't * O1_st') / (O1_st * O2_s't')
// and the bright condition
//   e^{2i theta} = -(O1_st * O1_st') / (O2_s't * O2_s't')
// where s=(F=3,m), s'=(F=4,m), t=(F'=3,m+1), t'=(F'=3,m-1); O1/O2 are the
// sigma+/sigma- legs of fields 1 and 2.
DoubleLambdaClass classify_double_lambda(double theta, complexd o1_st,
                                         complexd o2_spt, complexd o1_stp,
                                         complexd o2_sptp, double tol = 1e-9);

// Convenience: builds the four sigma legs of the (m, m) double-Lambda from
// the atomic data (fields at equal unit amplitude) and classifies.
DoubleLambdaClass classify_mm_resonance(const AtomicData& atom, int m,
                                        double theta,
                                        const CgTable& cg = CgTable::shared());

// Squared magnitude of sum_{u in tuned manifold} Omega_gu Omega*_eu — the
// coupling-product that must vanish for the (g, e) resonance to be fully
// suppressed.  Units: (angular frequency)^4.
double suppression_check(const CouplingMatrix& coupling, int g, int e,
                         int tuned_f_prime);

} // namespace cptsim
