#include "cptsim/lineshape.hpp"

#include <cmath>
#include <stdexcept>

namespace cptsim {

namespace {

void check_pair(const LambdaSystem& sys) {
  if (sys.g < 1 || sys.g > 7 || sys.e < 8 || sys.e > 16) {
    throw std::invalid_argument(
        "LambdaSystem: g must be 1..7 (F=3) and e must be 8..16 (F=4)");
  }
}

} // namespace

double lineshape_width(const LambdaSystem& sys, const Eigen::MatrixXcd& coupling,
                       const Eigen::VectorXd& detuning, double gamma_p,
                       double gamma_f) {
  check_pair(sys);
  const int g = sys.g - 1;
  const int e = sys.e - 1;
  double width = gamma_p; // (G_g + G_e)/2 with both ground rates equal
  for (int u = first_excited_slot; u < n_levels; ++u) {
    const double og2 = std::norm(coupling(g, u));
    const double oe2 = std::norm(coupling(e, u));
    const double due = detuning[u] - detuning[e];
    const double dug = detuning[u] - detuning[g];
    width += 0.25 * (og2 * gamma_f / (gamma_f * gamma_f + due * due) +
                     oe2 * gamma_f / (gamma_f * gamma_f + dug * dug));
  }
  return width;
}

double light_shift(const LambdaSystem& sys, const Eigen::MatrixXcd& coupling,
                   const Eigen::VectorXd& detuning, double gamma_f) {
  check_pair(sys);
  const int g = sys.g - 1;
  const int e = sys.e - 1;
  // The resonance displacement is the *difference* of the two legs' Stark
  // terms: for one far shared excited level it reduces to the dressed-state
  // result (|O_e|^2 - |O_g|^2)/(4 D) and vanishes for balanced legs.  With a
  // plus between the terms the predicted shift grows with total intensity,
  // which the full steady-state solver rules out (see the lineshape tests).
  double shift = 0.0;
  for (int u = first_excited_slot; u < n_levels; ++u) {
    const double og2 = std::norm(coupling(g, u));
    const double oe2 = std::norm(coupling(e, u));
    const double due = detuning[u] - detuning[e];
    const double dug = detuning[u] - detuning[g];
    shift += og2 * (detuning[e] - detuning[u]) /
                 (gamma_f * gamma_f + due * due) -
             oe2 * (detuning[g] - detuning[u]) /
                 (gamma_f * gamma_f + dug * dug);
  }
  return -0.25 * shift;
}

complexd amplitude_c(const LambdaSystem& sys, const AtomicData& atom,
                     const Eigen::MatrixXcd& coupling, double delta_opt,
                     double rho_gg, double rho_ee, double gamma_f) {
  check_pair(sys);
  const int g = sys.g - 1;
  const int e = sys.e - 1;
  complexd c(0, 0);
  for (int f_prime = 3; f_prime <= 4; ++f_prime) {
    const double x = (f_prime == 3) ? delta_opt + 0.5 * atom.hfs_excited
                                    : delta_opt - 0.5 * atom.hfs_excited;
    complexd sum_prod(0, 0);
    for (int u = first_excited_slot; u < n_levels; ++u) {
      if (decompose(u + 1).f != f_prime) continue;
      sum_prod += coupling(g, u) * std::conj(coupling(e, u));
    }
    const double lorentz = gamma_f / (4.0 * (gamma_f * gamma_f + x * x));
    c += -lorentz *
         (complexd(rho_gg + rho_ee, 0) +
          complexd(0, (rho_gg - rho_ee) * x / gamma_f)) *
         sum_prod;
  }
  return c;
}

LineshapeParams lineshape_params(const LambdaSystem& sys, const AtomicData& atom,
                                 const Eigen::MatrixXcd& coupling,
                                 const Eigen::VectorXd& detuning,
                                 double delta_opt, double gamma_p,
                                 double gamma_f, double rho_gg, double rho_ee) {
  check_pair(sys);
  LineshapeParams p;
  p.width = lineshape_width(sys, coupling, detuning, gamma_p, gamma_f);
  p.light_shift = light_shift(sys, coupling, detuning, gamma_f);
  p.c = amplitude_c(sys, atom, coupling, delta_opt, rho_gg, rho_ee, gamma_f);
  p.delta_f3 = delta_opt + 0.5 * atom.hfs_excited;
  p.delta_f4 = delta_opt - 0.5 * atom.hfs_excited;
  for (int f_prime = 3; f_prime <= 4; ++f_prime) {
    complexd sum_prod(0, 0);
    for (int u = first_excited_slot; u < n_levels; ++u) {
      if (decompose(u + 1).f != f_prime) continue;
      sum_prod += coupling(sys.g - 1, u) * std::conj(coupling(sys.e - 1, u));
    }
    (f_prime == 3 ? p.sum_prod_f3_sq : p.sum_prod_f4_sq) = std::norm(sum_prod);
  }
  p.rho_gg = rho_gg;
  p.rho_ee = rho_ee;
  p.delta_g = detuning[sys.g - 1];
  p.delta_e = detuning[sys.e - 1];
  p.gamma_f = gamma_f;
  return p;
}

std::vector<AnalyticPoint> analytic_spectrum(const LineshapeParams& params,
                                             const std::vector<double>& delta_ge,
                                             int tuned_f_prime, double alpha,
                                             double big_gamma) {
  if (tuned_f_prime != 3 && tuned_f_prime != 4) {
    throw std::invalid_argument("analytic_spectrum: tuned level must be 3 or 4");
  }
  const double delta_line =
      (tuned_f_prime == 3) ? params.delta_f3 : params.delta_f4;
  const double sum_prod_sq =
      (tuned_f_prime == 3) ? params.sum_prod_f3_sq : params.sum_prod_f4_sq;
  const double s_line = lorentz_s(delta_line, params.gamma_f);

  std::vector<AnalyticPoint> out;
  out.reserve(delta_ge.size());
  for (double x : delta_ge) {
    AnalyticPoint pt;
    pt.delta_ge = x;
    const double xs = x - params.light_shift;
    pt.re_rho_ge = -params.c.real() * lorentz_s(xs, params.width) +
                   params.c.imag() * lorentz_a(xs, params.width);
    const double symmetric =
        lorentz_s(xs, params.width) * (params.rho_gg + params.rho_ee);
    const double asymmetric =
        lorentz_a(xs, params.width) *
        (delta_line * (params.rho_gg - params.rho_ee) -
         params.delta_g * params.rho_gg + params.delta_e * params.rho_ee) /
        params.gamma_f;
    pt.f2_tuned = (alpha / (8.0 * big_gamma)) * s_line * s_line * sum_prod_sq *
                  (symmetric + asymmetric);
    out.push_back(pt);
  }
  return out;
}

DoubleLambdaClass classify_double_lambda(double theta, complexd o1_st,
                                         complexd o2_spt, complexd o1_stp,
                                         complexd o2_sptp, double tol) {
  const double scale = std::max({std::abs(o1_st), std::abs(o2_spt),
                                 std::abs(o1_stp), std::abs(o2_sptp)});
  if (scale == 0) return DoubleLambdaClass::inapplicable;
  const double tiny = scale * 1e-14;
  if (std::abs(o1_st) < tiny || std::abs(o2_spt) < tiny ||
      std::abs(o1_stp) < tiny || std::abs(o2_sptp) < tiny) {
    return DoubleLambdaClass::inapplicable;
  }
  const complexd target = std::exp(complexd(0, 2.0 * theta));
  const complexd dark_ratio = (o2_spt * o1_stp) / (o1_st * o2_sptp);
  const complexd bright_ratio = -(o1_st * o1_stp) / (o2_spt * o2_sptp);
  if (std::abs(target - dark_ratio) <= tol * std::max(1.0, std::abs(dark_ratio))) {
    return DoubleLambdaClass::common_dark;
  }
  if (std::abs(target - bright_ratio) <=
      tol * std::max(1.0, std::abs(bright_ratio))) {
    return DoubleLambdaClass::mutually_bright;
  }
  return DoubleLambdaClass::neither;
}

DoubleLambdaClass classify_mm_resonance(const AtomicData& atom, int m,
                                        double theta, const CgTable& cg) {
  if (std::abs(m) > 3) {
    throw std::invalid_argument("classify_mm_resonance: |m| must be <= 3");
  }
  if (std::abs(m + 1) > 3 || std::abs(m - 1) > 3) {
    return DoubleLambdaClass::inapplicable; // an F'=3 leg does not exist
  }
  const int s = index_of(Manifold::ground, 3, m);
  const int sp = index_of(Manifold::ground, 4, m);
  const int t = index_of(Manifold::excited, 3, m + 1);
  const int tp = index_of(Manifold::excited, 3, m - 1);
  const double unit_field = 1.0;
  const complexd o1_st = rabi_sigma_plus(atom, unit_field, s, t, cg);
  const complexd o2_spt = rabi_sigma_plus(atom, unit_field, sp, t, cg);
  const complexd o1_stp = rabi_sigma_minus(atom, unit_field, s, tp, cg);
  const complexd o2_sptp = rabi_sigma_minus(atom, unit_field, sp, tp, cg);
  return classify_double_lambda(theta, o1_st, o2_spt, o1_stp, o2_sptp);
}

double suppression_check(const CouplingMatrix& coupling, int g, int e,
                         int tuned_f_prime) {
  if (g < 1 || g > n_ground || e < 1 || e > n_ground) {
    throw std::invalid_argument("suppression_check: g, e must be ground levels");
  }
  if (tuned_f_prime != 3 && tuned_f_prime != 4) {
    throw std::invalid_argument("suppression_check: tuned level must be 3 or 4");
  }
  complexd sum_prod(0, 0);
  for (int u = n_ground + 1; u <= n_levels; ++u) {
    if (decompose(u).f != tuned_f_prime) continue;
    sum_prod += coupling.ge(g, u) * std::conj(coupling.ge(e, u));
  }
  return std::norm(sum_prod);
}

} // namespace cptsim
