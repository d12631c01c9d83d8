#include "cptsim/angular.hpp"

#include <cmath>
#include <stdexcept>

namespace cptsim {

namespace {

// log(n!) for integer n >= 0 via lgamma; exact enough for the small
// momenta used here (all n <= ~20).
double log_factorial(double n) { return std::lgamma(n + 1.0); }

bool is_half_integer_multiple(double x) {
  return std::abs(2.0 * x - std::round(2.0 * x)) < 1e-9;
}

} // namespace

double clebsch_gordan_racah(double j1, double m1, double j2, double m2,
                            double bigj, double bigm) {
  // Selection rules.
  if (!is_half_integer_multiple(j1) || !is_half_integer_multiple(j2) ||
      !is_half_integer_multiple(bigj)) {
    throw std::invalid_argument("clebsch_gordan_racah: momenta must be multiples of 1/2");
  }
  if (std::abs(m1 + m2 - bigm) > 1e-9) return 0.0;
  if (bigj < std::abs(j1 - j2) - 1e-9 || bigj > j1 + j2 + 1e-9) return 0.0;
  if (std::abs(m1) > j1 + 1e-9 || std::abs(m2) > j2 + 1e-9 ||
      std::abs(bigm) > bigj + 1e-9) {
    return 0.0;
  }
  // (j1+j2+J) must be an integer together with the m sums; projections must
  // differ from their j by integers.
  if (!is_half_integer_multiple(j1 - m1) ||
      std::abs(std::remainder(j1 - m1, 1.0)) > 1e-9) {
    return 0.0;
  }
  if (std::abs(std::remainder(j2 - m2, 1.0)) > 1e-9) return 0.0;
  if (std::abs(std::remainder(bigj - bigm, 1.0)) > 1e-9) return 0.0;

  // Racah's closed form (Condon-Shortley phase):
  //   C = sqrt((2J+1) * d(j1 j2 J)) * sqrt(prod of projection factorials)
  //       * sum_k (-1)^k / [k! (j1+j2-J-k)! (j1-m1-k)! (j2+m2-k)!
  //                          (J-j2+m1+k)! (J-j1-m2+k)!]
  const double log_delta =
      log_factorial(j1 + j2 - bigj) + log_factorial(j1 - j2 + bigj) +
      log_factorial(-j1 + j2 + bigj) - log_factorial(j1 + j2 + bigj + 1.0);
  const double log_proj =
      log_factorial(j1 + m1) + log_factorial(j1 - m1) + log_factorial(j2 + m2) +
      log_factorial(j2 - m2) + log_factorial(bigj + bigm) +
      log_factorial(bigj - bigm);

  const double kmin = std::max({0.0, j2 - bigj - m1, j1 + m2 - bigj});
  const double kmax = std::min({j1 + j2 - bigj, j1 - m1, j2 + m2});

  double sum = 0.0;
  for (double k = std::round(kmin); k <= kmax + 1e-9; k += 1.0) {
    const double terms[6] = {k,
                             j1 + j2 - bigj - k,
                             j1 - m1 - k,
                             j2 + m2 - k,
                             bigj - j2 + m1 + k,
                             bigj - j1 - m2 + k};
    bool ok = true;
    double log_denom = 0.0;
    for (double t : terms) {
      if (t < -1e-9) { ok = false; break; }
      log_denom += log_factorial(std::max(t, 0.0));
    }
    if (!ok) continue;
    const double sign = (std::llround(k) % 2 == 0) ? 1.0 : -1.0;
    sum += sign * std::exp(0.5 * (std::log(2.0 * bigj + 1.0) + log_delta + log_proj) -
                           log_denom);
  }
  return sum;
}

double clebsch_gordan(int f_prime, int m_prime, int f, int m, int q) {
  if (q < -1 || q > 1) throw std::invalid_argument("clebsch_gordan: q must be -1, 0, or +1");
  if (m_prime != m + q) return 0.0;
  return clebsch_gordan_racah(f, m, 1.0, q, f_prime, m_prime);
}

int CgTable::slot(int f_prime, int m_prime, int f, int m, int q) {
  (void)m_prime;
  if (f < 3 || f > 4 || f_prime < 3 || f_prime > 4 || q < -1 || q > 1 ||
      std::abs(m) > 4) {
    throw std::invalid_argument("CgTable: index out of range");
  }
  return ((f - 3) * 9 + (m + 4)) * 6 + (f_prime - 3) * 3 + (q + 1);
}

CgTable::CgTable() {
  for (int f = 3; f <= 4; ++f)
    for (int m = -f; m <= f; ++m)
      for (int fp = 3; fp <= 4; ++fp)
        for (int q = -1; q <= 1; ++q)
          values_[slot(fp, m + q, f, m, q)] = clebsch_gordan(fp, m + q, f, m, q);
}

double CgTable::get(int f_prime, int m_prime, int f, int m, int q) const {
  if (m_prime != m + q) return 0.0;
  if (std::abs(m) > f || std::abs(m_prime) > f_prime) return 0.0;
  return values_[slot(f_prime, m_prime, f, m, q)];
}

void CgTable::perturb(int f_prime, int m_prime, int f, int m, int q,
                      double epsilon) {
  values_[slot(f_prime, m_prime, f, m, q)] += epsilon;
}

double CgTable::max_deviation_from_racah() const {
  double worst = 0.0;
  for (int f = 3; f <= 4; ++f)
    for (int m = -f; m <= f; ++m)
      for (int fp = 3; fp <= 4; ++fp)
        for (int q = -1; q <= 1; ++q) {
          const double fresh = clebsch_gordan(fp, m + q, f, m, q);
          worst = std::max(worst, std::abs(get(fp, m + q, f, m, q) - fresh));
        }
  return worst;
}

const CgTable& CgTable::shared() {
  static const CgTable table;
  return table;
}

} // namespace cptsim
