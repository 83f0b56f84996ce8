#include "qht/special_functions.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qht {

double hermite(int n, double x) {
  if (n < 0) throw std::invalid_argument("hermite: degree must be nonnegative");
  if (n == 0) return 1.0;
  double prev = 1.0;
  double cur = 2.0 * x;
  for (int m = 1; m < n; ++m) {
    const double next = 2.0 * x * cur - 2.0 * m * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

double laguerre(int n, int alpha, double x) {
  if (n < 0 || alpha < 0) throw std::invalid_argument("laguerre: degree and order must be nonnegative");
  if (n == 0) return 1.0;
  double prev = 1.0;
  double cur = 1.0 + alpha - x;
  for (int m = 1; m < n; ++m) {
    const double next = ((2.0 * m + 1.0 + alpha - x) * cur - (m + alpha) * prev) / (m + 1.0);
    prev = cur;
    cur = next;
  }
  return cur;
}

double fock_psi(int j, double x) {
  if (j < 0) throw std::invalid_argument("fock_psi: index must be nonnegative");
  // pi^{-1/4}
  const double psi0 = std::exp(-0.25 * std::log(std::numbers::pi) - 0.5 * x * x);
  if (j == 0) return psi0;
  double prev = psi0;
  double cur = std::sqrt(2.0) * x * psi0;
  for (int m = 1; m < j; ++m) {
    const double next = std::sqrt(2.0 / (m + 1.0)) * x * cur - std::sqrt(m / (m + 1.0)) * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

double log_factorial_ratio(int k, int j) {
  if (j < 0 || k < 0) throw std::invalid_argument("log_factorial_ratio: indices must be nonnegative");
  return 0.5 * ((k - j) * std::numbers::ln2 + std::lgamma(k + 1.0) - std::lgamma(j + 1.0));
}

}  // namespace qht
