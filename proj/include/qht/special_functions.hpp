#pragma once

// Hermite / Laguerre polynomials and the Fock (Hermite-function) basis.
// All routines use three-term recurrences; nothing here forms an explicit
// factorial, so they stay finite for indices well past 170.

namespace qht {

/// Physicists' Hermite polynomial H_n(x).
double hermite(int n, double x);

/// Generalized Laguerre polynomial L^alpha_n(x) for integer alpha >= 0.
double laguerre(int n, int alpha, double x);

/// Normalized Hermite function psi_j(x) = H_j(x) e^{-x^2/2} / sqrt(sqrt(pi) 2^j j!).
double fock_psi(int j, double x);

/// 0.5 * [(k - j) ln 2 + ln k! - ln j!], i.e. ln sqrt(2^{k-j} k! / j!).
double log_factorial_ratio(int k, int j);

}  // namespace qht
