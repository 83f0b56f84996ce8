#pragma once

#include <complex>
#include <iosfwd>
#include <string>

#include <Eigen/Dense>
#include <json.hpp>

namespace qht {

using Complex = std::complex<double>;

/// Truncated density matrix in the Fock basis, rho(j, k) for 0 <= j, k < dim.
///
/// Entries outside the stored block are treated as zero by every norm and
/// difference routine, so matrices of different truncation can be compared.
class DensityMatrix {
 public:
  DensityMatrix() = default;
  explicit DensityMatrix(int dim);
  explicit DensityMatrix(Eigen::MatrixXcd entries);

  int dim() const { return static_cast<int>(entries_.rows()); }

  Complex operator()(int j, int k) const { return entries_(j, k); }
  Complex& operator()(int j, int k) { return entries_(j, k); }

  /// Zero outside the stored block.
  Complex at_or_zero(int j, int k) const;

  const Eigen::MatrixXcd& entries() const { return entries_; }

  Complex trace() const { return entries_.trace(); }
  double squared_norm() const { return entries_.squaredNorm(); }
  double norm() const { return entries_.norm(); }

  /// max |rho(j,k) - conj(rho(k,j))|
  double hermitian_defect() const;

  /// Smallest eigenvalue of the Hermitian part.
  double min_eigenvalue() const;

  /// Sum of |rho(j,k)|^2 over j + k >= cutoff.
  double tail_mass(int cutoff) const;

 private:
  Eigen::MatrixXcd entries_;
};

/// Squared l2 distance over the union of both supports.
double squared_distance(const DensityMatrix& a, const DensityMatrix& b);

/// {"dim": D, "entries": [[j, k, re, im], ...]} with entries of modulus > 1e-15.
nlohmann::json to_json(const DensityMatrix& m);
DensityMatrix density_matrix_from_json(const nlohmann::json& j);

/// CSV with header "j,k,re,im", one line per stored entry.
void write_csv(std::ostream& out, const DensityMatrix& m);

}  // namespace qht
