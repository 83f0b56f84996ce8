#include "qht/density_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <stdexcept>

namespace qht {

namespace {
constexpr double kJsonModulusCutoff = 1e-15;
}

DensityMatrix::DensityMatrix(int dim) {
  if (dim < 1) throw std::invalid_argument("DensityMatrix: dim must be >= 1");
  entries_ = Eigen::MatrixXcd::Zero(dim, dim);
}

DensityMatrix::DensityMatrix(Eigen::MatrixXcd entries) : entries_(std::move(entries)) {
  if (entries_.rows() != entries_.cols() || entries_.rows() < 1) {
    throw std::invalid_argument("DensityMatrix: entries must be a nonempty square matrix");
  }
}

Complex DensityMatrix::at_or_zero(int j, int k) const {
  if (j < 0 || k < 0 || j >= dim() || k >= dim()) return {0.0, 0.0};
  return entries_(j, k);
}

double DensityMatrix::hermitian_defect() const {
  return (entries_ - entries_.adjoint()).cwiseAbs().maxCoeff();
}

double DensityMatrix::min_eigenvalue() const {
  const Eigen::MatrixXcd herm = 0.5 * (entries_ + entries_.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(herm, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

double DensityMatrix::tail_mass(int cutoff) const {
  double sum = 0.0;
  for (int j = 0; j < dim(); ++j) {
    for (int k = std::max(0, cutoff - j); k < dim(); ++k) sum += std::norm(entries_(j, k));
  }
  return sum;
}

double squared_distance(const DensityMatrix& a, const DensityMatrix& b) {
  const int d = std::max(a.dim(), b.dim());
  double sum = 0.0;
  for (int j = 0; j < d; ++j) {
    for (int k = 0; k < d; ++k) sum += std::norm(a.at_or_zero(j, k) - b.at_or_zero(j, k));
  }
  return sum;
}

nlohmann::json to_json(const DensityMatrix& m) {
  nlohmann::json entries = nlohmann::json::array();
  for (int j = 0; j < m.dim(); ++j) {
    for (int k = 0; k < m.dim(); ++k) {
      const Complex v = m(j, k);
      if (std::abs(v) > kJsonModulusCutoff) entries.push_back({j, k, v.real(), v.imag()});
    }
  }
  return {{"dim", m.dim()}, {"entries", std::move(entries)}};
}

DensityMatrix density_matrix_from_json(const nlohmann::json& j) {
  DensityMatrix m(j.at("dim").get<int>());
  for (const auto& e : j.at("entries")) {
    const int row = e.at(0).get<int>();
    const int col = e.at(1).get<int>();
    if (row < 0 || col < 0 || row >= m.dim() || col >= m.dim()) {
      throw std::out_of_range("density matrix JSON: entry index outside dim");
    }
    m(row, col) = Complex(e.at(2).get<double>(), e.at(3).get<double>());
  }
  return m;
}

void write_csv(std::ostream& out, const DensityMatrix& m) {
  out << "j,k,re,im\n" << std::setprecision(17);
  for (int j = 0; j < m.dim(); ++j) {
    for (int k = 0; k < m.dim(); ++k) {
      out << j << ',' << k << ',' << m(j, k).real() << ',' << m(j, k).imag() << '\n';
    }
  }
}

}  // namespace qht
