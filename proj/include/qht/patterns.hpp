#pragma once

#include <complex>
#include <span>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qht/measurement.hpp"

namespace qht {

using Complex = std::complex<double>;

/// Fourier transform of the pattern function f_{j,k} (symmetric in j, k).
Complex pattern_ft(int j, int k, double t);

/// pattern_ft(j, k, t) * exp(gamma t^2): the transform of the adapted
/// (noise-deconvolving) pattern function. Evaluated in log space.
Complex adapted_ft(int j, int k, double t, const NoiseConfig& cfg);

struct TableOptions {
  /// number of grid nodes, a power of two
  int grid_size = 4096;
  /// relative spectral mass discarded beyond the cutoff
  double tolerance = 1e-12;
  /// requested half-width of the x grid; sets the resolution floor of the cutoff
  double half_width = 64.0;
  /// tolerance-driven cutoffs above this are rejected as ill-conditioned
  double max_cutoff = 200.0;
  /// build fails if max|Im| / max|Re| of any inverse transform exceeds this
  double max_imag_residue = 1e-6;
  int threads = 1;
};

/// Smallest T with (1/4 - gamma) T^2 - (N + 2) ln(max(T, 2)) >= ln(1/tol).
/// Throws when it exceeds max_cutoff.
double tolerance_cutoff(int N, double gamma, double tolerance, double max_cutoff);

/// Adapted pattern functions f^eta_{j,k} for all j + k <= N - 1, sampled on a
/// uniform grid by inverse FFT and interpolated with natural cubic splines.
/// Each unordered pair is stored once; storage is node-major so all pairs at
/// one abscissa are contiguous.
class PatternTable {
 public:
  static PatternTable build(int N, const NoiseConfig& cfg, const TableOptions& options = {});

  double eta() const { return eta_; }
  int max_index_sum() const { return N_; }
  int grid_size() const { return grid_size_; }
  double cutoff() const { return cutoff_; }
  double spacing() const { return spacing_; }
  double x_min() const { return x_min_; }
  double x_max() const { return x_min_ + (grid_size_ - 1) * spacing_; }
  double x_at(int m) const { return x_min_ + m * spacing_; }

  int pair_count() const { return static_cast<int>(pairs_.size()); }
  bool covers(int j, int k) const { return j >= 0 && k >= 0 && j + k < N_; }
  /// Storage slot of (j, k); throws std::out_of_range outside the table.
  int pair_index(int j, int k) const;
  /// (j, k) with j >= k for a storage slot.
  std::pair<int, int> pair_at(int p) const { return pairs_[p]; }

  double node_value(int j, int k, int m) const { return values_[node_offset(m) + pair_index(j, k)]; }
  std::vector<double> grid_values(int j, int k) const;

  /// Cubic-spline value; 0 outside [x_min, x_max].
  double eval(int j, int k, double x) const;

  /// Spline values of every stored pair at x, indexed by pair slot.
  /// Returns false (and leaves out untouched) when x is outside the grid.
  bool eval_all(double x, std::span<double> out) const;

  double sup_norm(int j, int k) const { return sup_norms_[pair_index(j, k)]; }
  /// max |Im| / max |Re| of the inverse transform of (j, k).
  double imag_residue(int j, int k) const { return imag_residues_[pair_index(j, k)]; }

  nlohmann::json metadata() const;

 private:
  PatternTable() = default;
  std::size_t node_offset(int m) const { return static_cast<std::size_t>(m) * pairs_.size(); }
  double spline_at(int p, int interval, double frac) const;
  double refine_sup(int p, double grid_max) const;

  double eta_ = 1.0;
  int N_ = 0;
  int grid_size_ = 0;
  double cutoff_ = 0.0;
  double spacing_ = 0.0;
  double x_min_ = 0.0;
  std::vector<std::pair<int, int>> pairs_;
  std::vector<int> slot_;  // N_ x N_ lookup, -1 outside
  std::vector<double> values_;
  std::vector<double> second_;  // spline second derivatives
  std::vector<double> sup_norms_;
  std::vector<double> imag_residues_;
};

PatternTable build_table(int N, const NoiseConfig& cfg, const TableOptions& options = {});
double eval_pattern(const PatternTable& table, int j, int k, double x);
double sup_norm(const PatternTable& table, int j, int k);

/// G_{j,k}(x, phi) = f^eta_{j,k}(x) exp(-i (j - k) phi)
Complex kernel_G(const PatternTable& table, int j, int k, double x, double phi);

}  // namespace qht
