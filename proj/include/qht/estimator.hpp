#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "qht/density_matrix.hpp"
#include "qht/measurement.hpp"
#include "qht/patterns.hpp"

namespace qht {

/// Thresholds t_{j,k}, N x N, zero outside the index set.
using ThresholdMatrix = Eigen::MatrixXd;

struct EstimatorConfig {
  double eta = 0.9;
  /// tolerance level; 1 is admitted (the value used in the experiments)
  double epsilon = 1.0;
  double r0 = 2.0;
  double B0 = 0.5;
  std::optional<int> N_override;
  /// threshold scale factor; 0 returns the raw estimate unchanged
  double kappa = 1.0;
  int threads = 1;
  TableOptions table;

  void validate() const;
  nlohmann::json to_json() const;
};

struct EstimationResult {
  DensityMatrix raw;
  DensityMatrix thresholded;
  ThresholdMatrix thresholds;
  int N_used = 0;
  std::size_t n_samples = 0;
  /// records whose y / sqrt(eta) fell outside the pattern grid (kernel taken as 0)
  std::size_t out_of_range = 0;
};

/// floor((ln n / (2 B0))^{2 / r0})
int choose_N(std::size_t n, double r0, double B0);

/// {(j, k) : j + k <= N - 1}, in row-major order.
std::vector<std::pair<int, int>> index_set(int N);

/// rho_hat_{j,k} = mean of G_{j,k}(y / sqrt(eta), phi) over (j, k) in J(N).
/// The reduction runs over fixed 4096-record blocks combined by a fixed
/// pairwise tree, so the result is bitwise independent of the thread count.
DensityMatrix raw_estimate(std::span<const MeasurementRecord> records, const PatternTable& table, int N,
                           double data_eta, int threads = 1, std::size_t* out_of_range = nullptr);

/// kappa * 2 ||f^eta_{j,k}||_inf sqrt(ln(2 N (N + 1) / epsilon) / n)
ThresholdMatrix thresholds(const PatternTable& table, int N, std::size_t n, double epsilon, double kappa);

/// Complex soft thresholding with 0/0 = 0.
DensityMatrix soft_threshold(const DensityMatrix& raw, const ThresholdMatrix& t);

/// Orthogonal projection of nu onto {|nu_{j,k} - raw_{j,k}| <= t_{j,k}};
/// only coordinate (j, k) changes.
DensityMatrix project_coordinate(const DensityMatrix& nu, const DensityMatrix& raw, const ThresholdMatrix& t, int j,
                                 int k);

/// Full pipeline. When table is null, or does not cover N, or was built for
/// another eta, a table is built with cfg.table.
EstimationResult estimate(std::span<const MeasurementRecord> records, const EstimatorConfig& cfg,
                          const PatternTable* table = nullptr);

/// inf over I subset of J(N) of 4 sum_I t^2 + sum_{not I} |rho|^2. The
/// objective is separable, so the coordinatewise choice is exact. Entries of
/// rho_true outside J(N) enter as tail mass.
double oracle_bound(const DensityMatrix& rho_true, const ThresholdMatrix& t, int N);

/// true iff |raw_{j,k} - rho_{j,k}| <= t_{j,k} for every (j, k) in J(N).
bool deviation_event(const DensityMatrix& raw, const DensityMatrix& rho_true, const ThresholdMatrix& t, int N);

nlohmann::json to_json(const EstimationResult& result, const EstimatorConfig& cfg);

}  // namespace qht
