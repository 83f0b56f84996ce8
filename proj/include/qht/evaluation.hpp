#pragma once

#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "qht/estimator.hpp"
#include "qht/states.hpp"

namespace qht {

/// ||est - truth||_2 / ||truth||_2 over the union of both supports.
double relative_rmse(const DensityMatrix& est, const DensityMatrix& truth);

/// Monte Carlo study of the thresholded estimator, one column per sample size.
struct RmseStudy {
  StateModel state = StateModel::vacuum();
  EstimatorConfig cfg;
  std::vector<std::size_t> n_grid;
  int reps = 0;
  std::uint64_t master_seed = 0;
  /// reps x |n_grid| relative RMSE
  Eigen::MatrixXd rmse;
  /// reps x |n_grid| squared l2 error ||rho_tilde - rho||^2
  Eigen::MatrixXd squared_error;
  std::vector<int> N_used;
  /// truth mass outside J(N) (the part no estimate can recover), per n
  std::vector<double> tail_mass;

  double kappa() const { return cfg.kappa; }
  Eigen::VectorXd mean() const;
  /// sample standard deviation (reps - 1 denominator)
  Eigen::VectorXd std_dev() const;
  Eigen::VectorXd mean_squared_error() const;
};

struct PowerLawFit {
  double slope = 0.0;
  double B_tilde = 0.0;
  double gamma = 0.0;
};

/// Seed of replication rep at sample size n. Shared by every study with the
/// same master seed, which gives common random numbers across threshold scales.
std::uint64_t replication_seed(std::uint64_t master_seed, std::size_t n, int rep);

/// Ground truth used for scoring: truncation max(N, 40).
DensityMatrix scoring_truth(const StateModel& state, int N);

RmseStudy run_study(const StateModel& state, const EstimatorConfig& cfg, const std::vector<std::size_t>& n_grid,
                    int reps, std::uint64_t master_seed);

/// One study per threshold scale. Each replication is simulated and
/// raw-estimated once; only the thresholding differs between scales.
std::vector<RmseStudy> threshold_scale_sweep(const StateModel& state, const EstimatorConfig& cfg,
                                             const std::vector<std::size_t>& n_grid,
                                             const std::vector<double>& scales, int reps,
                                             std::uint64_t master_seed);

struct CoverageReplication {
  bool covered = false;
  /// ||rho_tilde - rho||^2
  double loss = 0.0;
  double oracle_bound = 0.0;
};

struct CoverageStudy {
  int N_used = 0;
  std::vector<CoverageReplication> replications;
  double rate() const;
};

/// Replications of the deviation event max_{J(N)} |rho_hat - rho| - kappa t <= 0,
/// recording the loss and oracle bound of each. cfg.kappa scales the
/// thresholds (1 gives the plain event). epsilon must lie in (0, 1).
CoverageStudy coverage_study(const StateModel& state, const EstimatorConfig& cfg, std::size_t n, int reps,
                             std::uint64_t master_seed);
double coverage_rate(const StateModel& state, const EstimatorConfig& cfg, std::size_t n, int reps,
                     std::uint64_t master_seed);

/// Ordinary least squares slope of y on x.
double ols_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Fit of mean RMSE ~ n^s, inverted to B_tilde = -8 gamma s / (1 + 2 s).
/// Throws when s <= -1/2 (the model has no finite B_tilde there).
PowerLawFit fit_power_law(const std::vector<double>& n_values, const std::vector<double>& mean_rmse, double gamma);
PowerLawFit fit_power_law(const RmseStudy& study, double gamma);

/// sum_{j+k>M} |rho_{j,k}|^2 <= (2 C^2 / (B r)) M^{2 - r/2} exp(-2 B M^{r/2})
/// for every M in [M_first, M_last], using exact entries at dimension 2 M_last.
/// Throws if the state is outside the class.
bool tail_bound_check(const StateModel& state, const ClassParams& params, int M_first, int M_last);

/// "n,rep,rmse,kappa"
void write_study_csv(std::ostream& out, const std::vector<RmseStudy>& studies);
/// "n,mean,std,lo3,hi3,kappa"
void write_summary_csv(std::ostream& out, const std::vector<RmseStudy>& studies);

struct StudyRow {
  std::size_t n = 0;
  int rep = 0;
  double rmse = 0.0;
  double kappa = 0.0;
};
/// Reads the per-replication CSV; errors carry the line number.
std::vector<StudyRow> read_study_csv(std::istream& in);

/// Per-n mean RMSE of rows with the given kappa, sorted by n.
std::pair<std::vector<double>, std::vector<double>> mean_by_n(const std::vector<StudyRow>& rows, double kappa);

nlohmann::json to_json(const PowerLawFit& fit, const std::vector<double>& n_grid, int reps);

}  // namespace qht
