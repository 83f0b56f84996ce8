#include "qht/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "qht/parallel.hpp"

namespace qht {

namespace {

constexpr int kMinTruthDim = 40;

int resolve_N(const EstimatorConfig& cfg, std::size_t n) {
  const int N = cfg.N_override ? *cfg.N_override : choose_N(n, cfg.r0, cfg.B0);
  if (N < 1) throw std::invalid_argument("N(n) is empty for n=" + std::to_string(n));
  return N;
}

PatternTable table_for(const EstimatorConfig& cfg, int N_max) {
  TableOptions options = cfg.table;
  options.threads = cfg.threads;
  return PatternTable::build(N_max, NoiseConfig(cfg.eta), options);
}

void check_grid(const std::vector<std::size_t>& n_grid, int reps, int min_reps) {
  if (n_grid.empty()) throw std::invalid_argument("study: empty n grid");
  for (std::size_t n : n_grid) {
    if (n < 2) throw std::invalid_argument("study: every n must be >= 2");
  }
  if (reps < min_reps) throw std::invalid_argument("study: reps must be >= " + std::to_string(min_reps));
}

}  // namespace

double relative_rmse(const DensityMatrix& est, const DensityMatrix& truth) {
  const double denom = truth.squared_norm();
  if (!(denom > 0.0)) throw std::invalid_argument("relative_rmse: zero truth matrix");
  return std::sqrt(squared_distance(est, truth) / denom);
}

Eigen::VectorXd RmseStudy::mean() const { return rmse.colwise().mean().transpose(); }

Eigen::VectorXd RmseStudy::std_dev() const {
  const Eigen::VectorXd mu = mean();
  Eigen::VectorXd out(rmse.cols());
  for (Eigen::Index c = 0; c < rmse.cols(); ++c) {
    const double ss = (rmse.col(c).array() - mu(c)).square().sum();
    out(c) = rmse.rows() > 1 ? std::sqrt(ss / (rmse.rows() - 1)) : 0.0;
  }
  return out;
}

Eigen::VectorXd RmseStudy::mean_squared_error() const { return squared_error.colwise().mean().transpose(); }

std::uint64_t replication_seed(std::uint64_t master_seed, std::size_t n, int rep) {
  return derive_seed(derive_seed(master_seed, n), static_cast<std::uint64_t>(rep));
}

DensityMatrix scoring_truth(const StateModel& state, int N) {
  return density_matrix(state, std::max(N, kMinTruthDim));
}

std::vector<RmseStudy> threshold_scale_sweep(const StateModel& state, const EstimatorConfig& cfg,
                                             const std::vector<std::size_t>& n_grid,
                                             const std::vector<double>& scales, int reps,
                                             std::uint64_t master_seed) {
  cfg.validate();
  check_grid(n_grid, reps, 2);
  if (scales.empty()) throw std::invalid_argument("threshold sweep: no scales");
  for (double s : scales) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw std::invalid_argument("threshold sweep: scales must be >= 0");
  }

  std::vector<int> Ns;
  for (std::size_t n : n_grid) Ns.push_back(resolve_N(cfg, n));
  const int N_max = *std::max_element(Ns.begin(), Ns.end());
  const PatternTable table = table_for(cfg, N_max);
  const NoiseConfig noise(cfg.eta);

  const auto cols = static_cast<Eigen::Index>(n_grid.size());
  std::vector<RmseStudy> studies(scales.size());
  for (std::size_t s = 0; s < scales.size(); ++s) {
    RmseStudy& st = studies[s];
    st.state = state;
    st.cfg = cfg;
    st.cfg.kappa = scales[s];
    st.n_grid = n_grid;
    st.reps = reps;
    st.master_seed = master_seed;
    st.rmse = Eigen::MatrixXd::Zero(reps, cols);
    st.squared_error = Eigen::MatrixXd::Zero(reps, cols);
    st.N_used = Ns;
    for (int N : Ns) st.tail_mass.push_back(scoring_truth(state, N).tail_mass(N));
  }

  const std::size_t tasks = n_grid.size() * static_cast<std::size_t>(reps);
  parallel_for(tasks, cfg.threads, [&](std::size_t task) {
    const std::size_t col = task / reps;
    const int rep = static_cast<int>(task % reps);
    const std::size_t n = n_grid[col];
    const int N = Ns[col];
    const auto records = simulate(state, noise, n, replication_seed(master_seed, n, rep), 1);
    const DensityMatrix raw = raw_estimate(records, table, N, cfg.eta, 1);
    const ThresholdMatrix base = thresholds(table, N, n, cfg.epsilon, 1.0);
    const DensityMatrix truth = scoring_truth(state, N);
    for (std::size_t s = 0; s < scales.size(); ++s) {
      const DensityMatrix est = soft_threshold(raw, scales[s] * base);
      const double sq = squared_distance(est, truth);
      studies[s].squared_error(rep, static_cast<Eigen::Index>(col)) = sq;
      studies[s].rmse(rep, static_cast<Eigen::Index>(col)) = std::sqrt(sq / truth.squared_norm());
    }
  });
  return studies;
}

RmseStudy run_study(const StateModel& state, const EstimatorConfig& cfg, const std::vector<std::size_t>& n_grid,
                    int reps, std::uint64_t master_seed) {
  return threshold_scale_sweep(state, cfg, n_grid, {cfg.kappa}, reps, master_seed).front();
}

double CoverageStudy::rate() const {
  if (replications.empty()) return 0.0;
  const auto hits = std::count_if(replications.begin(), replications.end(), [](const auto& r) { return r.covered; });
  return static_cast<double>(hits) / static_cast<double>(replications.size());
}

CoverageStudy coverage_study(const StateModel& state, const EstimatorConfig& cfg, std::size_t n, int reps,
                             std::uint64_t master_seed) {
  cfg.validate();
  if (!(cfg.epsilon > 0.0 && cfg.epsilon < 1.0)) {
    throw std::invalid_argument("coverage: epsilon must lie in (0, 1); the deviation bound is vacuous at 1");
  }
  check_grid({n}, reps, 10);
  const int N = resolve_N(cfg, n);
  const PatternTable table = table_for(cfg, N);
  const NoiseConfig noise(cfg.eta);
  const DensityMatrix truth = scoring_truth(state, N);

  CoverageStudy study;
  study.N_used = N;
  study.replications.resize(reps);
  parallel_for(static_cast<std::size_t>(reps), cfg.threads, [&](std::size_t rep) {
    const auto records = simulate(state, noise, n, replication_seed(master_seed, n, static_cast<int>(rep)), 1);
    const DensityMatrix raw = raw_estimate(records, table, N, cfg.eta, 1);
    const ThresholdMatrix t = thresholds(table, N, n, cfg.epsilon, cfg.kappa);
    const DensityMatrix est = soft_threshold(raw, t);
    auto& out = study.replications[rep];
    out.covered = deviation_event(raw, truth, t, N);
    out.loss = squared_distance(est, truth);
    out.oracle_bound = oracle_bound(truth, t, N);
  });
  return study;
}

double coverage_rate(const StateModel& state, const EstimatorConfig& cfg, std::size_t n, int reps,
                     std::uint64_t master_seed) {
  return coverage_study(state, cfg, n, reps, master_seed).rate();
}

double ols_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("ols_slope: need >= 2 paired points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("ols_slope: abscissae are all equal");
  return sxy / sxx;
}

PowerLawFit fit_power_law(const std::vector<double>& n_values, const std::vector<double>& mean_rmse, double gamma) {
  if (n_values.size() != mean_rmse.size()) throw std::invalid_argument("fit_power_law: size mismatch");
  std::vector<double> sorted = n_values;
  std::sort(sorted.begin(), sorted.end());
  if (std::unique(sorted.begin(), sorted.end()) - sorted.begin() < 3) {
    throw std::invalid_argument("fit_power_law: need at least 3 distinct sample sizes");
  }
  std::vector<double> lx;
  std::vector<double> ly;
  for (std::size_t i = 0; i < n_values.size(); ++i) {
    if (!(n_values[i] > 0.0) || !(mean_rmse[i] > 0.0)) {
      throw std::invalid_argument("fit_power_law: sample sizes and mean RMSE must be positive");
    }
    lx.push_back(std::log(n_values[i]));
    ly.push_back(std::log(mean_rmse[i]));
  }
  PowerLawFit fit;
  fit.gamma = gamma;
  fit.slope = ols_slope(lx, ly);
  if (!(1.0 + 2.0 * fit.slope > 0.0)) {
    throw std::domain_error("fit_power_law: slope " + std::to_string(fit.slope) +
                            " <= -1/2; the rate model n^{-B/(2(4 gamma + B))} admits no finite B");
  }
  fit.B_tilde = -8.0 * gamma * fit.slope / (1.0 + 2.0 * fit.slope);
  return fit;
}

PowerLawFit fit_power_law(const RmseStudy& study, double gamma) {
  const Eigen::VectorXd mu = study.mean();
  std::vector<double> n_values(study.n_grid.begin(), study.n_grid.end());
  return fit_power_law(n_values, std::vector<double>(mu.data(), mu.data() + mu.size()), gamma);
}

bool tail_bound_check(const StateModel& state, const ClassParams& params, int M_first, int M_last) {
  params.validate();
  if (M_first < 1 || M_last < M_first) throw std::invalid_argument("tail_bound_check: need 1 <= M_first <= M_last");
  const DensityMatrix rho = density_matrix(state, 2 * M_last);
  if (!class_envelope_check(rho, params)) {
    throw std::invalid_argument("tail_bound_check: state " + state.name() + " is outside the class R(C, B, r)");
  }
  const double constant = 2.0 * params.C * params.C / (params.B * params.r);
  for (int M = M_first; M <= M_last; ++M) {
    const double tail = rho.tail_mass(M + 1);
    const double bound =
        constant * std::pow(M, 2.0 - 0.5 * params.r) * std::exp(-2.0 * params.B * std::pow(M, 0.5 * params.r));
    if (tail > bound) return false;
  }
  return true;
}

void write_study_csv(std::ostream& out, const std::vector<RmseStudy>& studies) {
  out << "n,rep,rmse,kappa\n" << std::setprecision(17);
  for (const auto& st : studies) {
    for (std::size_t c = 0; c < st.n_grid.size(); ++c) {
      for (int r = 0; r < st.reps; ++r) {
        out << st.n_grid[c] << ',' << r << ',' << st.rmse(r, static_cast<Eigen::Index>(c)) << ',' << st.kappa()
            << '\n';
      }
    }
  }
}

void write_summary_csv(std::ostream& out, const std::vector<RmseStudy>& studies) {
  out << "n,mean,std,lo3,hi3,kappa\n" << std::setprecision(17);
  for (const auto& st : studies) {
    const Eigen::VectorXd mu = st.mean();
    const Eigen::VectorXd sd = st.std_dev();
    for (std::size_t c = 0; c < st.n_grid.size(); ++c) {
      const auto i = static_cast<Eigen::Index>(c);
      out << st.n_grid[c] << ',' << mu(i) << ',' << sd(i) << ',' << mu(i) - 3.0 * sd(i) << ','
          << mu(i) + 3.0 * sd(i) << ',' << st.kappa() << '\n';
    }
  }
}

std::vector<StudyRow> read_study_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw std::runtime_error("study CSV: empty input");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "n,rep,rmse,kappa") throw std::runtime_error("study CSV line 1: expected header n,rep,rmse,kappa");
  std::vector<StudyRow> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream fields(line);
    StudyRow row;
    char c1 = 0;
    char c2 = 0;
    char c3 = 0;
    if (!(fields >> row.n >> c1 >> row.rep >> c2 >> row.rmse >> c3 >> row.kappa) || c1 != ',' || c2 != ',' ||
        c3 != ',' || !(fields >> std::ws).eof()) {
      throw std::runtime_error("study CSV line " + std::to_string(line_no) + ": malformed row '" + line + "'");
    }
    rows.push_back(row);
  }
  if (rows.empty()) throw std::runtime_error("study CSV: no rows");
  return rows;
}

std::pair<std::vector<double>, std::vector<double>> mean_by_n(const std::vector<StudyRow>& rows, double kappa) {
  std::map<std::size_t, std::pair<double, int>> acc;
  for (const auto& r : rows) {
    if (std::abs(r.kappa - kappa) > 1e-12) continue;
    auto& slot = acc[r.n];
    slot.first += r.rmse;
    slot.second += 1;
  }
  if (acc.empty()) throw std::runtime_error("study CSV: no rows with kappa=" + std::to_string(kappa));
  std::pair<std::vector<double>, std::vector<double>> out;
  for (const auto& [n, sum] : acc) {
    out.first.push_back(static_cast<double>(n));
    out.second.push_back(sum.first / sum.second);
  }
  return out;
}

nlohmann::json to_json(const PowerLawFit& fit, const std::vector<double>& n_grid, int reps) {
  return {{"slope", fit.slope}, {"B_tilde", fit.B_tilde}, {"gamma", fit.gamma}, {"n_grid", n_grid}, {"reps", reps}};
}

}  // namespace qht
