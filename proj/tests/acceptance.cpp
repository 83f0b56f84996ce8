// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.
// A criterion passes only when its check holds within its time budget.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "qht/estimator.hpp"
#include "qht/evaluation.hpp"
#include "qht/measurement.hpp"
#include "qht/parallel.hpp"
#include "qht/patterns.hpp"
#include "qht/states.hpp"

using namespace qht;

namespace {

struct Outcome {
  bool ok = false;
  std::string detail;
};

int failures = 0;

void criterion(int id, const char* title, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome r;
  try {
    r = body();
  } catch (const std::exception& e) {
    r = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = secs <= budget_s;
  const bool pass = r.ok && in_time;
  if (!pass) ++failures;
  std::printf("[%s] %2d %s: %s (%.1fs / %.0fs budget%s)\n", pass ? "PASS" : "FAIL", id, title, r.detail.c_str(), secs,
              budget_s, in_time ? "" : ", over budget");
  std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::vector<StateModel> table1_states() {
  return {StateModel::vacuum(), StateModel::single_photon(), StateModel::coherent(3.0), StateModel::thermal(0.25),
          StateModel::cat(3.0)};
}

const int kThreads = resolve_threads(0);

// criterion 3 replications are reused by criterion 4
std::vector<CoverageStudy> coverage_runs;

}  // namespace

int main() {
  std::printf("acceptance: %d worker thread(s)\n", kThreads);

  criterion(1, "noiseless reconstruction identity, j+k<=6", 30.0, [] {
    const auto table = PatternTable::build(7, NoiseConfig(1.0));
    double worst = 0.0;
    for (const auto& s : table1_states()) {
      const auto truth = density_matrix(s, 8);
      const auto rec =
          oracle::reconstruct(table, 6, [&](double x, double phi) { return quadrature_density(s, x, phi); });
      for (int j = 0; j <= 6; ++j) {
        for (int k = 0; j + k <= 6; ++k) worst = std::max(worst, std::abs(rec[j][k] - truth(j, k)));
      }
    }
    return Outcome{worst < 1e-3, fmt("max |error| = %.2e (< 1e-3)", worst)};
  });

  criterion(2, "noisy unbiasedness, 200 reps, n=1e4, eta=0.9", 120.0, [] {
    const NoiseConfig noise(0.9);
    const int N = 5;
    const int reps = 200;
    const std::size_t n = 10000;
    const auto table = PatternTable::build(N, noise);
    double worst_z = 0.0;
    bool ok = true;
    for (const auto& s : {StateModel::vacuum(), StateModel::coherent(1.0)}) {
      const auto truth = density_matrix(s, N);
      std::vector<DensityMatrix> raws(reps);
      parallel_for(reps, kThreads, [&](std::size_t r) {
        const auto rec = simulate(s, noise, n, replication_seed(2024, n, static_cast<int>(r)));
        raws[r] = raw_estimate(rec, table, N, 0.9);
      });
      for (const auto& [j, k] : index_set(N)) {
        for (int part = 0; part < 2; ++part) {
          auto pick = [&](Complex z) { return part == 0 ? z.real() : z.imag(); };
          double mean = 0.0;
          for (const auto& m : raws) mean += pick(m(j, k));
          mean /= reps;
          double var = 0.0;
          for (const auto& m : raws) var += (pick(m(j, k)) - mean) * (pick(m(j, k)) - mean);
          const double se = std::sqrt(var / (reps - 1) / reps);
          const double dev = std::abs(mean - pick(truth(j, k)));
          if (se == 0.0) {
            ok = ok && dev <= 1e-12;
          } else {
            worst_z = std::max(worst_z, dev / se);
            ok = ok && dev <= 4.0 * se;
          }
        }
      }
    }
    return Outcome{ok, fmt("max |mean - rho| / s.e. = %.2f (<= 4)", worst_z)};
  });

  criterion(3, "coverage at epsilon=0.1, n=1e4, 100 reps", 120.0, [] {
    EstimatorConfig cfg;
    cfg.eta = 0.9;
    cfg.epsilon = 0.1;
    cfg.threads = kThreads;
    coverage_runs.clear();
    coverage_runs.push_back(coverage_study(StateModel::vacuum(), cfg, 10000, 100, 31));
    coverage_runs.push_back(coverage_study(StateModel::thermal(0.25), cfg, 10000, 100, 32));
    const double a = coverage_runs[0].rate();
    const double b = coverage_runs[1].rate();
    char buf[160];
    std::snprintf(buf, sizeof buf, "vacuum %.2f, thermal %.2f (>= 0.9), N=%d", a, b, coverage_runs[0].N_used);
    return Outcome{a >= 0.9 && b >= 0.9, buf};
  });

  criterion(4, "oracle inequality on covered replications", 120.0, [] {
    if (coverage_runs.empty()) return Outcome{false, "criterion 3 produced no replications"};
    int checked = 0;
    int violated = 0;
    double worst_ratio = 0.0;
    for (const auto& st : coverage_runs) {
      for (const auto& r : st.replications) {
        if (!r.covered) continue;
        ++checked;
        if (r.loss > r.oracle_bound + 1e-12) ++violated;
        worst_ratio = std::max(worst_ratio, r.loss / r.oracle_bound);
      }
    }
    char buf[160];
    std::snprintf(buf, sizeof buf, "%d covered runs, %d violations, max loss/bound = %.3f", checked, violated,
                  worst_ratio);
    return Outcome{checked > 0 && violated == 0, buf};
  });

  criterion(5, "RMSE decay, coherent q0=3, N=30", 600.0, [] {
    EstimatorConfig cfg;
    cfg.eta = 0.9;
    cfg.N_override = 30;
    cfg.threads = kThreads;
    const auto st = run_study(StateModel::coherent(3.0), cfg, {1000, 10000, 100000}, 10, 5);
    const auto m = st.mean();
    const bool ok = m(0) > m(1) && m(1) > m(2) && m.minCoeff() > 0.0 && m.maxCoeff() < 1.0;
    char buf[160];
    std::snprintf(buf, sizeof buf, "mean RMSE %.4f > %.4f > %.4f, all in (0, 1)", m(0), m(1), m(2));
    return Outcome{ok, buf};
  });

  criterion(6, "power-law fit, coherent q0=3, n <= 2e5, 20 reps", 1800.0, [] {
    EstimatorConfig cfg;
    cfg.eta = 0.9;
    cfg.N_override = 30;
    cfg.threads = kThreads;
    const std::vector<std::size_t> grid{1000, 2000, 5000, 10000, 20000, 50000, 100000, 200000};
    const auto st = run_study(StateModel::coherent(3.0), cfg, grid, 20, 6);
    const auto fit = fit_power_law(st, NoiseConfig(0.9).gamma());
    char buf[160];
    std::snprintf(buf, sizeof buf, "slope %.4f, B_tilde %.4f (in [0.094, 0.254])", fit.slope, fit.B_tilde);
    return Outcome{fit.B_tilde >= 0.174 - 0.08 && fit.B_tilde <= 0.174 + 0.08, buf};
  });

  criterion(7, "threshold scale 0.5 vs 1.0 at n=1e5", 900.0, [] {
    EstimatorConfig cfg;
    cfg.eta = 0.9;
    cfg.N_override = 30;
    cfg.threads = kThreads;
    bool ok = true;
    std::string detail;
    const std::vector<std::pair<const char*, StateModel>> states{
        {"coherent", StateModel::coherent(3.0)}, {"cat", StateModel::cat(3.0)}, {"thermal", StateModel::thermal(0.25)}};
    for (const auto& [name, s] : states) {
      const auto sweep = threshold_scale_sweep(s, cfg, {100000}, {0.5, 1.0}, 10, 7);
      const double half = sweep[0].mean()(0);
      const double full = sweep[1].mean()(0);
      ok = ok && half <= full;
      char buf[96];
      std::snprintf(buf, sizeof buf, "%s%s %.4f vs %.4f", detail.empty() ? "" : ", ", name, half, full);
      detail += buf;
    }
    return Outcome{ok, detail};
  });

  criterion(8, "pure-state rate, single photon", 600.0, [] {
    EstimatorConfig cfg;
    cfg.eta = 0.9;
    cfg.threads = kThreads;
    const std::vector<std::size_t> grid{1000, 10000, 100000};
    const auto st = run_study(StateModel::single_photon(), cfg, grid, 20, 8);
    const auto mse = st.mean_squared_error();
    std::vector<double> x, y;
    for (std::size_t c = 0; c < grid.size(); ++c) {
      x.push_back(std::log(static_cast<double>(grid[c])));
      y.push_back(std::log(mse(static_cast<Eigen::Index>(c))));
    }
    const double slope = ols_slope(x, y);
    char buf[160];
    std::snprintf(buf, sizeof buf, "slope of ln MSE on ln n = %.3f (in [-1.2, -0.8]), N = %d/%d/%d", slope,
                  st.N_used[0], st.N_used[1], st.N_used[2]);
    return Outcome{slope >= -1.2 && slope <= -0.8, buf};
  });

  criterion(9, "pattern-function properties, j+k<=30", 60.0, [] {
    double residue = 0.0;
    double drift = 0.0;
    double hermitian = 0.0;
    double asym = 0.0;
    for (double eta : {0.7, 0.9, 1.0}) {
      const NoiseConfig noise(eta);
      TableOptions base;
      base.threads = kThreads;
      TableOptions fine = base;
      fine.grid_size = 2 * base.grid_size;
      const auto table = PatternTable::build(31, noise, base);
      const auto finer = PatternTable::build(31, noise, fine);
      for (int j = 0; j <= 30; ++j) {
        for (int k = 0; j + k <= 30; ++k) {
          residue = std::max(residue, table.imag_residue(j, k));
          drift = std::max(drift, std::abs(finer.sup_norm(j, k) / table.sup_norm(j, k) - 1.0));
          for (double x : {-2.3, 0.0, 0.61, 4.2}) asym = std::max(asym, std::abs(table.eval(j, k, x) - table.eval(k, j, x)));
          for (double t : {0.2, 1.7, 5.0, 11.0}) {
            const Complex a = adapted_ft(j, k, t, noise);
            const Complex b = adapted_ft(k, j, t, noise);
            asym = std::max(asym, std::abs(a - b));
            hermitian = std::max(hermitian, std::abs(adapted_ft(j, k, -t, noise) - std::conj(a)) / (1.0 + std::abs(a)));
          }
        }
      }
    }
    char buf[200];
    std::snprintf(buf, sizeof buf, "imag residue %.1e (< 1e-9), asymmetry %.1e, conj defect %.1e, Q-doubling drift %.1e (< 1e-3)",
                  residue, asym, hermitian, drift);
    return Outcome{residue < 1e-9 && asym == 0.0 && hermitian < 1e-12 && drift < 1e-3, buf};
  });

  criterion(10, "tail bound, thermal beta=1/4, (C, B, r) = (1, 1/8, 2)", 1.0, [] {
    const bool ok = tail_bound_check(StateModel::thermal(0.25), {1.0, 0.125, 2.0}, 10, 40);
    return Outcome{ok, ok ? "holds for M in [10, 40]" : "violated"};
  });

  std::printf("acceptance: %d criterion(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
