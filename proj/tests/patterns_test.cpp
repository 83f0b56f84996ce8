#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qht/patterns.hpp"
#include "qht/states.hpp"

namespace qht {
namespace {

constexpr double kPi = std::numbers::pi;

TEST(PatternFt, Examples) {
  const Complex a = pattern_ft(0, 0, 2.0);
  EXPECT_NEAR(a.real(), 2.0 * kPi * std::exp(-1.0), 1e-14);
  EXPECT_NEAR(a.real(), 2.3115, 1e-4);
  EXPECT_EQ(a.imag(), 0.0);

  const Complex b = pattern_ft(1, 0, 1.0);
  EXPECT_NEAR(b.real(), 0.0, 1e-15);
  EXPECT_NEAR(b.imag(), -kPi / std::sqrt(2.0) * std::exp(-0.25), 1e-14);
  EXPECT_NEAR(b.imag(), -1.7301, 1e-4);

  for (int j = 0; j < 6; ++j) {
    for (int k = 0; k < 6; ++k) EXPECT_EQ(pattern_ft(j, k, 0.0), Complex(0.0));
  }
}

TEST(PatternFt, SymmetricInIndices) {
  for (int j = 0; j < 12; ++j) {
    for (int k = 0; k < j; ++k) {
      for (double t : {-3.0, 0.4, 2.5, 7.0}) EXPECT_EQ(pattern_ft(j, k, t), pattern_ft(k, j, t));
    }
  }
}

TEST(PatternFt, ExplicitSecondOrderForm) {
  // (2, 0): pi (-i)^2 sqrt(2^-2 / 2!) |t| t^2 e^{-t^2/4}
  for (double t : {-2.0, 0.7, 3.1}) {
    const double want = -kPi / (2.0 * std::sqrt(2.0)) * std::abs(t) * t * t * std::exp(-t * t / 4.0);
    EXPECT_NEAR(pattern_ft(2, 0, t).real(), want, 1e-13);
    EXPECT_NEAR(pattern_ft(2, 0, t).imag(), 0.0, 1e-13);
  }
  // (1, 1): pi |t| e^{-t^2/4} (1 - t^2/2)
  for (double t : {-2.0, 0.7, 3.1}) {
    const double want = kPi * std::abs(t) * std::exp(-t * t / 4.0) * (1.0 - t * t / 2.0);
    EXPECT_NEAR(pattern_ft(1, 1, t).real(), want, 1e-13);
  }
}

TEST(AdaptedFt, Examples) {
  const NoiseConfig ideal(1.0);
  for (double t : {-1.5, 0.3, 2.0, 6.0}) {
    EXPECT_NEAR(adapted_ft(0, 0, t, ideal).real(), kPi * std::abs(t) * std::exp(-t * t / 4.0), 1e-14);
  }
  const Complex a = adapted_ft(0, 0, 2.0, NoiseConfig(0.9));
  EXPECT_NEAR(a.real(), 2.0 * kPi * std::exp(-1.0) * std::exp(4.0 / 36.0), 1e-13);
  EXPECT_NEAR(a.real(), 2.5831, 1e-4);
}

TEST(AdaptedFt, HermitianFrequencySymmetry) {
  for (double eta : {0.7, 0.9, 1.0}) {
    const NoiseConfig cfg(eta);
    for (int j = 0; j <= 30; ++j) {
      for (int k = 0; j + k <= 30; ++k) {
        for (double t : {0.1, 1.3, 4.0, 9.5, 20.0}) {
          const Complex plus = adapted_ft(j, k, t, cfg);
          const Complex minus = adapted_ft(j, k, -t, cfg);
          EXPECT_NEAR(std::abs(minus - std::conj(plus)), 0.0, 1e-12 * (1.0 + std::abs(plus))) << j << "," << k;
        }
      }
    }
  }
}

TEST(AdaptedFt, DecaysForLargeFrequency) {
  const NoiseConfig cfg(0.6);
  for (int j = 0; j < 20; ++j) {
    EXPECT_LT(std::abs(adapted_ft(j, 0, 120.0, cfg)), 1e-100);
    EXPECT_TRUE(std::isfinite(std::abs(adapted_ft(j, j, 60.0, cfg))));
  }
}

TEST(ToleranceCutoff, SmallestAdmissible) {
  for (double gamma : {0.0, 1.0 / 36.0, 0.1}) {
    for (int N : {1, 10, 31}) {
      const double T = tolerance_cutoff(N, gamma, 1e-12, 200.0);
      auto margin = [&](double t) {
        return (0.25 - gamma) * t * t - (N + 2) * std::log(std::max(t, 2.0)) - std::log(1e12);
      };
      EXPECT_GE(margin(T), -1e-9);
      EXPECT_LT(margin(T - 0.01), 0.0);
    }
  }
  EXPECT_THROW(tolerance_cutoff(31, NoiseConfig(0.5 + 1e-6).gamma(), 1e-12, 200.0), std::runtime_error);
}

TEST(PatternTable, RejectsBadArguments) {
  EXPECT_THROW(PatternTable::build(0, NoiseConfig(1.0)), std::invalid_argument);
  TableOptions odd;
  odd.grid_size = 3000;
  EXPECT_THROW(PatternTable::build(4, NoiseConfig(1.0), odd), std::invalid_argument);
}

TEST(PatternTable, VacuumReconstruction) {
  const auto table = PatternTable::build(1, NoiseConfig(1.0));
  double acc = 0.0;
  for (int m = 0; m < table.grid_size(); ++m) {
    const double x = table.x_at(m);
    acc += table.node_value(0, 0, m) * std::exp(-x * x) / std::sqrt(kPi) * table.spacing();
  }
  EXPECT_NEAR(acc, 1.0, 1e-4);
}

TEST(PatternTable, ContinuousInEfficiency) {
  const auto a = PatternTable::build(10, NoiseConfig(1.0));
  const auto b = PatternTable::build(10, NoiseConfig(0.999999));
  ASSERT_EQ(a.spacing(), b.spacing());
  for (int p = 0; p < a.pair_count(); ++p) {
    const auto [j, k] = a.pair_at(p);
    double diff = 0.0;
    for (int m = 0; m < a.grid_size(); ++m) diff = std::max(diff, std::abs(a.node_value(j, k, m) - b.node_value(j, k, m)));
    EXPECT_LT(diff, 1e-3) << j << "," << k;
  }
}

TEST(PatternTable, StorageAndLookup) {
  const auto table = PatternTable::build(6, NoiseConfig(0.9));
  EXPECT_EQ(table.pair_count(), 12);  // unordered pairs with j + k <= 5
  EXPECT_TRUE(table.covers(2, 3));
  EXPECT_FALSE(table.covers(3, 3));
  EXPECT_THROW(table.pair_index(3, 3), std::out_of_range);
  EXPECT_THROW(table.pair_index(-1, 0), std::out_of_range);
  EXPECT_EQ(table.pair_index(1, 4), table.pair_index(4, 1));
  for (int p = 0; p < table.pair_count(); ++p) {
    const auto [j, k] = table.pair_at(p);
    EXPECT_GE(j, k);
    EXPECT_EQ(table.pair_index(j, k), p);
  }
  const auto meta = table.metadata();
  EXPECT_EQ(meta["N"], 6);
  EXPECT_EQ(meta["Q"], 4096);
  EXPECT_DOUBLE_EQ(meta["T"].get<double>(), table.cutoff());
}

TEST(PatternTable, InterpolationBasics) {
  const auto table = PatternTable::build(8, NoiseConfig(0.9));
  for (int m : {0, 1, 1000, 2048, 4095}) {
    EXPECT_EQ(table.eval(3, 2, table.x_at(m)), table.node_value(3, 2, m));
  }
  for (double x : {-3.3, 0.01, 1.7}) {
    EXPECT_EQ(table.eval(1, 5, x), table.eval(5, 1, x));
    EXPECT_EQ(eval_pattern(table, 1, 5, x), table.eval(1, 5, x));
  }
  EXPECT_EQ(table.eval(0, 0, table.x_max() + 1.0), 0.0);
  EXPECT_EQ(table.eval(0, 0, table.x_min() - 1e-9), 0.0);
  std::vector<double> all(table.pair_count());
  EXPECT_FALSE(table.eval_all(table.x_max() + 1.0, all));
  ASSERT_TRUE(table.eval_all(0.37, all));
  for (int p = 0; p < table.pair_count(); ++p) {
    const auto [j, k] = table.pair_at(p);
    EXPECT_EQ(all[p], table.eval(j, k, 0.37));
  }
}

TEST(PatternTable, MidpointsMatchFinerTable) {
  const NoiseConfig cfg(0.9);
  const auto coarse = PatternTable::build(10, cfg);
  TableOptions fine_opts;
  fine_opts.grid_size = 8192;
  const auto fine = PatternTable::build(10, cfg, fine_opts);
  ASSERT_NEAR(2.0 * fine.spacing(), coarse.spacing(), 1e-15);
  for (int p = 0; p < coarse.pair_count(); ++p) {
    const auto [j, k] = coarse.pair_at(p);
    double worst = 0.0;
    for (int m = 1000; m < 3096; ++m) {
      const double mid = 0.5 * (coarse.x_at(m) + coarse.x_at(m + 1));
      ASSERT_NEAR(fine.x_at(2 * m + 1), mid, 1e-12);
      worst = std::max(worst, std::abs(coarse.eval(j, k, mid) - fine.node_value(j, k, 2 * m + 1)));
    }
    EXPECT_LT(worst / coarse.sup_norm(j, k), 1e-4) << j << "," << k;
  }
}

class PatternProperties : public ::testing::TestWithParam<double> {};

TEST_P(PatternProperties, RealSymmetricAndStableUnderRefinement) {
  const NoiseConfig cfg(GetParam());
  const auto table = PatternTable::build(31, cfg);
  TableOptions finer_q;
  finer_q.grid_size = 8192;
  TableOptions wider_t;
  wider_t.half_width = 32.0;
  const auto q2 = PatternTable::build(31, cfg, finer_q);
  const auto t2 = PatternTable::build(31, cfg, wider_t);
  ASSERT_NEAR(t2.cutoff(), 2.0 * table.cutoff(), 1e-9);
  for (int j = 0; j <= 30; ++j) {
    for (int k = 0; j + k <= 30; ++k) {
      EXPECT_LT(table.imag_residue(j, k), 1e-9);
      EXPECT_EQ(table.sup_norm(j, k), table.sup_norm(k, j));
      EXPECT_EQ(sup_norm(table, j, k), table.sup_norm(j, k));
      EXPECT_LT(std::abs(q2.sup_norm(j, k) / table.sup_norm(j, k) - 1.0), 1e-3) << j << "," << k;
      EXPECT_LT(std::abs(t2.sup_norm(j, k) / table.sup_norm(j, k) - 1.0), 1e-3) << j << "," << k;
      double grid_max = 0.0;
      for (int m = 0; m < table.grid_size(); ++m) grid_max = std::max(grid_max, std::abs(table.node_value(j, k, m)));
      EXPECT_GE(table.sup_norm(j, k), grid_max);
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Efficiencies, PatternProperties, ::testing::Values(0.7, 0.9, 1.0));

double norm_sum(const PatternTable& table, int M) {
  double s = 0.0;
  for (int j = 0; j <= M; ++j) {
    for (int k = 0; j + k <= M; ++k) s += table.sup_norm(j, k) * table.sup_norm(j, k);
  }
  return s;
}

TEST(PatternTable, NormGrowthNoiseless) {
  const auto table = PatternTable::build(31, NoiseConfig(1.0));
  // constant fitted at the start of the range, then 25% slack
  const double c = norm_sum(table, 5) / std::pow(5.0, 10.0 / 3.0);
  for (int M = 5; M <= 30; ++M) EXPECT_LE(norm_sum(table, M), 1.25 * c * std::pow(M, 10.0 / 3.0)) << M;
}

TEST(PatternTable, NormGrowthNoisy) {
  const NoiseConfig cfg(0.9);
  const auto table = PatternTable::build(31, cfg);
  std::vector<double> ms, logs;
  for (int M = 10; M <= 30; ++M) {
    ms.push_back(M);
    logs.push_back(std::log(norm_sum(table, M)));
  }
  const double mx = (ms.front() + ms.back()) / 2.0;
  double my = 0.0;
  for (double v : logs) my += v;
  my /= logs.size();
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < ms.size(); ++i) {
    sxy += (ms[i] - mx) * (logs[i] - my);
    sxx += (ms[i] - mx) * (ms[i] - mx);
  }
  EXPECT_GT(sxy / sxx, 0.0);
  EXPECT_LE(sxy / sxx, 8.0 * cfg.gamma() * 1.25);
}

TEST(KernelG, PhaseConventions) {
  const auto table = PatternTable::build(6, NoiseConfig(0.9));
  for (double x : {-1.2, 0.3, 2.2}) {
    for (double phi : {0.0, 0.8, 2.9}) {
      EXPECT_EQ(kernel_G(table, 2, 2, x, phi).imag(), 0.0);
      const Complex g = kernel_G(table, 3, 1, x, phi);
      const Complex h = kernel_G(table, 1, 3, x, phi);
      EXPECT_NEAR(std::abs(g - std::conj(h)), 0.0, 1e-15);
      EXPECT_LE(std::abs(g), table.sup_norm(3, 1));
    }
    const Complex q = kernel_G(table, 1, 0, x, kPi / 2);
    EXPECT_NEAR(q.real(), 0.0, 1e-15);
    EXPECT_NEAR(q.imag(), -table.eval(1, 0, x), 1e-15);
  }
}

TEST(Reconstruction, NoiselessIdentity) {
  const auto table = PatternTable::build(7, NoiseConfig(1.0));
  const std::vector<StateModel> states{StateModel::vacuum(), StateModel::single_photon(), StateModel::coherent(3.0),
                                       StateModel::thermal(0.25), StateModel::cat(3.0)};
  for (const auto& s : states) {
    const auto truth = density_matrix(s, 8);
    const auto rec = oracle::reconstruct(table, 6, [&](double x, double phi) { return quadrature_density(s, x, phi); });
    for (int j = 0; j <= 6; ++j) {
      for (int k = 0; j + k <= 6; ++k) {
        EXPECT_LT(std::abs(rec[j][k] - truth(j, k)), 1e-3) << s.name() << " (" << j << "," << k << ")";
      }
    }
  }
}

TEST(Reconstruction, NoisyKernelIsUnbiased) {
  const NoiseConfig cfg(0.9);
  const auto table = PatternTable::build(5, cfg);
  for (const auto& s : {StateModel::vacuum(), StateModel::coherent(1.0)}) {
    const auto truth = density_matrix(s, 6);
    const auto mean = oracle::noisy_kernel_mean(table, 4, s, cfg);
    for (int j = 0; j <= 4; ++j) {
      for (int k = 0; j + k <= 4; ++k) {
        EXPECT_LT(std::abs(mean[j][k] - truth(j, k)), 1e-3) << s.name() << " (" << j << "," << k << ")";
      }
    }
  }
}

}  // namespace
}  // namespace qht
