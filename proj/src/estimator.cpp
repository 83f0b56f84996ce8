#include "qht/estimator.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "qht/parallel.hpp"

namespace qht {

namespace {

constexpr std::size_t kReductionBlock = 4096;

}  // namespace

void EstimatorConfig::validate() const {
  NoiseConfig{eta};
  if (!(epsilon > 0.0 && epsilon <= 1.0)) throw std::invalid_argument("epsilon must lie in (0, 1]");
  if (!(r0 > 0.0 && r0 <= 2.0)) throw std::invalid_argument("r0 must lie in (0, 2]");
  if (!(B0 > 0.0)) throw std::invalid_argument("B0 must be > 0");
  if (!(kappa >= 0.0) || !std::isfinite(kappa)) throw std::invalid_argument("kappa must be finite and >= 0");
  if (N_override && *N_override < 1) throw std::invalid_argument("N must be >= 1");
}

nlohmann::json EstimatorConfig::to_json() const {
  nlohmann::json j{{"eta", eta},     {"epsilon", epsilon}, {"r0", r0},          {"B0", B0},
                   {"kappa", kappa}, {"grid", table.grid_size}, {"N_override", nullptr}};
  if (N_override) j["N_override"] = *N_override;
  return j;
}

int choose_N(std::size_t n, double r0, double B0) {
  if (n < 2) throw std::invalid_argument("choose_N: n must be >= 2");
  if (!(r0 > 0.0) || !(B0 > 0.0)) throw std::invalid_argument("choose_N: r0 and B0 must be > 0");
  const double value = std::pow(std::log(static_cast<double>(n)) / (2.0 * B0), 2.0 / r0);
  return static_cast<int>(std::floor(value));
}

std::vector<std::pair<int, int>> index_set(int N) {
  if (N < 1) throw std::invalid_argument("index_set: N must be >= 1");
  std::vector<std::pair<int, int>> out;
  out.reserve(static_cast<std::size_t>(N) * (N + 1) / 2);
  for (int j = 0; j < N; ++j) {
    for (int k = 0; j + k < N; ++k) out.emplace_back(j, k);
  }
  return out;
}

DensityMatrix raw_estimate(std::span<const MeasurementRecord> records, const PatternTable& table, int N,
                           double data_eta, int threads, std::size_t* out_of_range) {
  if (records.empty()) throw std::invalid_argument("raw_estimate: no records");
  if (N < 1) throw std::invalid_argument("raw_estimate: N must be >= 1");
  if (N > table.max_index_sum()) {
    throw std::invalid_argument("raw_estimate: table covers N=" + std::to_string(table.max_index_sum()) +
                                " but N=" + std::to_string(N) + " was requested");
  }
  if (std::abs(table.eta() - data_eta) > 1e-12) {
    throw std::invalid_argument("raw_estimate: pattern table built for eta=" + std::to_string(table.eta()) +
                                " but data declare eta=" + std::to_string(data_eta));
  }

  const int P = table.pair_count();
  // slots used by this N, with their phase order d = j - k
  std::vector<int> slots;
  std::vector<int> order;
  for (int p = 0; p < P; ++p) {
    const auto [j, k] = table.pair_at(p);
    if (j + k < N) {
      slots.push_back(p);
      order.push_back(j - k);
    }
  }
  const std::size_t S = slots.size();
  const double inv_sqrt_eta = 1.0 / std::sqrt(data_eta);

  const std::size_t blocks = (records.size() + kReductionBlock - 1) / kReductionBlock;
  std::vector<std::vector<Complex>> partial(blocks, std::vector<Complex>(S));
  std::vector<std::size_t> misses(blocks, 0);

  parallel_for(blocks, threads, [&](std::size_t b) {
    std::vector<double> f(P);
    std::vector<Complex> phase(N);
    auto& acc = partial[b];
    const std::size_t end = std::min(records.size(), (b + 1) * kReductionBlock);
    for (std::size_t i = b * kReductionBlock; i < end; ++i) {
      const MeasurementRecord& r = records[i];
      if (!table.eval_all(r.y * inv_sqrt_eta, f)) {
        ++misses[b];
        continue;
      }
      // e^{-i d phi}
      for (int d = 0; d < N; ++d) phase[d] = std::polar(1.0, -d * r.phi);
      for (std::size_t s = 0; s < S; ++s) acc[s] += f[slots[s]] * phase[order[s]];
    }
  });

  for (std::size_t stride = 1; stride < blocks; stride *= 2) {
    for (std::size_t i = 0; i + stride < blocks; i += 2 * stride) {
      for (std::size_t s = 0; s < S; ++s) partial[i][s] += partial[i + stride][s];
      misses[i] += misses[i + stride];
    }
  }
  if (out_of_range) *out_of_range = misses[0];

  const double inv_n = 1.0 / static_cast<double>(records.size());
  DensityMatrix out(N);
  for (std::size_t s = 0; s < S; ++s) {
    const auto [j, k] = table.pair_at(slots[s]);
    const Complex mean = partial[0][s] * inv_n;
    out(j, k) = mean;
    if (j != k) out(k, j) = std::conj(mean);
  }
  return out;
}

ThresholdMatrix thresholds(const PatternTable& table, int N, std::size_t n, double epsilon, double kappa) {
  if (n < 1) throw std::invalid_argument("thresholds: n must be >= 1");
  if (!(epsilon > 0.0 && epsilon <= 1.0)) throw std::invalid_argument("thresholds: epsilon must lie in (0, 1]");
  if (N > table.max_index_sum()) throw std::invalid_argument("thresholds: table does not cover N");
  const double scale = kappa * 2.0 *
                       std::sqrt(std::log(2.0 * N * (N + 1.0) / epsilon) / static_cast<double>(n));
  ThresholdMatrix t = ThresholdMatrix::Zero(N, N);
  for (const auto& [j, k] : index_set(N)) t(j, k) = scale * table.sup_norm(j, k);
  return t;
}

namespace {

// Point of the disc |z - centre| <= radius closest to z0.
Complex project_to_disc(Complex z0, Complex centre, double radius) {
  const Complex diff = centre - z0;
  const double dist = std::abs(diff);
  if (dist <= radius) return z0;
  return z0 + diff / dist * (dist - radius);
}

}  // namespace

DensityMatrix soft_threshold(const DensityMatrix& raw, const ThresholdMatrix& t) {
  if (t.rows() != raw.dim() || t.cols() != raw.dim()) throw std::invalid_argument("soft_threshold: shape mismatch");
  DensityMatrix out(raw.dim());
  for (int j = 0; j < raw.dim(); ++j) {
    for (int k = 0; k < raw.dim(); ++k) {
      const Complex v = raw(j, k);
      const double mag = std::abs(v);
      if (t(j, k) == 0.0) {
        out(j, k) = v;
      } else if (mag > t(j, k)) {
        out(j, k) = v / mag * (mag - t(j, k));
      }
    }
  }
  return out;
}

DensityMatrix project_coordinate(const DensityMatrix& nu, const DensityMatrix& raw, const ThresholdMatrix& t, int j,
                                 int k) {
  DensityMatrix out = nu;
  out(j, k) = project_to_disc(nu(j, k), raw(j, k), t(j, k));
  return out;
}

EstimationResult estimate(std::span<const MeasurementRecord> records, const EstimatorConfig& cfg,
                          const PatternTable* table) {
  cfg.validate();
  if (records.empty()) throw std::invalid_argument("estimate: no records");
  const int N = cfg.N_override ? *cfg.N_override : choose_N(records.size(), cfg.r0, cfg.B0);
  if (N < 1) {
    throw std::invalid_argument("estimate: N(n)=" + std::to_string(N) + " from r0/B0 is empty; supply N explicitly");
  }

  std::optional<PatternTable> owned;
  if (table == nullptr || table->max_index_sum() < N || std::abs(table->eta() - cfg.eta) > 1e-12) {
    TableOptions options = cfg.table;
    options.threads = cfg.threads;
    owned = PatternTable::build(N, NoiseConfig(cfg.eta), options);
    table = &*owned;
  }

  EstimationResult result;
  result.N_used = N;
  result.n_samples = records.size();
  result.raw = raw_estimate(records, *table, N, cfg.eta, cfg.threads, &result.out_of_range);
  result.thresholds = thresholds(*table, N, records.size(), cfg.epsilon, cfg.kappa);
  result.thresholded = soft_threshold(result.raw, result.thresholds);
  return result;
}

double oracle_bound(const DensityMatrix& rho_true, const ThresholdMatrix& t, int N) {
  if (rho_true.dim() < N) throw std::invalid_argument("oracle_bound: truth truncation smaller than N");
  if (t.rows() < N || t.cols() < N) throw std::invalid_argument("oracle_bound: thresholds do not cover J(N)");
  double bound = 0.0;
  for (int j = 0; j < rho_true.dim(); ++j) {
    for (int k = 0; k < rho_true.dim(); ++k) {
      const double mass = std::norm(rho_true(j, k));
      if (j + k < N) {
        bound += std::min(4.0 * t(j, k) * t(j, k), mass);
      } else {
        bound += mass;
      }
    }
  }
  return bound;
}

bool deviation_event(const DensityMatrix& raw, const DensityMatrix& rho_true, const ThresholdMatrix& t, int N) {
  for (const auto& [j, k] : index_set(N)) {
    if (std::abs(raw.at_or_zero(j, k) - rho_true.at_or_zero(j, k)) > t(j, k)) return false;
  }
  return true;
}

nlohmann::json to_json(const EstimationResult& result, const EstimatorConfig& cfg) {
  nlohmann::json t = nlohmann::json::array();
  for (const auto& [j, k] : index_set(result.N_used)) t.push_back({j, k, result.thresholds(j, k)});
  return {{"config", cfg.to_json()},
          {"N_used", result.N_used},
          {"n_samples", result.n_samples},
          {"out_of_range", result.out_of_range},
          {"thresholds", std::move(t)},
          {"raw", to_json(result.raw)},
          {"thresholded", to_json(result.thresholded)}};
}

}  // namespace qht
