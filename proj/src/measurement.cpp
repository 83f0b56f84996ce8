#include "qht/measurement.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "qht/parallel.hpp"

namespace qht {

namespace {

constexpr int kMaxConsecutiveRejections = 1'000'000;
constexpr int kHermiteNodes = 200;

double standard_normal(StreamRng& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  return dist(rng);
}

double uniform01(StreamRng& rng) {
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  return dist(rng);
}

[[noreturn]] void rejection_overflow(const StateModel& state) {
  throw std::runtime_error("rejection sampler for " + state.name() + " exceeded " +
                           std::to_string(kMaxConsecutiveRejections) +
                           " consecutive rejections; envelope does not dominate the density");
}

double draw_single_photon(const StateModel& state, StreamRng& rng) {
  const double envelope = single_photon_envelope_constant();
  for (int attempt = 0; attempt < kMaxConsecutiveRejections; ++attempt) {
    const double x = standard_normal(rng);
    // p(x) / N(0,1)(x) = 2 sqrt(2) x^2 e^{-x^2/2}
    const double ratio = 2.0 * std::numbers::sqrt2 * x * x * std::exp(-0.5 * x * x);
    if (uniform01(rng) * envelope <= ratio) return x;
  }
  rejection_overflow(state);
}

// Proposal: equal mixture of N(+c, 1/2) and N(-c, 1/2), c = q0 cos(phi).
// Envelope constant 2 / (1 + e^{-q0^2}); the acceptance probability
// simplifies to (1 + cos(2 q0 x sin phi) / cosh(2 x c)) / 2.
double draw_cat(const StateModel& state, double phi, StreamRng& rng) {
  const double q0 = state.q0();
  const double c = q0 * std::cos(phi);
  const double s = std::sin(phi);
  for (int attempt = 0; attempt < kMaxConsecutiveRejections; ++attempt) {
    const double centre = uniform01(rng) < 0.5 ? c : -c;
    const double x = centre + std::numbers::sqrt2 * 0.5 * standard_normal(rng);
    const double accept = 0.5 * (1.0 + std::cos(2.0 * q0 * x * s) / std::cosh(2.0 * x * c));
    if (uniform01(rng) <= accept) return x;
  }
  rejection_overflow(state);
}

struct HermiteRule {
  std::array<double, kHermiteNodes> nodes{};
  std::array<double, kHermiteNodes> weights{};
};

// Golub-Welsch for weight e^{-z^2}.
HermiteRule make_hermite_rule() {
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(kHermiteNodes);
  Eigen::VectorXd sub(kHermiteNodes - 1);
  for (int i = 1; i < kHermiteNodes; ++i) sub(i - 1) = std::sqrt(0.5 * i);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  HermiteRule rule;
  const double mass = std::sqrt(std::numbers::pi);
  for (int i = 0; i < kHermiteNodes; ++i) {
    rule.nodes[i] = solver.eigenvalues()(i);
    const double v0 = solver.eigenvectors()(0, i);
    rule.weights[i] = mass * v0 * v0;
  }
  return rule;
}

const HermiteRule& hermite_rule() {
  static const HermiteRule rule = make_hermite_rule();
  return rule;
}

}  // namespace

NoiseConfig::NoiseConfig(double eta) : eta_(eta) {
  if (!(eta > 0.5 && eta <= 1.0)) {
    throw std::invalid_argument("efficiency eta=" + std::to_string(eta) + " outside (1/2, 1]");
  }
}

double NoiseConfig::noise_sd() const { return std::sqrt(0.5 * (1.0 - eta_)); }

double single_photon_envelope_constant() {
  // sup_x 2 sqrt(2) x^2 e^{-x^2/2}, attained at x^2 = 2
  return 4.0 * std::numbers::sqrt2 / std::numbers::e;
}

double draw_quadrature(const StateModel& state, double phi, StreamRng& rng) {
  switch (state.kind()) {
    case StateKind::Vacuum:
      return std::sqrt(0.5) * standard_normal(rng);
    case StateKind::Coherent:
      return state.q0() * std::cos(phi) + std::sqrt(0.5) * standard_normal(rng);
    case StateKind::Thermal:
      return std::sqrt(0.5 / std::tanh(0.5 * state.beta())) * standard_normal(rng);
    case StateKind::SinglePhoton:
      return draw_single_photon(state, rng);
    case StateKind::SchroedingerCat:
      return draw_cat(state, phi, rng);
  }
  throw std::logic_error("draw_quadrature: unhandled state kind");
}

double add_noise(double x, const NoiseConfig& cfg, StreamRng& rng) {
  const double xi = standard_normal(rng);
  if (cfg.eta() == 1.0) return x;
  return std::sqrt(cfg.eta()) * x + cfg.noise_sd() * xi;
}

namespace {

IdealSample draw_ideal(const StateModel& state, StreamRng& rng) {
  std::uniform_real_distribution<double> phase(0.0, std::numbers::pi);
  const double phi = phase(rng);
  return {draw_quadrature(state, phi, rng), phi};
}

constexpr std::size_t kSampleBlock = 4096;

template <class Fn>
void for_each_block(std::size_t n, int threads, Fn&& fn) {
  const std::size_t blocks = (n + kSampleBlock - 1) / kSampleBlock;
  parallel_for(blocks, threads, [&](std::size_t b) {
    const std::size_t end = std::min(n, (b + 1) * kSampleBlock);
    for (std::size_t i = b * kSampleBlock; i < end; ++i) fn(i);
  });
}

}  // namespace

std::vector<IdealSample> sample_ideal(const StateModel& state, std::size_t n, std::uint64_t seed, int threads) {
  if (n == 0) throw std::invalid_argument("sample_ideal: n must be >= 1");
  std::vector<IdealSample> out(n);
  for_each_block(n, threads, [&](std::size_t i) {
    StreamRng rng(seed, i);
    out[i] = draw_ideal(state, rng);
  });
  return out;
}

std::vector<MeasurementRecord> simulate(const StateModel& state, const NoiseConfig& cfg, std::size_t n,
                                        std::uint64_t seed, int threads) {
  if (n == 0) throw std::invalid_argument("simulate: n must be >= 1");
  std::vector<MeasurementRecord> out(n);
  for_each_block(n, threads, [&](std::size_t i) {
    StreamRng rng(seed, i);
    const IdealSample ideal = draw_ideal(state, rng);
    out[i] = {add_noise(ideal.x, cfg, rng), ideal.phi};
  });
  return out;
}

double noisy_density(const StateModel& state, double y, double phi, const NoiseConfig& cfg) {
  if (cfg.eta() == 1.0) return quadrature_density(state, y, phi);
  const double sqrt_eta = std::sqrt(cfg.eta());
  // u = sqrt(2) sigma z turns the Gaussian kernel into the Hermite weight
  const double scale = std::numbers::sqrt2 * cfg.noise_sd();
  const HermiteRule& rule = hermite_rule();
  double sum = 0.0;
  for (int i = 0; i < kHermiteNodes; ++i) {
    sum += rule.weights[i] * quadrature_density(state, (y - scale * rule.nodes[i]) / sqrt_eta, phi);
  }
  return sum / (std::sqrt(std::numbers::pi) * sqrt_eta);
}

}  // namespace qht
