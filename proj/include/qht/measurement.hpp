#pragma once

#include <cstdint>
#include <vector>

#include "qht/rng.hpp"
#include "qht/states.hpp"

namespace qht {

/// One noisy homodyne observation.
struct MeasurementRecord {
  double y = 0.0;
  double phi = 0.0;
};

/// Ideal (noise-free) quadrature draw.
struct IdealSample {
  double x = 0.0;
  double phi = 0.0;
};

/// Detection efficiency eta in (1/2, 1].
class NoiseConfig {
 public:
  explicit NoiseConfig(double eta);

  double eta() const { return eta_; }
  /// (1 - eta) / (4 eta)
  double gamma() const { return (1.0 - eta_) / (4.0 * eta_); }
  /// standard deviation of the additive Gaussian term, sqrt((1 - eta)/2)
  double noise_sd() const;

 private:
  double eta_;
};

/// Draws X ~ p_rho(.|phi). Vacuum, coherent and thermal are exact Gaussian
/// draws; single-photon and cat use rejection sampling.
double draw_quadrature(const StateModel& state, double phi, StreamRng& rng);

/// sqrt(eta) x + sqrt((1-eta)/2) xi with xi standard normal.
double add_noise(double x, const NoiseConfig& cfg, StreamRng& rng);

/// n ideal samples, Phi uniform on [0, pi]. Record l uses the stream
/// (seed, l), so output is independent of the thread count.
std::vector<IdealSample> sample_ideal(const StateModel& state, std::size_t n, std::uint64_t seed,
                                      int threads = 1);

/// n noisy records. Record l consumes the same stream as sample_ideal(l)
/// followed by one normal draw for the detection noise.
std::vector<MeasurementRecord> simulate(const StateModel& state, const NoiseConfig& cfg, std::size_t n,
                                        std::uint64_t seed, int threads = 1);

/// p^eta_rho(y | phi): the scaled quadrature density convolved with the
/// centered Gaussian of variance (1-eta)/2, by 200-node Gauss-Hermite quadrature.
double noisy_density(const StateModel& state, double y, double phi, const NoiseConfig& cfg);

/// Rejection constant used for the single-photon envelope against N(0, 1).
double single_photon_envelope_constant();

}  // namespace qht
