#include "qht/states.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qht {

namespace {

constexpr double kInvSqrtPi = 0.56418958354775628694807945156;  // 1/sqrt(pi)

void check_phase(double phi) {
  if (!(phi >= 0.0 && phi <= std::numbers::pi)) {
    throw std::invalid_argument("phase must lie in [0, pi]");
  }
}

double log_factorial(int n) { return std::lgamma(n + 1.0); }

}  // namespace

StateModel StateModel::vacuum() { return {StateKind::Vacuum, 0.0, 0.0}; }

StateModel StateModel::single_photon() { return {StateKind::SinglePhoton, 0.0, 0.0}; }

StateModel StateModel::coherent(double q0) {
  if (!std::isfinite(q0)) throw std::invalid_argument("coherent state: q0 must be finite");
  return {StateKind::Coherent, q0, 0.0};
}

StateModel StateModel::thermal(double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw std::invalid_argument("thermal state: beta must be > 0");
  return {StateKind::Thermal, 0.0, beta};
}

StateModel StateModel::cat(double q0) {
  if (!(q0 > 0.0) || !std::isfinite(q0)) throw std::invalid_argument("cat state: q0 must be > 0");
  return {StateKind::SchroedingerCat, q0, 0.0};
}

StateModel StateModel::from_name(std::string_view name, double q0, double beta) {
  if (name == "vacuum") return vacuum();
  if (name == "single-photon" || name == "single_photon" || name == "photon") return single_photon();
  if (name == "coherent") return coherent(q0);
  if (name == "thermal") return thermal(beta);
  if (name == "cat" || name == "schroedinger-cat") return cat(q0);
  throw std::invalid_argument("unknown state '" + std::string(name) +
                              "' (expected vacuum, single-photon, coherent, thermal or cat)");
}

std::string StateModel::name() const {
  switch (kind_) {
    case StateKind::Vacuum: return "vacuum";
    case StateKind::SinglePhoton: return "single-photon";
    case StateKind::Coherent: return "coherent";
    case StateKind::Thermal: return "thermal";
    case StateKind::SchroedingerCat: return "cat";
  }
  return "unknown";
}

nlohmann::json StateModel::to_json() const {
  nlohmann::json j{{"kind", name()}};
  if (kind_ == StateKind::Coherent || kind_ == StateKind::SchroedingerCat) j["q0"] = q0_;
  if (kind_ == StateKind::Thermal) j["beta"] = beta_;
  return j;
}

void ClassParams::validate() const {
  if (!(C >= 1.0)) throw std::invalid_argument("class params: C must be >= 1");
  if (!(B > 0.0)) throw std::invalid_argument("class params: B must be > 0");
  if (!(r > 0.0 && r <= 2.0)) throw std::invalid_argument("class params: r must lie in (0, 2]");
}

DensityMatrix density_matrix(const StateModel& state, int dim) {
  if (dim < 1) throw std::invalid_argument("density_matrix: dim must be >= 1");
  DensityMatrix m(dim);
  switch (state.kind()) {
    case StateKind::Vacuum:
      m(0, 0) = 1.0;
      break;
    case StateKind::SinglePhoton:
      if (dim > 1) m(1, 1) = 1.0;
      break;
    case StateKind::Thermal: {
      const double beta = state.beta();
      const double weight = -std::expm1(-beta);
      for (int k = 0; k < dim; ++k) m(k, k) = weight * std::exp(-beta * k);
      break;
    }
    case StateKind::Coherent: {
      // normalization e^{-q0^2/2} makes the trace one
      const double q0 = state.q0();
      if (q0 == 0.0) {
        m(0, 0) = 1.0;
        break;
      }
      const double log_amp = std::log(std::abs(q0) / std::numbers::sqrt2);
      for (int j = 0; j < dim; ++j) {
        for (int k = 0; k < dim; ++k) {
          const double log_mag =
              -0.5 * q0 * q0 + (j + k) * log_amp - 0.5 * (log_factorial(j) + log_factorial(k));
          const double sign = (q0 < 0.0 && (j + k) % 2 == 1) ? -1.0 : 1.0;
          m(j, k) = sign * std::exp(log_mag);
        }
      }
      break;
    }
    case StateKind::SchroedingerCat: {
      const double q0 = state.q0();
      const double a = 0.5 * q0 * q0;
      // ln(e^a + e^{-a})
      const double log_norm = a + std::log1p(std::exp(-2.0 * a));
      for (int j = 0; j < dim; j += 2) {
        for (int k = 0; k < dim; k += 2) {
          const double log_mag = (j + k) * std::log(q0 / std::numbers::sqrt2) -
                                 0.5 * (log_factorial(j) + log_factorial(k));
          m(j, k) = std::exp(std::numbers::ln2 + log_mag - log_norm);
        }
      }
      break;
    }
  }
  return m;
}

double quadrature_density(const StateModel& state, double x, double phi) {
  check_phase(phi);
  switch (state.kind()) {
    case StateKind::Vacuum:
      return kInvSqrtPi * std::exp(-x * x);
    case StateKind::SinglePhoton:
      return 2.0 * kInvSqrtPi * x * x * std::exp(-x * x);
    case StateKind::Coherent: {
      const double d = x - state.q0() * std::cos(phi);
      return kInvSqrtPi * std::exp(-d * d);
    }
    case StateKind::Thermal: {
      const double th = std::tanh(0.5 * state.beta());
      return std::sqrt(th / std::numbers::pi) * std::exp(-x * x * th);
    }
    case StateKind::SchroedingerCat: {
      const double q0 = state.q0();
      const double c = q0 * std::cos(phi);
      const double dm = x - c;
      const double dp = x + c;
      const double interference = 2.0 * std::cos(2.0 * q0 * x * std::sin(phi)) * std::exp(-x * x - c * c);
      const double value = (std::exp(-dm * dm) + std::exp(-dp * dp) + interference) /
                           (2.0 / kInvSqrtPi * (1.0 + std::exp(-q0 * q0)));
      return value > 0.0 ? value : 0.0;
    }
  }
  return 0.0;
}

bool class_envelope_check(const DensityMatrix& m, const ClassParams& p) {
  p.validate();
  for (int j = 0; j < m.dim(); ++j) {
    for (int k = 0; k < m.dim(); ++k) {
      const double bound = p.C * std::exp(-p.B * std::pow(static_cast<double>(j + k), 0.5 * p.r));
      if (std::abs(m(j, k)) > bound * (1.0 + 1e-12)) return false;
    }
  }
  return true;
}

}  // namespace qht
