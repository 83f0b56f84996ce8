#pragma once

#include <string>
#include <string_view>

#include "qht/density_matrix.hpp"

namespace qht {

enum class StateKind { Vacuum, SinglePhoton, Coherent, Thermal, SchroedingerCat };

/// One of the catalog states with closed-form Fock coefficients and
/// quadrature densities. Construct through the named factories, which
/// enforce the parameter constraints.
class StateModel {
 public:
  static StateModel vacuum();
  static StateModel single_photon();
  static StateModel coherent(double q0);
  static StateModel thermal(double beta);
  static StateModel cat(double q0);

  /// Parses "vacuum", "single-photon", "coherent", "thermal" or "cat".
  /// q0 / beta are only read for the kinds that use them.
  static StateModel from_name(std::string_view name, double q0, double beta);

  StateKind kind() const { return kind_; }
  double q0() const { return q0_; }
  double beta() const { return beta_; }

  std::string name() const;
  nlohmann::json to_json() const;

 private:
  StateModel(StateKind kind, double q0, double beta) : kind_(kind), q0_(q0), beta_(beta) {}

  StateKind kind_;
  double q0_ = 0.0;
  double beta_ = 0.0;
};

/// Envelope |rho(m,n)| <= C exp(-B (m+n)^{r/2}) of the decaying state class.
struct ClassParams {
  double C = 1.0;
  double B = 1.0;
  double r = 2.0;

  void validate() const;
};

/// Truncation of the exact infinite matrix to dim x dim.
DensityMatrix density_matrix(const StateModel& state, int dim);

/// p_rho(x | phi), phi in [0, pi].
double quadrature_density(const StateModel& state, double x, double phi);

/// true iff every stored entry respects the class envelope.
bool class_envelope_check(const DensityMatrix& m, const ClassParams& p);

}  // namespace qht
