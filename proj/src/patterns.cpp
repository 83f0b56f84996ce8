#include "qht/patterns.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>

#include <fftw3.h>

#include "qht/parallel.hpp"
#include "qht/special_functions.hpp"

namespace qht {

namespace {

Complex minus_i_power(int d) {
  switch (d % 4) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, -1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, 1.0};
  }
}

Complex pattern_ft_with_gamma(int j, int k, double t, double gamma) {
  if (j < 0 || k < 0) throw std::invalid_argument("pattern_ft: indices must be nonnegative");
  if (j < k) std::swap(j, k);
  if (t == 0.0) return {0.0, 0.0};
  const int d = j - k;
  const double abs_t = std::abs(t);
  const double log_mag = std::log(std::numbers::pi) + log_factorial_ratio(k, j) + (d + 1) * std::log(abs_t) +
                         (gamma - 0.25) * t * t;
  const double mag = std::exp(log_mag);
  if (mag == 0.0) return {0.0, 0.0};
  double value = mag * laguerre(k, d, 0.5 * t * t);
  if (t < 0.0 && d % 2 == 1) value = -value;
  return value * minus_i_power(d);
}

struct FftwPlan {
  fftw_plan plan = nullptr;
  explicit FftwPlan(int n) {
    auto* in = fftw_alloc_complex(n);
    auto* out = fftw_alloc_complex(n);
    plan = fftw_plan_dft_1d(n, in, out, FFTW_BACKWARD, FFTW_ESTIMATE);
    fftw_free(in);
    fftw_free(out);
    if (plan == nullptr) throw std::runtime_error("FFTW plan creation failed");
  }
  FftwPlan(const FftwPlan&) = delete;
  FftwPlan& operator=(const FftwPlan&) = delete;
  ~FftwPlan() { fftw_destroy_plan(plan); }
};

struct FftwBuffer {
  fftw_complex* data;
  explicit FftwBuffer(int n) : data(fftw_alloc_complex(n)) {
    if (data == nullptr) throw std::bad_alloc();
  }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
  ~FftwBuffer() { fftw_free(data); }
};

// Extremum of the cubic spline segment in [0, 1] (fractional coordinate),
// checked at stationary points of the cubic.
double segment_abs_max(double y0, double y1, double m0, double m1, double h2_6) {
  // y(b) = (1-b) y0 + b y1 + ((a^3 - a) m0 + (b^3 - b) m1) h^2/6, a = 1 - b
  // y'(b) = y1 - y0 + h2_6 * (-(3a^2 - 1) m0 + (3b^2 - 1) m1)
  // expand in b: a^2 = 1 - 2b + b^2
  const double c2 = 3.0 * h2_6 * (m1 - m0);
  const double c1 = 6.0 * h2_6 * m0;
  const double c0 = y1 - y0 + h2_6 * (-2.0 * m0 - m1);
  auto value = [&](double b) {
    const double a = 1.0 - b;
    return a * y0 + b * y1 + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h2_6;
  };
  double best = std::max(std::abs(y0), std::abs(y1));
  auto consider = [&](double b) {
    if (b > 0.0 && b < 1.0) best = std::max(best, std::abs(value(b)));
  };
  if (std::abs(c2) < 1e-300) {
    if (c1 != 0.0) consider(-c0 / c1);
  } else {
    const double disc = c1 * c1 - 4.0 * c2 * c0;
    if (disc >= 0.0) {
      const double root = std::sqrt(disc);
      consider((-c1 + root) / (2.0 * c2));
      consider((-c1 - root) / (2.0 * c2));
    }
  }
  return best;
}

}  // namespace

Complex pattern_ft(int j, int k, double t) { return pattern_ft_with_gamma(j, k, t, 0.0); }

Complex adapted_ft(int j, int k, double t, const NoiseConfig& cfg) {
  return pattern_ft_with_gamma(j, k, t, cfg.gamma());
}

namespace {

// The inverse FFT returns the periodization sum_l f(x + l L). Diagonal
// patterns all start as pi |t| at t = 0, i.e. f(x) ~ -1/x^2, and the images of
// that tail shift the grid by about -pi^2 / (3 L^2). This adds back
// sum_{l != 0} (x + l L)^{-2} = (pi/L)^2 / sin^2(pi x / L) - 1/x^2.
double image_tail(double x, double period) {
  const double w = std::numbers::pi / period;
  const double u = w * x;
  if (std::abs(u) < 1e-3) return w * w * (1.0 / 3.0 + u * u / 15.0);
  const double s = std::sin(u);
  return w * w / (s * s) - 1.0 / (x * x);
}

}  // namespace

double tolerance_cutoff(int N, double gamma, double tolerance, double max_cutoff) {
  if (N < 1) throw std::invalid_argument("tolerance_cutoff: N must be >= 1");
  if (!(tolerance > 0.0 && tolerance < 1.0)) throw std::invalid_argument("tolerance_cutoff: tol must lie in (0, 1)");
  const double decay = 0.25 - gamma;
  if (!(decay > 0.0)) throw std::invalid_argument("tolerance_cutoff: gamma must be < 1/4");
  const double target = std::log(1.0 / tolerance);
  auto margin = [&](double T) { return decay * T * T - (N + 2) * std::log(std::max(T, 2.0)) - target; };
  constexpr double step = 1e-2;
  double T = step;
  while (margin(T) < 0.0) {
    T += step;
    if (T > max_cutoff) {
      throw std::runtime_error("frequency cutoff exceeds cap " + std::to_string(max_cutoff) +
                               " (deconvolution too ill-conditioned; eta too close to 1/2 for N=" +
                               std::to_string(N) + ")");
    }
  }
  double lo = T - step;
  double hi = T;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    (margin(mid) >= 0.0 ? hi : lo) = mid;
  }
  return hi;
}

PatternTable PatternTable::build(int N, const NoiseConfig& cfg, const TableOptions& options) {
  if (N < 1) throw std::invalid_argument("build_table: N must be >= 1");
  const int Q = options.grid_size;
  if (Q < 8 || !std::has_single_bit(static_cast<unsigned>(Q))) {
    throw std::invalid_argument("build_table: grid size must be a power of two >= 8");
  }
  if (!(options.half_width > 0.0)) throw std::invalid_argument("build_table: half_width must be > 0");

  PatternTable table;
  table.eta_ = cfg.eta();
  table.N_ = N;
  table.grid_size_ = Q;

  const double t_tol = tolerance_cutoff(N, cfg.gamma(), options.tolerance, options.max_cutoff);
  const double t_res = Q * std::numbers::pi / (2.0 * options.half_width);
  table.cutoff_ = std::max(t_tol, t_res);
  table.spacing_ = std::numbers::pi / table.cutoff_;
  table.x_min_ = -(Q / 2) * table.spacing_;
  const double dt = 2.0 * table.cutoff_ / Q;

  table.slot_.assign(static_cast<std::size_t>(N) * N, -1);
  for (int j = 0; j < N; ++j) {
    for (int k = 0; k <= std::min(j, N - 1 - j); ++k) {
      const int p = static_cast<int>(table.pairs_.size());
      table.pairs_.emplace_back(j, k);
      table.slot_[j * N + k] = p;
      table.slot_[k * N + j] = p;
    }
  }
  const std::size_t P = table.pairs_.size();
  table.values_.assign(P * Q, 0.0);
  table.second_.assign(P * Q, 0.0);
  table.sup_norms_.assign(P, 0.0);
  table.imag_residues_.assign(P, 0.0);

  // Natural-spline forward elimination factors for the uniform grid:
  // m_{i-1} + 4 m_i + m_{i+1} = rhs_i, m_0 = m_{Q-1} = 0.
  std::vector<double> elim(Q, 0.0);
  {
    double diag = 4.0;
    for (int i = 1; i < Q - 1; ++i) {
      elim[i] = diag;
      diag = 4.0 - 1.0 / diag;
    }
  }

  const FftwPlan plan(Q);
  const double period = Q * table.spacing_;
  const double h2 = table.spacing_ * table.spacing_;

  parallel_for(P, options.threads, [&](std::size_t p) {
    const auto [j, k] = table.pairs_[p];
    FftwBuffer in(Q);
    FftwBuffer out(Q);
    // t_n = (n - Q/2) dt, x_m = (m - Q/2) dx, dt dx = 2 pi / Q:
    // f(x_m) = dt/(2 pi) (-1)^m sum_n (-1)^n F(t_n) e^{2 pi i n m / Q}
    for (int n = 0; n < Q; ++n) {
      const Complex v = pattern_ft_with_gamma(j, k, (n - Q / 2) * dt, cfg.gamma());
      const double sign = (n % 2 == 0) ? 1.0 : -1.0;
      in.data[n][0] = sign * v.real();
      in.data[n][1] = sign * v.imag();
    }
    fftw_execute_dft(plan.plan, in.data, out.data);
    const double scale = dt / (2.0 * std::numbers::pi);
    double max_re = 0.0;
    double max_im = 0.0;
    std::vector<double> y(Q);
    for (int m = 0; m < Q; ++m) {
      const double sign = (m % 2 == 0) ? scale : -scale;
      y[m] = sign * out.data[m][0];
      if (j == k) y[m] += image_tail(table.x_at(m), period);
      max_re = std::max(max_re, std::abs(y[m]));
      max_im = std::max(max_im, std::abs(sign * out.data[m][1]));
    }
    table.imag_residues_[p] = max_re > 0.0 ? max_im / max_re : 0.0;

    std::vector<double> rhs(Q, 0.0);
    for (int i = 1; i < Q - 1; ++i) rhs[i] = 6.0 * (y[i + 1] - 2.0 * y[i] + y[i - 1]) / h2;
    for (int i = 2; i < Q - 1; ++i) rhs[i] -= rhs[i - 1] / elim[i - 1];
    std::vector<double> m2(Q, 0.0);
    for (int i = Q - 2; i >= 1; --i) m2[i] = (rhs[i] - (i + 1 < Q - 1 ? m2[i + 1] : 0.0)) / elim[i];

    for (int m = 0; m < Q; ++m) {
      table.values_[table.node_offset(m) + p] = y[m];
      table.second_[table.node_offset(m) + p] = m2[m];
    }
    table.sup_norms_[p] = table.refine_sup(static_cast<int>(p), max_re);
  });

  double worst = 0.0;
  int worst_p = 0;
  for (std::size_t p = 0; p < P; ++p) {
    if (table.imag_residues_[p] > worst) {
      worst = table.imag_residues_[p];
      worst_p = static_cast<int>(p);
    }
  }
  if (worst > options.max_imag_residue) {
    const auto [j, k] = table.pairs_[worst_p];
    throw std::runtime_error("inverse FFT of pattern (" + std::to_string(j) + "," + std::to_string(k) +
                             ") left imaginary residue " + std::to_string(worst) + " of its modulus");
  }
  return table;
}

int PatternTable::pair_index(int j, int k) const {
  if (!covers(j, k)) {
    throw std::out_of_range("pattern index (" + std::to_string(j) + "," + std::to_string(k) +
                            ") outside table with N=" + std::to_string(N_));
  }
  return slot_[static_cast<std::size_t>(j) * N_ + k];
}

std::vector<double> PatternTable::grid_values(int j, int k) const {
  const int p = pair_index(j, k);
  std::vector<double> out(grid_size_);
  for (int m = 0; m < grid_size_; ++m) out[m] = values_[node_offset(m) + p];
  return out;
}

double PatternTable::spline_at(int p, int interval, double frac) const {
  const double a = 1.0 - frac;
  const double b = frac;
  const double h2_6 = spacing_ * spacing_ / 6.0;
  const std::size_t lo = node_offset(interval) + p;
  const std::size_t hi = node_offset(interval + 1) + p;
  // same association as eval_all, so both paths agree bitwise
  return a * values_[lo] + b * values_[hi] + (a * a * a - a) * h2_6 * second_[lo] + (b * b * b - b) * h2_6 * second_[hi];
}

double PatternTable::refine_sup(int p, double grid_max) const {
  // Refine around every node whose modulus is within 10% of the grid maximum.
  const double h2_6 = spacing_ * spacing_ / 6.0;
  double best = grid_max;
  for (int m = 0; m < grid_size_; ++m) {
    if (std::abs(values_[node_offset(m) + p]) < 0.9 * grid_max) continue;
    for (int interval : {m - 1, m}) {
      if (interval < 0 || interval + 1 >= grid_size_) continue;
      const std::size_t lo = node_offset(interval) + p;
      const std::size_t hi = node_offset(interval + 1) + p;
      best = std::max(best, segment_abs_max(values_[lo], values_[hi], second_[lo], second_[hi], h2_6));
    }
  }
  return best;
}

double PatternTable::eval(int j, int k, double x) const {
  const int p = pair_index(j, k);
  const double pos = (x - x_min_) / spacing_;
  if (!(pos >= 0.0 && pos <= grid_size_ - 1)) return 0.0;
  const int interval = std::min(static_cast<int>(pos), grid_size_ - 2);
  return spline_at(p, interval, pos - interval);
}

bool PatternTable::eval_all(double x, std::span<double> out) const {
  const double pos = (x - x_min_) / spacing_;
  if (!(pos >= 0.0 && pos <= grid_size_ - 1)) return false;
  const int interval = std::min(static_cast<int>(pos), grid_size_ - 2);
  const double b = pos - interval;
  const double a = 1.0 - b;
  const double h2_6 = spacing_ * spacing_ / 6.0;
  const double ca = (a * a * a - a) * h2_6;
  const double cb = (b * b * b - b) * h2_6;
  const double* y0 = values_.data() + node_offset(interval);
  const double* y1 = values_.data() + node_offset(interval + 1);
  const double* m0 = second_.data() + node_offset(interval);
  const double* m1 = second_.data() + node_offset(interval + 1);
  const std::size_t P = pairs_.size();
  for (std::size_t p = 0; p < P; ++p) out[p] = a * y0[p] + b * y1[p] + ca * m0[p] + cb * m1[p];
  return true;
}

nlohmann::json PatternTable::metadata() const {
  return {{"N", N_}, {"eta", eta_}, {"Q", grid_size_}, {"T", cutoff_}, {"dx", spacing_}, {"x_min", x_min_},
          {"x_max", x_max()}};
}

PatternTable build_table(int N, const NoiseConfig& cfg, const TableOptions& options) {
  return PatternTable::build(N, cfg, options);
}

double eval_pattern(const PatternTable& table, int j, int k, double x) { return table.eval(j, k, x); }

double sup_norm(const PatternTable& table, int j, int k) { return table.sup_norm(j, k); }

Complex kernel_G(const PatternTable& table, int j, int k, double x, double phi) {
  const double f = table.eval(j, k, x);
  const double angle = -(j - k) * phi;
  return {f * std::cos(angle), f * std::sin(angle)};
}

}  // namespace qht
