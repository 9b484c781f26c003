#pragma once

// Analysis of the final wavefunction: projections onto energy-normalized
// Coulomb waves <k,l|psi>, momentum densities, ATI rings and partial-wave
// probabilities, and angular cuts compared with single Legendre polynomials.

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "sfion/specfun.hpp"
#include "sfion/tdse.hpp"

namespace sfion {

/// Uniform momentum grid k_min, k_min + step, ..., <= k_max.
struct MomentumGrid {
  double k_min = 0.01;
  double k_max = 1.5;
  double k_step = 0.005;

  std::vector<double> values() const;
};

/// a_l(k) = <k,l|psi(tau)>, energy-normalized continuum states, so that
/// sum_l int k dk |a_l(k)|^2 is the ionization probability.
class PartialWaveAmplitudes {
 public:
  PartialWaveAmplitudes(std::vector<double> k, Eigen::MatrixXcd amplitudes);

  const std::vector<double>& k() const noexcept { return k_; }
  int l_max() const noexcept { return static_cast<int>(a_.cols()) - 1; }
  /// Rows follow k(), columns l.
  const Eigen::MatrixXcd& amplitudes() const noexcept { return a_; }
  std::complex<double> operator()(std::size_t ik, int l) const { return a_(ik, l); }
  static constexpr const char* normalization() { return "energy"; }

  /// Index of the grid point equal to k (to 1e-9), or a domain error.
  std::size_t index_of(double k) const;

  /// dP/dk = k sum_l |a_l(k)|^2 on the grid.
  std::vector<double> spectrum() const;
  /// Trapezoidal sum_l int k dk |a_l|^2 over the whole grid.
  double total_probability() const;

 private:
  std::vector<double> k_;
  Eigen::MatrixXcd a_;
};

/// Projects psi onto Coulomb waves for l = 0..l_max after removing every
/// bound (negative-energy) eigenvector of H_l. Throws a precondition error if
/// some k exceeds the grid resolution (k * max node spacing > pi).
PartialWaveAmplitudes project(const Propagator& propagator,
                              const WaveFunction& psi,
                              std::span<const double> k, int l_max);

/// dP/dk-vector = (1/(4 pi k)) |sum_l e^{i delta_l} sqrt(2l+1) P_l(cos) a_l|^2.
class MomentumDensity {
 public:
  explicit MomentumDensity(const PartialWaveAmplitudes& amps);

  const PartialWaveAmplitudes& amplitudes() const noexcept { return *amps_; }

  /// Density at grid momentum k()[ik] and angle cos(theta_k).
  double at(std::size_t ik, double cos_theta) const;
  /// Density at arbitrary k inside the grid (linear in k between grid
  /// points); zero outside the grid.
  double operator()(double k, double cos_theta) const;

 private:
  const PartialWaveAmplitudes* amps_;
  specfun::PhaseShiftTable delta_;
};

inline double momentum_density(const MomentumDensity& density, double k,
                               double cos_theta) {
  return density(k, cos_theta);
}

/// d^2P/(dk_rho dk_z) = 2 pi k_rho dP/dk-vector on a (k_z, k_rho) mesh.
struct MomentumMap {
  std::vector<double> k_z;    // signed, ascending
  std::vector<double> k_rho;  // non-negative, ascending
  Eigen::MatrixXd density;    // rows k_rho, columns k_z

  /// Midpoint-rule integral over the mesh.
  double integral() const;
};

struct MapMesh {
  double k_extent = 1.5;  // |k_z| <= extent, 0 <= k_rho <= extent
  int n_z = 301;
  int n_rho = 151;
};

MomentumMap momentum_map(const MomentumDensity& density, const MapMesh& mesh = {});

/// i-th ATI ring between adjacent spectral minima.
struct RingSpec {
  int index = 0;       // 1-based, counted from threshold
  double k_lo = 0.0;   // k_i - Delta_i
  double k_hi = 0.0;   // k_i + Delta_i
  double k_peak = 0.0; // k_i
  double energy() const { return 0.5 * k_peak * k_peak; }
};

struct RingOptions {
  int smoothing = 5;       // moving-average window (odd)
  double k_floor = 0.05;   // rings peaking below this are not reported
};

/// Peaks of the smoothed spectrum dP/dk bounded by the minima on either
/// side; bounds refined to the unsmoothed minimum within the window.
std::vector<RingSpec> detect_rings(const PartialWaveAmplitudes& amps,
                                   const RingOptions& options = {});

/// p_l = int_{k_lo}^{k_hi} k dk |a_l(k)|^2 by the trapezoidal rule.
std::vector<double> ring_partial_probability(const PartialWaveAmplitudes& amps,
                                             const RingSpec& ring);

/// d^2P/(dk dcos) = 2 pi k^2 dP/dk-vector at one grid momentum, with the
/// single-Legendre fit s [P_l0(cos)]^2.
struct AngularCut {
  double k = 0.0;
  std::vector<double> cos_theta;  // uniform on [-1, 1]
  std::vector<double> density;
  int best_l0 = 0;
  double scale = 0.0;
  double relative_residual = 0.0;  // ||f - s P^2|| / ||f||
  std::vector<double> fit;
  std::vector<double> minima;      // interior local minima of density
};

AngularCut angular_cut(const MomentumDensity& density, double k,
                       int n_cos = 2001);

/// Least-squares single-Legendre fit of samples f(cos) on a uniform grid:
/// returns (l0, scale, relative residual).
struct LegendreFit {
  int l0;
  double scale;
  double relative_residual;
};
LegendreFit fit_single_legendre(std::span<const double> cos_theta,
                                std::span<const double> values, int l_max);

}  // namespace sfion
