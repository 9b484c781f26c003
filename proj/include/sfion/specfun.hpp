#pragma once

// Special functions for hydrogenic continuum states (nuclear charge Z = 1).

#include <complex>
#include <span>
#include <vector>

namespace sfion::specfun {

/// Legendre polynomial P_l(x) by upward recurrence. Throws a domain error
/// for |x| > 1 or l < 0.
double legendre(int l, double x);

/// Fills out[0..l_max] with P_0(x)..P_lmax(x).
void legendre_all(int l_max, double x, std::span<double> out);

struct QuadratureRule {
  std::vector<double> nodes;    // ascending in [-1, 1]
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [-1, 1].
QuadratureRule gauss_legendre(int n);

/// Gauss-Lobatto rule with n_points nodes including both endpoints,
/// i.e. the zeros of (1 - x^2) P'_{n_points-1}(x).
QuadratureRule gauss_lobatto(int n_points);

/// Principal branch of ln Gamma(z) for Re z > 0, continuous in z.
std::complex<double> log_gamma(std::complex<double> z);

/// Sommerfeld parameter of an attractive unit charge.
inline double sommerfeld_eta(double k) { return -1.0 / k; }

/// Coulomb phase shift arg Gamma(l + 1 + i eta), eta = -1/k. The value is
/// the imaginary part of the continuous log-Gamma branch, so it is already
/// unwrapped along k (no reduction to (-pi, pi]).
double coulomb_phase_shift(int l, double k);

/// log of the Coulomb normalization constant
/// C_l(eta) = 2^l e^{-pi eta / 2} |Gamma(l + 1 + i eta)| / (2l + 1)!.
double log_coulomb_normalization(int l, double eta);

/// delta_l(k) tabulated on a momentum grid, rows l = 0..l_max.
class PhaseShiftTable {
 public:
  PhaseShiftTable(std::vector<double> k_values, int l_max);

  const std::vector<double>& k_values() const noexcept { return k_; }
  int l_max() const noexcept { return l_max_; }
  double operator()(int l, std::size_t ik) const {
    return delta_[static_cast<std::size_t>(l) * k_.size() + ik];
  }

 private:
  std::vector<double> k_;
  int l_max_;
  std::vector<double> delta_;
};

/// Regular energy-normalized Coulomb wave u_{k,l}, sampled at given radii.
///
/// u'' + (k^2 + 2/r - l(l+1)/r^2) u = 0 with
///   u ~ sqrt(2/(pi k)) sin(k r + ln(2 k r)/k - l pi/2 + delta_l),  r -> inf.
struct CoulombRadialWave {
  double k = 0;
  int l = 0;
  std::vector<double> r;
  std::vector<double> u;
};

/// Outer classical turning point of a Kepler orbit with energy k^2/2 and
/// squared angular momentum l2 (pass l(l+1) for the radial equation, L^2
/// for the classical pericenter).
double turning_point(double k, double l2);

/// Radius beyond which the asymptotic form applies to the stated tolerance:
/// max(50/k, 2 * turning point).
double asymptotic_radius(double k, int l);

/// Integrates outward by step-doubling Numerov from a power-series start
/// near the origin. Normalization is fixed analytically from the r^{l+1}
/// behaviour, so `radii` may end anywhere. Radii must be ascending and >= 0.
CoulombRadialWave coulomb_wave_samples(double k, int l,
                                       std::span<const double> radii);

/// Same as coulomb_wave_samples, but requires the radii to reach the
/// asymptotic region; throws a precondition error naming the required r_max.
CoulombRadialWave coulomb_radial_wave(double k, int l,
                                      std::span<const double> radii);

/// Numerov step used in the asymptotic region: min(2 pi / (20 k), 0.05).
double numerov_step(double k);

}  // namespace sfion::specfun
