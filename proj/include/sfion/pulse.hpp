#pragma once

namespace sfion {

/// Hydrogen ground-state ionization potential (a.u.).
inline constexpr double kIonizationPotential = 0.5;

struct KeldyshParameters {
  double ponderomotive_energy;  // U_p = F0^2 / (4 omega^2)
  double gamma;                 // sqrt(I_p / (2 U_p))
  double quiver_amplitude;      // F0 / omega^2
};

/// Linearly polarized sin^2-envelope pulse along z, in atomic units:
///   F(t) = F0 sin^2(pi t / tau) cos(omega t + phi),  0 <= t <= tau.
struct LaserPulse {
  double F0 = 0.0;
  double omega = 0.05;
  double tau = 1005.0;
  double phi = 0.0;

  double field(double t) const;

  /// A(t) = -int_0^t F(t') dt', closed form; constant for t >= tau.
  double vector_potential(double t) const;

  KeldyshParameters keldysh() const;

  /// Pulse with the time-reversed field F'(t) = F(tau - t).
  LaserPulse reversed() const;

  double cycles() const;
};

inline double field(const LaserPulse& p, double t) { return p.field(t); }
inline double vector_potential(const LaserPulse& p, double t) {
  return p.vector_potential(t);
}
inline KeldyshParameters keldysh_parameters(const LaserPulse& p) {
  return p.keldysh();
}

}  // namespace sfion
