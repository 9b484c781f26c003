#include "sfion/pulse.hpp"

#include <cmath>
#include <numbers>

namespace sfion {

namespace {

// int_0^t cos(a s + phi) ds
double cos_integral(double a, double t, double phi) {
  if (std::abs(a) * std::max(1.0, std::abs(t)) < 1e-13) {
    return t * std::cos(phi);
  }
  return (std::sin(a * t + phi) - std::sin(phi)) / a;
}

}  // namespace

double LaserPulse::field(double t) const {
  if (t <= 0.0 || t >= tau) return 0.0;
  const double s = std::sin(std::numbers::pi * t / tau);
  return F0 * s * s * std::cos(omega * t + phi);
}

double LaserPulse::vector_potential(double t) const {
  if (t <= 0.0) return 0.0;
  const double te = std::min(t, tau);
  const double env = 2.0 * std::numbers::pi / tau;
  // sin^2(x) = (1 - cos 2x) / 2, then product-to-sum.
  const double integral = 0.5 * cos_integral(omega, te, phi) -
                          0.25 * cos_integral(omega + env, te, phi) -
                          0.25 * cos_integral(omega - env, te, phi);
  return -F0 * integral;
}

KeldyshParameters LaserPulse::keldysh() const {
  const double up = F0 * F0 / (4.0 * omega * omega);
  return {up, std::sqrt(kIonizationPotential / (2.0 * up)),
          F0 / (omega * omega)};
}

LaserPulse LaserPulse::reversed() const {
  // cos(omega (tau - t) + phi) = cos(omega t - omega tau - phi)
  return {F0, omega, tau, -omega * tau - phi};
}

double LaserPulse::cycles() const {
  return omega * tau / (2.0 * std::numbers::pi);
}

}  // namespace sfion
