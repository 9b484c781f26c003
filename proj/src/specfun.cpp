#include "sfion/specfun.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include "sfion/error.hpp"

namespace sfion::specfun {

namespace {

constexpr double kPi = std::numbers::pi;

// P_n(x) and P_{n-1}(x).
std::pair<double, double> legendre_pair(int n, double x) {
  double p_prev = 1.0;
  double p = x;
  if (n == 0) return {1.0, 0.0};
  for (int j = 1; j < n; ++j) {
    const double next = ((2.0 * j + 1.0) * x * p - j * p_prev) / (j + 1.0);
    p_prev = p;
    p = next;
  }
  return {p, p_prev};
}

}  // namespace

double legendre(int l, double x) {
  if (l < 0) throw domain_error("legendre: negative degree");
  if (!(std::abs(x) <= 1.0)) {
    throw domain_error("legendre: argument outside [-1, 1]");
  }
  return legendre_pair(l, x).first;
}

void legendre_all(int l_max, double x, std::span<double> out) {
  if (l_max < 0 || out.size() < static_cast<std::size_t>(l_max) + 1) {
    throw domain_error("legendre_all: output span too small");
  }
  if (!(std::abs(x) <= 1.0)) {
    throw domain_error("legendre_all: argument outside [-1, 1]");
  }
  out[0] = 1.0;
  if (l_max == 0) return;
  out[1] = x;
  for (int j = 1; j < l_max; ++j) {
    out[j + 1] = ((2.0 * j + 1.0) * x * out[j] - j * out[j - 1]) / (j + 1.0);
  }
}

QuadratureRule gauss_legendre(int n) {
  if (n < 1) throw domain_error("gauss_legendre: n must be positive");
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0;
    for (int it = 0; it < 100; ++it) {
      const auto [p, pm1] = legendre_pair(n, x);
      dp = n * (x * p - pm1) / (x * x - 1.0);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const auto [p, pm1] = legendre_pair(n, x);
    dp = n * (x * p - pm1) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[n - 1 - i] = x;
    rule.nodes[i] = -x;
    rule.weights[i] = rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

QuadratureRule gauss_lobatto(int n_points) {
  if (n_points < 2) throw domain_error("gauss_lobatto: need >= 2 points");
  const int order = n_points - 1;
  QuadratureRule rule;
  rule.nodes.resize(n_points);
  rule.weights.resize(n_points);
  // Newton iteration on (1 - x^2) P'_N from Chebyshev-Gauss-Lobatto guesses.
  for (int j = 0; j < n_points; ++j) {
    double x = -std::cos(kPi * j / order);
    if (j != 0 && j != order) {
      for (int it = 0; it < 200; ++it) {
        const auto [p, pm1] = legendre_pair(order, x);
        const double dx = (x * p - pm1) / (n_points * p);
        x -= dx;
        if (std::abs(dx) < 1e-16) break;
      }
    }
    rule.nodes[j] = x;
  }
  for (int j = 0; j < n_points / 2; ++j) {
    const double x = 0.5 * (rule.nodes[order - j] - rule.nodes[j]);
    rule.nodes[j] = -x;
    rule.nodes[order - j] = x;
  }
  if (n_points % 2 == 1) rule.nodes[order / 2] = 0.0;
  for (int j = 0; j < n_points; ++j) {
    const double p = legendre_pair(order, rule.nodes[j]).first;
    rule.weights[j] = 2.0 / (order * (order + 1.0) * p * p);
  }
  return rule;
}

std::complex<double> log_gamma(std::complex<double> z) {
  if (!(z.real() > 0.0)) {
    throw domain_error("log_gamma: requires Re z > 0");
  }
  // Shift into the Stirling region; each log factor has Re > 0, so the sum
  // stays on the continuous branch.
  std::complex<double> shift = 0.0;
  while (z.real() < 15.0) {
    shift += std::log(z);
    z += 1.0;
  }
  static constexpr std::array<double, 8> bernoulli = {
      1.0 / 6.0,  -1.0 / 30.0,    1.0 / 42.0, -1.0 / 30.0,
      5.0 / 66.0, -691.0 / 2730.0, 7.0 / 6.0, -3617.0 / 510.0};
  const std::complex<double> inv = 1.0 / z;
  const std::complex<double> inv2 = inv * inv;
  std::complex<double> series = 0.0;
  std::complex<double> power = inv;
  for (std::size_t m = 0; m < bernoulli.size(); ++m) {
    const double twok = 2.0 * (m + 1);
    series += bernoulli[m] / (twok * (twok - 1.0)) * power;
    power *= inv2;
  }
  return (z - 0.5) * std::log(z) - z + 0.5 * std::log(2.0 * kPi) + series -
         shift;
}

double coulomb_phase_shift(int l, double k) {
  if (!(k > 0.0)) throw domain_error("coulomb_phase_shift: k must be > 0");
  if (l < 0) throw domain_error("coulomb_phase_shift: negative l");
  return log_gamma({l + 1.0, sommerfeld_eta(k)}).imag();
}

double log_coulomb_normalization(int l, double eta) {
  return l * std::log(2.0) - 0.5 * kPi * eta +
         log_gamma({l + 1.0, eta}).real() - std::lgamma(2.0 * l + 2.0);
}

PhaseShiftTable::PhaseShiftTable(std::vector<double> k_values, int l_max)
    : k_(std::move(k_values)), l_max_(l_max) {
  if (l_max < 0) throw domain_error("PhaseShiftTable: negative l_max");
  delta_.resize(static_cast<std::size_t>(l_max + 1) * k_.size());
  for (int l = 0; l <= l_max; ++l) {
    for (std::size_t ik = 0; ik < k_.size(); ++ik) {
      delta_[static_cast<std::size_t>(l) * k_.size() + ik] =
          coulomb_phase_shift(l, k_[ik]);
    }
  }
}

double turning_point(double k, double l2) {
  // Positive root of k^2 r^2 + 2 r - l2 = 0 in cancellation-free form.
  return l2 / (1.0 + std::sqrt(1.0 + k * k * l2));
}

double asymptotic_radius(double k, int l) {
  return std::max(50.0 / k, 2.0 * turning_point(k, l * (l + 1.0)));
}

double numerov_step(double k) { return std::min(2.0 * kPi / (20.0 * k), 0.05); }

namespace {

// u(r) = r^{l+1} S(r); returns S for the unnormalized solution with S(0) = 1.
double series_factor(double r, double k, int l) {
  double t_prev2 = 0.0;
  double t_prev = 1.0;
  double sum = 1.0;
  for (int m = 1; m < 5000; ++m) {
    const double t = (-2.0 * r * t_prev - k * k * r * r * t_prev2) /
                     (m * (m + 2.0 * l + 1.0));
    sum += t;
    if (m > 2 && std::abs(t) + std::abs(t_prev) <= 1e-18 * std::abs(sum)) {
      break;
    }
    t_prev2 = t_prev;
    t_prev = t;
  }
  return sum;
}

struct NumerovPoint {
  double r;
  double y;
  double log_scale;  // u = y * exp(log_scale), before normalization
};

// Relative tolerance on h^2 |2/r - l(l+1)/r^2| / 12 controlling step size in
// the inner region; the asymptotic step is capped by numerov_step(k).
constexpr double kInnerTolerance = 1e-4;

}  // namespace

CoulombRadialWave coulomb_wave_samples(double k, int l,
                                       std::span<const double> radii) {
  if (!(k > 0.0)) throw domain_error("coulomb wave: k must be > 0");
  if (l < 0) throw domain_error("coulomb wave: negative l");
  if (!std::is_sorted(radii.begin(), radii.end()) ||
      (!radii.empty() && radii.front() < 0.0)) {
    throw domain_error("coulomb wave: radii must be ascending and >= 0");
  }

  CoulombRadialWave wave;
  wave.k = k;
  wave.l = l;
  wave.r.assign(radii.begin(), radii.end());
  wave.u.assign(radii.size(), 0.0);
  if (radii.empty()) return wave;

  const double l2 = l * (l + 1.0);
  const double log_norm = 0.5 * std::log(2.0 / (kPi * k)) +
                          log_coulomb_normalization(l, sommerfeld_eta(k)) +
                          (l + 1.0) * std::log(k);
  auto coupling = [&](double r) { return 2.0 / r - l2 / (r * r); };
  auto q = [&](double r) { return k * k + coupling(r); };

  const double h_target = numerov_step(k);
  const double r_series = 0.25 * (l + 1.0) / std::max(1.0, k);
  const double r_end = radii.back();

  auto series_log_value = [&](double r) -> std::pair<double, double> {
    return {series_factor(r, k, l), (l + 1.0) * std::log(r)};
  };

  std::vector<NumerovPoint> pts;
  if (r_end > r_series) {
    double h = std::min({h_target,
                         std::sqrt(12.0 * kInnerTolerance /
                                   std::abs(coupling(r_series))),
                         r_series / 8.0});
    auto [y0, ls0] = series_log_value(r_series);
    auto [y1, ls1] = series_log_value(r_series + h);
    pts.reserve(static_cast<std::size_t>((r_end - r_series) / h_target) + 4096);
    pts.push_back({r_series, y0, ls0});
    pts.push_back({r_series + h, y1 * std::exp(ls1 - ls0), ls0});
    int steps_at_h = 1;
    const double r_stop = r_end + 4.0 * h_target;
    while (pts.back().r < r_stop) {
      const std::size_t i = pts.size() - 1;
      const double r = pts[i].r;
      if (steps_at_h >= 2 && 2.0 * h <= h_target * (1.0 + 1e-12) &&
          4.0 * h * h * std::abs(coupling(r)) / 12.0 <= kInnerTolerance) {
        h *= 2.0;
        steps_at_h = 1;
      }
      // previous point on the current spacing
      const NumerovPoint& cur = pts[i];
      const NumerovPoint* prev = nullptr;
      for (std::size_t j = i; j-- > 0;) {
        if (std::abs(pts[j].r - (r - h)) <= 1e-9 * h) {
          prev = &pts[j];
          break;
        }
        if (pts[j].r < r - h) break;
      }
      if (prev == nullptr) throw numerical_error("coulomb wave: lost stencil");
      const double y_prev = prev->y * std::exp(prev->log_scale - cur.log_scale);
      const double h12 = h * h / 12.0;
      const double r_next = r + h;
      double y_next = (2.0 * cur.y * (1.0 - 5.0 * h12 * q(r)) -
                       y_prev * (1.0 + h12 * q(r - h))) /
                      (1.0 + h12 * q(r_next));
      double ls = cur.log_scale;
      if (std::abs(y_next) > 1e150) {
        // rescale; earlier points keep their own log scale
        y_next *= 1e-150;
        ls += 150.0 * std::log(10.0);
        pts[i].y *= 1e-150;
        pts[i].log_scale = ls;
      }
      pts.push_back({r_next, y_next, ls});
      ++steps_at_h;
    }
  }

  // Sample: series inside r_series, 6-point Lagrange interpolation outside.
  std::size_t cursor = 0;
  for (std::size_t s = 0; s < radii.size(); ++s) {
    const double r = radii[s];
    if (r <= 0.0) {
      wave.u[s] = 0.0;
      continue;
    }
    if (r <= r_series || pts.size() < 6) {
      auto [y, ls] = series_log_value(r);
      wave.u[s] = y * std::exp(ls + log_norm);
      continue;
    }
    while (cursor + 1 < pts.size() && pts[cursor + 1].r < r) ++cursor;
    std::size_t lo = cursor >= 2 ? cursor - 2 : 0;
    lo = std::min(lo, pts.size() - 6);
    const double ls_ref = pts[lo + 2].log_scale;
    double value = 0.0;
    for (std::size_t a = lo; a < lo + 6; ++a) {
      double basis = 1.0;
      for (std::size_t b = lo; b < lo + 6; ++b) {
        if (b != a) basis *= (r - pts[b].r) / (pts[a].r - pts[b].r);
      }
      value += basis * pts[a].y * std::exp(pts[a].log_scale - ls_ref);
    }
    wave.u[s] = value * std::exp(ls_ref + log_norm);
  }
  return wave;
}

CoulombRadialWave coulomb_radial_wave(double k, int l,
                                      std::span<const double> radii) {
  if (!(k > 0.0)) throw domain_error("coulomb wave: k must be > 0");
  const double needed = asymptotic_radius(k, l);
  if (radii.empty() || radii.back() < needed) {
    std::ostringstream msg;
    msg << "coulomb wave (k=" << k << ", l=" << l
        << "): radial grid must reach r_max >= " << needed;
    throw precondition_error(msg.str());
  }
  return coulomb_wave_samples(k, l, radii);
}

}  // namespace sfion::specfun
