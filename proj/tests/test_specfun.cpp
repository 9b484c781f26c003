#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "sfion/error.hpp"
#include "sfion/specfun.hpp"

using namespace sfion;
using namespace sfion::specfun;

namespace {

// Zeros of P_6 (mpmath, 40 digits).
constexpr double kP6Roots[] = {0.2386191860831969086305, 0.6612093864662645136614,
                               0.9324695142031520278123};

constexpr double kPi = std::numbers::pi;

}  // namespace

TEST(Legendre, LowOrders) {
  EXPECT_EQ(legendre(0, 0.37), 1.0);
  EXPECT_EQ(legendre(1, -0.5), -0.5);
  EXPECT_NEAR(legendre(2, 0.5), -0.125, 1e-16);
  EXPECT_NEAR(legendre(3, 0.5), -0.4375, 1e-16);
}

TEST(Legendre, ZerosOfP6) {
  for (double x : kP6Roots) {
    EXPECT_NEAR(legendre(6, x), 0.0, 1e-15);
    EXPECT_NEAR(legendre(6, -x), 0.0, 1e-15);
  }
}

TEST(Legendre, EndpointsExact) {
  for (int l = 0; l <= 200; ++l) {
    EXPECT_EQ(legendre(l, 1.0), 1.0) << l;
    EXPECT_EQ(legendre(l, -1.0), l % 2 ? -1.0 : 1.0) << l;
  }
}

TEST(Legendre, OutsideDomainThrows) {
  EXPECT_THROW(legendre(3, 1.0000001), Error);
  EXPECT_THROW(legendre(3, -2.0), Error);
  EXPECT_THROW(legendre(-1, 0.5), Error);
  try {
    legendre(2, 1.5);
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::domain);
  }
}

TEST(Legendre, ThreeTermRecurrence) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> p(62);
  for (int trial = 0; trial < 1000; ++trial) {
    const double x = dist(rng);
    legendre_all(61, x, p);
    for (int l = 1; l <= 60; ++l) {
      const double lhs = (l + 1) * p[l + 1];
      const double rhs = (2 * l + 1) * x * p[l] - l * p[l - 1];
      ASSERT_NEAR(lhs, rhs, 1e-13 * (l + 1)) << "l=" << l << " x=" << x;
    }
  }
}

TEST(Legendre, AllMatchesSingle) {
  std::vector<double> p(41);
  legendre_all(40, -0.3, p);
  for (int l = 0; l <= 40; ++l) EXPECT_DOUBLE_EQ(p[l], legendre(l, -0.3));
}

TEST(Legendre, OrthogonalityUnderGaussLegendre) {
  const auto rule = gauss_legendre(80);
  for (int l = 0; l <= 30; l += 3) {
    for (int m = 0; m <= 30; m += 5) {
      double s = 0.0;
      for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        s += rule.weights[i] * legendre(l, rule.nodes[i]) * legendre(m, rule.nodes[i]);
      }
      EXPECT_NEAR(s, l == m ? 2.0 / (2 * l + 1) : 0.0, 1e-13);
    }
  }
}

TEST(Quadrature, GaussLegendreNodesOfOrderSix) {
  const auto rule = gauss_legendre(6);
  ASSERT_EQ(rule.nodes.size(), 6u);
  for (int i = 0; i < 3; ++i) {
    EXPECT_NEAR(rule.nodes[5 - i], kP6Roots[2 - i], 1e-15);
    EXPECT_NEAR(rule.nodes[i], -kP6Roots[2 - i], 1e-15);
  }
}

TEST(Quadrature, GaussLegendreExactDegree) {
  for (int n : {3, 10, 41}) {
    const auto rule = gauss_legendre(n);
    for (int d = 0; d <= 2 * n - 1; ++d) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += rule.weights[i] * std::pow(rule.nodes[i], d);
      EXPECT_NEAR(s, d % 2 ? 0.0 : 2.0 / (d + 1), 1e-13) << "n=" << n << " d=" << d;
    }
  }
}

TEST(Quadrature, GaussLobattoStructure) {
  for (int n : {5, 17, 101}) {
    const auto rule = gauss_lobatto(n);
    ASSERT_EQ(static_cast<int>(rule.nodes.size()), n);
    EXPECT_EQ(rule.nodes.front(), -1.0);
    EXPECT_EQ(rule.nodes.back(), 1.0);
    EXPECT_NEAR(rule.weights.front(), 2.0 / (n * (n - 1.0)), 1e-15);
    double sum = 0.0;
    for (double w : rule.weights) sum += w;
    EXPECT_NEAR(sum, 2.0, 1e-13);
    // exact through degree 2n - 3
    for (int d = 0; d <= 2 * n - 3; d += 2) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += rule.weights[i] * std::pow(rule.nodes[i], d);
      EXPECT_NEAR(s, 2.0 / (d + 1), 1e-12) << "n=" << n << " d=" << d;
    }
    for (int i = 1; i < n; ++i) EXPECT_LT(rule.nodes[i - 1], rule.nodes[i]);
  }
}

TEST(LogGamma, HighPrecisionValues) {
  struct Case {
    std::complex<double> z, expected;
  };
  // mpmath loggamma, 40 digits
  const Case cases[] = {
      {{1.0, -1.0}, {-0.6509231993018563388852, 0.3016403204675331978875}},
      {{3.5, 7.25}, {-4.446824539760631343303, 11.22546923673169201568}},
      {{0.3, -20.0}, {-31.09611695026360461039, -39.60156965128523705108}},
      {{61.0, -100.0}, {125.7958319492367885204, -438.2284388459184096886}},
  };
  for (const auto& c : cases) {
    const auto v = log_gamma(c.z);
    EXPECT_NEAR(v.real(), c.expected.real(), 1e-13 * std::max(1.0, std::abs(c.expected.real())));
    EXPECT_NEAR(v.imag(), c.expected.imag(), 1e-13 * std::max(1.0, std::abs(c.expected.imag())));
  }
}

TEST(LogGamma, RealAxisMatchesStd) {
  for (double x : {0.5, 1.0, 2.5, 7.0, 33.3}) {
    const auto v = log_gamma({x, 0.0});
    EXPECT_NEAR(v.real(), std::lgamma(x), 1e-13 * std::max(1.0, std::abs(std::lgamma(x))));
    EXPECT_EQ(v.imag(), 0.0);
  }
}

TEST(PhaseShift, GroundValueAtUnitMomentum) {
  EXPECT_NEAR(coulomb_phase_shift(0, 1.0), 0.30164032046753319789, 1e-14);
}

TEST(PhaseShift, FirstStepIsMinusQuarterPi) {
  EXPECT_NEAR(coulomb_phase_shift(1, 1.0) - coulomb_phase_shift(0, 1.0), -kPi / 4, 1e-14);
}

TEST(PhaseShift, HighMomentumLimitVanishes) {
  EXPECT_NEAR(coulomb_phase_shift(5, 1e6), 0.0, 1e-5);
}

TEST(PhaseShift, NonPositiveMomentumThrows) {
  EXPECT_THROW(coulomb_phase_shift(0, 0.0), Error);
  EXPECT_THROW(coulomb_phase_shift(2, -0.1), Error);
}

TEST(PhaseShift, TableRecurrenceAndFiniteness) {
  std::vector<double> k;
  for (double v = 0.05; v <= 3.0 + 1e-12; v += 0.01) k.push_back(v);
  const PhaseShiftTable table(k, 60);
  for (std::size_t ik = 0; ik < k.size(); ++ik) {
    const double eta = sommerfeld_eta(k[ik]);
    for (int l = 0; l < 60; ++l) {
      ASSERT_TRUE(std::isfinite(table(l, ik)));
      const double step = std::atan2(eta, l + 1.0);
      ASSERT_NEAR(table(l + 1, ik) - table(l, ik), step, 1e-12) << "l=" << l << " k=" << k[ik];
    }
  }
}

TEST(PhaseShift, TableMatchesDirectEvaluation) {
  const std::vector<double> k = {0.01, 0.19, 0.34, 1.5};
  const PhaseShiftTable table(k, 20);
  for (std::size_t ik = 0; ik < k.size(); ++ik) {
    for (int l = 0; l <= 20; ++l) EXPECT_DOUBLE_EQ(table(l, ik), coulomb_phase_shift(l, k[ik]));
  }
}

TEST(PhaseShift, ContinuousInMomentum) {
  // no 2 pi branch jumps; the slope ~ ln(1/k)/k^2 stays below 250 here
  double prev = coulomb_phase_shift(3, 0.1);
  for (double k = 0.1005; k <= 2.0; k += 0.0005) {
    const double d = coulomb_phase_shift(3, k);
    ASSERT_LT(std::abs(d - prev), 0.5) << k;
    prev = d;
  }
}

TEST(CoulombNormalization, SWaveGamowFactor) {
  for (double k : {0.1, 0.5, 2.0}) {
    const double eta = sommerfeld_eta(k);
    const double c2 = 2 * kPi * eta / std::expm1(2 * kPi * eta);
    EXPECT_NEAR(std::exp(2 * log_coulomb_normalization(0, eta)), c2, 1e-13 * c2);
  }
}

TEST(CoulombWave, HighPrecisionValues) {
  // sqrt(2/(pi k)) F_l(-1/k, k r), mpmath coulombf, 40 digits
  struct Case {
    double k;
    int l;
    double r, u;
  };
  const Case cases[] = {
      {0.5, 0, 100.0, 0.5974584165300895418635},  {0.5, 0, 100.7, 0.2269573919849529875229},
      {0.19, 8, 40.0, 0.03956922077081169759279}, {0.19, 8, 300.0, 1.537647407913069363519},
      {1.2, 20, 150.0, 0.7101292669250016906636}, {0.05, 3, 30.0, 1.078080073500751686832},
      {0.05, 3, 500.0, 0.2504262359421217591610}, {1.0, 60, 200.0, -0.4619536453671993024923},
  };
  for (const auto& c : cases) {
    const double r[] = {c.r};
    const auto w = coulomb_wave_samples(c.k, c.l, r);
    EXPECT_NEAR(w.u[0], c.u, 1e-6 * std::max(std::abs(c.u), 0.1))
        << "k=" << c.k << " l=" << c.l << " r=" << c.r;
  }
}

TEST(CoulombWave, RegularAtOrigin) {
  const double r[] = {0.0, 1e-3, 2e-3};
  const auto w = coulomb_wave_samples(0.7, 2, r);
  EXPECT_EQ(w.u[0], 0.0);
  // u ~ r^{l+1}
  EXPECT_NEAR(w.u[2] / w.u[1], 8.0, 1e-2);
}

TEST(CoulombWave, AsymptoticAmplitudeAndWkbInvariant) {
  for (double k : {0.5, 1.0}) {
    for (int l : {0, 5}) {
      std::vector<double> r;
      const double h = 0.01;
      for (double x = 400.0; x <= 500.0; x += 0.5) {
        for (int j = -2; j <= 2; ++j) r.push_back(x + j * h);
      }
      const auto w = coulomb_radial_wave(k, l, r);
      for (std::size_t i = 0; i < r.size(); i += 5) {
        const double x = r[i + 2];
        const double u = w.u[i + 2];
        const double du = (w.u[i] - 8 * w.u[i + 1] + 8 * w.u[i + 3] - w.u[i + 4]) / (12 * h);
        const double q = std::sqrt(k * k + 2 / x - l * (l + 1) / (x * x));
        // q u^2 + u'^2 / q -> 2 / pi for unit-amplitude energy normalization
        const double invariant = q * u * u + du * du / q;
        ASSERT_NEAR(invariant / (2 / kPi), 1.0, 1e-4) << "k=" << k << " l=" << l << " r=" << x;
      }
    }
  }
}

TEST(CoulombWave, ShortGridIsRejectedWithRequiredRadius) {
  const double r[] = {1.0, 10.0, 20.0};
  try {
    coulomb_radial_wave(0.5, 0, r);
    FAIL() << "expected a precondition error";
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::precondition);
    EXPECT_NE(std::string(e.what()).find("100"), std::string::npos) << e.what();
  }
  EXPECT_NEAR(asymptotic_radius(0.5, 0), 100.0, 1e-12);
}

TEST(CoulombWave, DistinctMomentaAreNearlyOrthogonal) {
  // Smoothly tapered overlaps approximate delta(k - k').
  const double r_max = 600.0;
  std::vector<double> r;
  for (double x = 0.0; x <= r_max; x += 0.01) r.push_back(x);
  const auto a = coulomb_wave_samples(0.5, 2, r);
  const auto b = coulomb_wave_samples(1.0, 2, r);
  double self = 0.0, cross = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double s = std::sin(0.5 * kPi * std::min(1.0, (r_max - r[i]) / 100.0));
    const double taper = s * s;
    self += taper * a.u[i] * a.u[i];
    cross += taper * a.u[i] * b.u[i];
  }
  EXPECT_LT(std::abs(cross), 1e-3 * self);
}

TEST(TurningPoint, PericenterAndRadialEquation) {
  // Classical pericenter with L = 8 at k = 0.19.
  EXPECT_NEAR(turning_point(0.19, 64.0), 22.70, 0.005);
  // The radial equation uses l(l+1) = 72 instead.
  EXPECT_NEAR(turning_point(0.19, 72.0), 24.85, 0.005);
}

TEST(NumerovStep, Limits) {
  EXPECT_DOUBLE_EQ(numerov_step(0.1), 0.05);
  EXPECT_DOUBLE_EQ(numerov_step(10.0), 2 * kPi / 200.0);
}
