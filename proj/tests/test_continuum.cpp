#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "sfion/continuum.hpp"
#include "sfion/error.hpp"

using namespace sfion;

namespace {

constexpr double kPi = std::numbers::pi;

PartialWaveAmplitudes single_channel(int l0, int l_max, std::vector<double> k,
                                     std::complex<double> value = {1.0, 0.5}) {
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(k.size()), l_max + 1);
  a.col(l0).setConstant(value);
  return PartialWaveAmplitudes(std::move(k), std::move(a));
}

// One-photon ionization by a short strong pulse on a small grid.
struct Ionized {
  RadialGrid grid = build_grid(300, 150.0, 0.4);
  Propagator prop{grid, build_hamiltonians(grid, 8)};
  WaveFunction psi;
  Ionized() {
    const double omega = 0.8;
    const LaserPulse pulse{0.05, omega, 4 * 2 * kPi / omega, 0.0};
    psi = prop.propagate(prop.ground_state(), pulse, {});
  }
};

const Ionized& ionized() {
  static const Ionized s;
  return s;
}

}  // namespace

TEST(MomentumGrid, DefaultValues) {
  const auto k = MomentumGrid{}.values();
  ASSERT_EQ(k.size(), 299u);
  EXPECT_DOUBLE_EQ(k.front(), 0.01);
  EXPECT_NEAR(k.back(), 1.5, 1e-12);
  EXPECT_THROW((MomentumGrid{0.0, 1.0, 0.1}.values()), Error);
  EXPECT_THROW((MomentumGrid{0.1, 1.0, 0.0}.values()), Error);
}

TEST(Amplitudes, IndexLookup) {
  const auto amps = single_channel(0, 2, {0.1, 0.2, 0.3});
  EXPECT_EQ(amps.index_of(0.2), 1u);
  EXPECT_EQ(amps.index_of(0.2 + 1e-12), 1u);
  EXPECT_THROW(amps.index_of(0.25), Error);
  EXPECT_STREQ(PartialWaveAmplitudes::normalization(), "energy");
}

TEST(Amplitudes, ProbabilityMatchesIonization) {
  const auto& s = ionized();
  const double bound = s.prop.bound_population(s.psi);
  const auto k = MomentumGrid{0.005, 2.0, 0.005}.values();
  const auto amps = project(s.prop, s.psi, k, 8);
  const double ionization = 1.0 - bound;
  EXPECT_GT(ionization, 1e-3);
  EXPECT_NEAR(amps.total_probability(), ionization, 1e-3 * std::max(1.0, ionization));
  EXPECT_NEAR(amps.total_probability() / ionization, 1.0, 0.01);
  // Maximum of dP/dk from first-order theory (bound-free dipole times pulse
  // spectrum) lies at E = 0.2528, below omega - 1/2 for this broadband pulse.
  const auto spectrum = amps.spectrum();
  const auto peak = std::max_element(spectrum.begin(), spectrum.end()) - spectrum.begin();
  EXPECT_NEAR(0.5 * k[peak] * k[peak], 0.2528, 0.005);
  // dipole selection: p wave dominates
  double p0 = 0, p1 = 0;
  for (std::size_t i = 0; i < k.size(); ++i) {
    p0 += std::norm(amps(i, 0));
    p1 += std::norm(amps(i, 1));
  }
  EXPECT_GT(p1, 10 * p0);
}

TEST(Amplitudes, MapIntegralMatchesIonization) {
  const auto& s = ionized();
  const auto k = MomentumGrid{0.005, 2.0, 0.005}.values();
  const auto amps = project(s.prop, s.psi, k, 8);
  const MomentumDensity density(amps);
  const auto map = momentum_map(density, {2.0, 401, 201});
  EXPECT_GE(map.density.minCoeff(), 0.0);
  EXPECT_NEAR(map.integral(), amps.total_probability(), 1e-3);
  EXPECT_NEAR(map.integral() / amps.total_probability(), 1.0, 0.02);
}

TEST(Amplitudes, ProjectionBeyondResolutionRejected) {
  const auto& s = ionized();
  const double too_high[] = {0.5, 1.1 * s.grid.max_resolvable_k()};
  try {
    project(s.prop, s.psi, too_high, 4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::precondition);
  }
}

TEST(Density, PolarValuesMatchPartialWaveSum) {
  std::vector<double> k = {0.2, 0.4};
  Eigen::MatrixXcd a(2, 4);
  using C = std::complex<double>;
  a << C(0.3, 0.1), C(0.2, -0.4), C(0.05, 0.0), C(-0.1, 0.2),
      C(0.1, 0.1), C(0.0, 0.3), C(0.2, 0.2), C(0.01, -0.02);
  const PartialWaveAmplitudes amps(k, a);
  const MomentumDensity density(amps);
  for (std::size_t ik = 0; ik < k.size(); ++ik) {
    for (double sign : {1.0, -1.0}) {
      std::complex<double> sum = 0.0;
      for (int l = 0; l <= 3; ++l) {
        sum += std::pow(sign, l) * std::sqrt(2.0 * l + 1) *
               std::polar(1.0, specfun::coulomb_phase_shift(l, k[ik])) * a(ik, l);
      }
      EXPECT_NEAR(density.at(ik, sign), std::norm(sum) / (4 * kPi * k[ik]), 1e-14);
    }
  }
  EXPECT_EQ(density(0.1, 0.3), 0.0);
  EXPECT_EQ(density(0.5, 0.3), 0.0);
  EXPECT_NEAR(density(0.3, 0.2), 0.5 * (density.at(0, 0.2) + density.at(1, 0.2)), 1e-15);
}

TEST(Density, AngularIntegralIsSpectrum) {
  // int d(cos) 2 pi k^2 density = k sum_l |a_l|^2
  std::vector<double> k = {0.3};
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Random(1, 11);
  const PartialWaveAmplitudes amps(k, a);
  const auto cut = angular_cut(MomentumDensity(amps), 0.3, 4001);
  double integral = 0.0;
  for (std::size_t i = 1; i < cut.cos_theta.size(); ++i) {
    integral += 0.5 * (cut.density[i] + cut.density[i - 1]) * (cut.cos_theta[i] - cut.cos_theta[i - 1]);
  }
  EXPECT_NEAR(integral / amps.spectrum()[0], 1.0, 1e-5);
}

TEST(AngularCut, SingleChannelGivesLegendreSquared) {
  const auto amps = single_channel(6, 20, {0.30, 0.34, 0.38});
  const auto cut = angular_cut(MomentumDensity(amps), 0.34);
  EXPECT_EQ(cut.best_l0, 6);
  EXPECT_LT(cut.relative_residual, 1e-10);
  const double roots[] = {-0.9324695142031520, -0.6612093864662645, -0.2386191860831969,
                          0.2386191860831969,  0.6612093864662645,  0.9324695142031520};
  ASSERT_EQ(cut.minima.size(), 6u);
  for (int i = 0; i < 6; ++i) EXPECT_NEAR(cut.minima[i], roots[i], 1e-4);
  EXPECT_THROW(angular_cut(MomentumDensity(amps), 0.35), Error);
}

TEST(LegendreFit, RecoversScaleAndOrder) {
  std::vector<double> c, f;
  for (int i = 0; i <= 1000; ++i) {
    const double x = -1 + 2e-3 * i;
    c.push_back(x);
    f.push_back(2.5 * std::pow(specfun::legendre(8, x), 2));
  }
  const auto fit = fit_single_legendre(c, f, 20);
  EXPECT_EQ(fit.l0, 8);
  EXPECT_NEAR(fit.scale, 2.5, 1e-12);
  EXPECT_LT(fit.relative_residual, 1e-7);
}

TEST(Rings, SyntheticAtiComb) {
  // Peaks at E_i = 0.02 + 0.05 i on a smooth background.
  const auto k = MomentumGrid{0.01, 1.2, 0.005}.values();
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(k.size()), 3);
  for (std::size_t i = 0; i < k.size(); ++i) {
    const double e = 0.5 * k[i] * k[i];
    double s = 0.01;
    for (int n = 0; n < 14; ++n) s += std::exp(-std::pow(e - 0.02 - 0.05 * n, 2) / (2 * 0.008 * 0.008));
    a(static_cast<Eigen::Index>(i), 1) = std::sqrt(s / k[i]);
  }
  const PartialWaveAmplitudes amps(k, a);
  const auto rings = detect_rings(amps);
  ASSERT_GE(rings.size(), 10u);
  for (std::size_t i = 0; i < rings.size(); ++i) {
    EXPECT_EQ(rings[i].index, static_cast<int>(i) + 1);
    EXPECT_LT(rings[i].k_lo, rings[i].k_peak);
    EXPECT_LT(rings[i].k_peak, rings[i].k_hi);
    if (i > 0) {
      EXPECT_NEAR(rings[i].energy() - rings[i - 1].energy(), 0.05, 0.005);
      EXPECT_NEAR(rings[i].k_lo, rings[i - 1].k_hi, 1e-12);
    }
  }
  // the grid start bounds the first ring
  EXPECT_NEAR(rings[0].energy(), 0.02, 0.005);
  EXPECT_DOUBLE_EQ(rings[0].k_lo, 0.01);
}

TEST(Rings, PartialProbabilityOfConstantChannel) {
  const auto amps = single_channel(2, 4, MomentumGrid{0.1, 0.5, 0.01}.values(), {0.6, 0.8});
  const RingSpec ring{1, 0.2, 0.4, 0.3};
  const auto p = ring_partial_probability(amps, ring);
  ASSERT_EQ(p.size(), 5u);
  EXPECT_NEAR(p[2], 0.5 * (0.4 * 0.4 - 0.2 * 0.2), 1e-12);
  EXPECT_EQ(p[0], 0.0);
  EXPECT_THROW(ring_partial_probability(amps, RingSpec{1, 0.05, 0.4, 0.3}), Error);
}
