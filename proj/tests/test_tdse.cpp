#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

#include "sfion/error.hpp"
#include "sfion/tdse.hpp"

using namespace sfion;

namespace {

struct Small {
  RadialGrid grid = build_grid(200, 100.0, 0.4);
  Propagator prop{grid, build_hamiltonians(grid, 6)};
};

const Small& small() {
  static const Small s;
  return s;
}

double fidelity(const WaveFunction& a, const WaveFunction& b) {
  const std::complex<double> o =
      (a.coefficients().adjoint() * b.coefficients()).trace();
  return std::norm(o);
}

// First-order photoionization probability of H(1s) for F0 = 0.001, omega = 0.8,
// four-cycle sin^2 pulse: closed-form bound-free dipole times |F~(E + 1/2)|^2,
// integrated over E (scipy quad; cross-checked against mpmath Coulomb-wave
// quadrature of the dipole matrix element).
constexpr double kWeakFieldIonization = 6.0467501087e-06;

}  // namespace

TEST(Dipole, CouplingCoefficients) {
  for (int l = 0; l < 200; ++l) {
    const double c = dipole_coefficient(l);
    EXPECT_GT(c, 0.0);
    EXPECT_LT(c, 1.0);
  }
  EXPECT_NEAR(dipole_coefficient(0), 1.0 / std::sqrt(3.0), 1e-16);
  EXPECT_NEAR(dipole_coefficient(100000), 0.5, 1e-5);
}

TEST(Dipole, DecompositionReconstructsTridiagonal) {
  const DipoleCoupling d(12);
  const Eigen::MatrixXd m = d.eigenvectors * d.eigenvalues.asDiagonal() * d.eigenvectors.transpose();
  for (int i = 0; i <= 12; ++i) {
    for (int j = 0; j <= 12; ++j) {
      const double expected = std::abs(i - j) == 1 ? dipole_coefficient(std::min(i, j)) : 0.0;
      EXPECT_NEAR(m(i, j), expected, 1e-14);
    }
  }
}

TEST(GroundState, HydrogenExpectations) {
  const auto& s = small();
  const auto psi = s.prop.ground_state();
  EXPECT_NEAR(psi.norm(), 1.0, 1e-14);
  EXPECT_NEAR(s.prop.energy(psi), -0.5, 1e-8);
  EXPECT_NEAR(s.prop.mean_radius(psi), 1.5, 1e-6);
  EXPECT_GT(psi.coefficients()(0, 0).real(), 0.0);
  std::complex<double> overlap = 0.0;
  for (int j = 0; j < s.grid.size(); ++j) {
    const double r = s.grid.nodes()[j];
    overlap += s.grid.sqrt_weights()[j] * 2 * r * std::exp(-r) * psi.coefficients()(j, 0);
  }
  EXPECT_GE(std::norm(overlap), 0.9999999);
}

TEST(Propagation, StationaryWithoutField) {
  const auto& s = small();
  const auto psi0 = s.prop.ground_state();
  auto psi = psi0;
  s.prop.evolve_free(psi, 250.0);
  EXPECT_GE(fidelity(psi0, psi), 1.0 - 1e-10);
  const std::complex<double> phase = psi.coefficients()(5, 0) / psi0.coefficients()(5, 0);
  EXPECT_NEAR(std::arg(phase * std::exp(std::complex<double>(0, -0.5 * 250.0))), 0.0, 1e-7);
}

TEST(Propagation, ZeroAmplitudePulseIsPhaseRotation) {
  const auto& s = small();
  const auto psi0 = s.prop.ground_state();
  const LaserPulse pulse{0.0, 0.05, 100.0, 0.0};
  const auto psi = s.prop.propagate(psi0, pulse, {});
  const double e0 = s.prop.hamiltonian(0).eigenvalues()[0];
  const Eigen::MatrixXcd expected = psi0.coefficients() * std::exp(std::complex<double>(0, -e0 * 100.0));
  EXPECT_LE((psi.coefficients() - expected).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_EQ(psi.time, 100.0);
}

TEST(Propagation, SingleStepIsUnitary) {
  const auto& s = small();
  auto psi = s.prop.ground_state();
  const LaserPulse pulse{0.1, 0.05, 200.0, 0.0};
  psi.time = 100.0;
  for (int i = 0; i < 5; ++i) {
    const double before = psi.norm();
    s.prop.step(psi, pulse, 0.05);
    EXPECT_LE(std::abs(psi.norm() - before), 1e-13);
  }
  EXPECT_NEAR(psi.time, 100.25, 1e-12);
  EXPECT_THROW(s.prop.step(psi, pulse, 0.0), Error);
  for (int i = 0; i < 5; ++i) {
    const double before = psi.norm();
    s.prop.step(psi, pulse, 0.05, Gauge::length);
    EXPECT_LE(std::abs(psi.norm() - before), 1e-13);
  }
}

TEST(Propagation, VelocityStepMatchesLengthStep) {
  const auto& s = small();
  const LaserPulse pulse{0.02, 0.3, 4 * 2 * std::numbers::pi / 0.3, 0.0};
  auto a = s.prop.ground_state();
  auto b = a;
  for (int i = 0; i < 40; ++i) {
    s.prop.step(a, pulse, 0.05, Gauge::length);
    s.prop.step(b, pulse, 0.05, Gauge::velocity);
  }
  EXPECT_NEAR(b.norm(), 1.0, 1e-12);
  EXPECT_GE(fidelity(a, b), 1.0 - 1e-6);
}

TEST(Propagation, GaugesAgreeOnObservables) {
  // A weak short pulse converges quickly in l for both gauges.
  const auto g = build_grid(250, 120.0, 0.4);
  const Propagator prop(g, build_hamiltonians(g, 10));
  const double omega = 0.5;
  const LaserPulse pulse{0.03, omega, 3 * 2 * std::numbers::pi / omega, 0.7};
  PropagationOptions o;
  PropagationDiagnostics dv, dl;
  const auto v = prop.propagate(prop.ground_state(), pulse, o, &dv);
  o.gauge = Gauge::length;
  const auto l = prop.propagate(prop.ground_state(), pulse, o, &dl);
  const double iv = 1.0 - prop.bound_population(v);
  const double il = 1.0 - prop.bound_population(l);
  EXPECT_GT(il, 1e-4);
  EXPECT_NEAR(iv / il, 1.0, 1e-3);
  EXPECT_GE(fidelity(v, l), 1.0 - 1e-5);
  ASSERT_EQ(dv.dipole_z.size(), dl.dipole_z.size());
  for (std::size_t i = 0; i < dv.dipole_z.size(); ++i) {
    EXPECT_NEAR(dv.dipole_z[i], dl.dipole_z[i], 1e-4);
  }
}

TEST(Propagation, VelocityGaugeKeepsHighChannelsEmpty) {
  // Length-gauge partial waves must carry l ~ r A(t) for the quiver motion;
  // in velocity gauge the canonical momentum is the drift momentum.
  const auto g = build_grid(200, 120.0, 0.4);
  const Propagator prop(g, build_hamiltonians(g, 20), 25.0);
  const double omega = 0.1;
  const LaserPulse pulse{0.05, omega, 3 * 2 * std::numbers::pi / omega, 0.0};
  PropagationOptions o;
  o.top_channel_tolerance = 1.0;
  PropagationDiagnostics dv, dl;
  prop.propagate(prop.ground_state(), pulse, o, &dv);
  o.gauge = Gauge::length;
  prop.propagate(prop.ground_state(), pulse, o, &dl);
  EXPECT_GT(dl.max_top_population, 1e-8);
  EXPECT_LT(dv.max_top_population, 1e-3 * dl.max_top_population);
}

TEST(Propagation, TimeReversalRestoresInitialState) {
  const auto& s = small();
  const auto psi0 = s.prop.ground_state();
  const LaserPulse pulse{0.03, 0.3, 4 * 2 * std::numbers::pi / 0.3, 0.4};
  PropagationOptions o;
  o.top_channel_tolerance = 1.0;
  auto forward = s.prop.propagate(psi0, pulse, o);
  // Conjugating and driving with F(tau - t) undoes the symmetric splitting.
  forward.coefficients() = forward.coefficients().conjugate();
  forward.time = 0.0;
  const auto back = s.prop.propagate(forward, pulse.reversed(), o);
  WaveFunction target = psi0;
  target.coefficients() = psi0.coefficients().conjugate();
  EXPECT_GE(fidelity(target, back), 1.0 - 1e-8);
}

TEST(Propagation, StepCountRoundsUp) {
  const auto& s = small();
  const LaserPulse pulse{0.0, 0.05, 10.0, 0.0};
  PropagationOptions o;
  o.dt = 0.3;
  PropagationDiagnostics d;
  s.prop.propagate(s.prop.ground_state(), pulse, o, &d);
  EXPECT_EQ(d.steps, 34);
  EXPECT_NEAR(d.dt, 10.0 / 34, 1e-15);
  EXPECT_LE(d.dt, 0.3);
  EXPECT_EQ(d.time.front(), 0.0);
  EXPECT_EQ(d.time.back(), 10.0);
}

TEST(Propagation, WeakFieldMatchesFirstOrderTheory) {
  const auto g = build_grid(200, 100.0, 0.4);
  const Propagator prop(g, build_hamiltonians(g, 3));
  const double omega = 0.8;
  const LaserPulse pulse{0.001, omega, 4 * 2 * std::numbers::pi / omega, 0.0};
  const auto psi = prop.propagate(prop.ground_state(), pulse, {});
  const double ionized = 1.0 - prop.bound_population(psi);
  EXPECT_NEAR(ionized / kWeakFieldIonization, 1.0, 0.05);
}

TEST(Propagation, TruncatedPartialWavesAbort) {
  const auto g = build_grid(100, 60.0, 0.4);
  const Propagator prop(g, build_hamiltonians(g, 2));
  const LaserPulse pulse{0.1, 0.057, 200.0, 0.0};
  PropagationOptions o;
  o.diagnostic_stride = 20;
  try {
    prop.propagate(prop.ground_state(), pulse, o);
    FAIL() << "expected l_max exhaustion";
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::numerical);
    EXPECT_NE(std::string(e.what()).find("l_max"), std::string::npos);
  }
}

TEST(Propagation, MaskAbsorbsOutgoingFlux) {
  const auto g = build_grid(150, 60.0, 0.4);
  const Propagator prop(g, build_hamiltonians(g, 8));
  const LaserPulse pulse{0.05, 0.2, 150.0, 0.0};
  PropagationOptions o;
  o.top_channel_tolerance = 1.0;
  const auto free = prop.propagate(prop.ground_state(), pulse, o);
  o.mask = true;
  const auto masked = prop.propagate(prop.ground_state(), pulse, o);
  EXPECT_NEAR(free.norm(), 1.0, 1e-10);
  EXPECT_LT(masked.norm(), free.norm() - 1e-6);
}

TEST(Propagation, EnergyCutoffIsUnitary) {
  const auto& s = small();
  std::vector<RadialHamiltonian> hams;
  for (int l = 0; l <= 6; ++l) hams.push_back(s.prop.hamiltonian(l));
  const Propagator cut(s.grid, std::move(hams), 5.0);
  EXPECT_LT(cut.retained(0), s.grid.size());
  EXPECT_EQ(s.prop.retained(0), s.grid.size());
  const LaserPulse pulse{0.05, 0.1, 100.0, 0.0};
  PropagationOptions o;
  o.top_channel_tolerance = 1.0;
  const auto psi = cut.propagate(cut.ground_state(), pulse, o);
  EXPECT_NEAR(psi.norm(), 1.0, 1e-12);
}

TEST(Checkpoint, RoundTrip) {
  const auto& s = small();
  auto psi = s.prop.ground_state();
  s.prop.step(psi, LaserPulse{0.05, 0.05, 100.0, 0.0}, 0.5);
  const auto file = std::filesystem::temp_directory_path() / "sfion_test_checkpoint.psi";
  save_checkpoint(file, s.grid, psi);
  const auto cp = load_checkpoint(file);
  EXPECT_EQ(cp.n, 200);
  EXPECT_EQ(cp.r_max, 100.0);
  EXPECT_EQ(cp.map_param, 0.4);
  EXPECT_EQ(cp.psi.time, psi.time);
  EXPECT_EQ(cp.psi.grid_hash, s.grid.hash());
  EXPECT_EQ(cp.psi.coefficients(), psi.coefficients());
  std::filesystem::remove(file);
  EXPECT_THROW(load_checkpoint(file), Error);
}
