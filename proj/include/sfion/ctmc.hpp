#pragma once

// Classical-trajectory Monte Carlo with a quasistatic tunneling step.
//
// Events are released with zero longitudinal velocity at the tunnel exit and a
// transverse velocity v_perp along +x; the motion then stays in the xz plane.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <random>
#include <vector>

#include "sfion/pulse.hpp"

namespace sfion::ctmc {

struct TunnelEvent {
  double time = 0.0;    // release time t_i
  double z_exit = 0.0;  // signed, opposite to F(t_i)
  double v_perp = 0.0;  // >= 0, along +x
  double weight = 1.0;
};

/// Rate, exit point and transverse spread of the tunneling step.
class TunnelingModel {
 public:
  virtual ~TunnelingModel() = default;
  /// Ionization rate at instantaneous field strength |F|.
  virtual double rate(double field_abs) const = 0;
  /// Distance of the tunnel exit from the nucleus.
  virtual double exit_distance(double field_abs) const = 0;
  /// Transverse speed from a uniform variate u in [0, 1).
  virtual double transverse_speed(double field_abs, double u) const = 0;
};

/// Hydrogen 1s quasistatic model:
///   w(F) = (4/F) exp(-2/(3F));
///   exit at the outer root of F s^2 - I_p s + 1 = 0, or I_p/F above the barrier;
///   transverse velocity density exp(-v^2/F) in the plane, so the speed has
///   density ~ v exp(-v^2/F).
class QuasistaticModel final : public TunnelingModel {
 public:
  double rate(double field_abs) const override;
  double exit_distance(double field_abs) const override;
  double transverse_speed(double field_abs, double u) const override;
};

/// Real roots of F s^2 - I_p s + 1 = 0 (ascending), empty above the barrier.
std::vector<double> barrier_roots(double field_abs);

/// Per-index random stream: same (seed, index) gives the same numbers on any
/// thread count.
class Substream {
 public:
  Substream(std::uint64_t seed, std::uint64_t index);
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();

 private:
  std::mt19937_64 engine_;
};

struct SamplingOptions {
  int time_cells = 200000;  // release-time CDF resolution over [0, tau]
};

/// n_events release events with t_i distributed as w(F(t)). Deterministic in
/// (pulse, n_events, seed). Throws a config error for n_events < 1 and a
/// precondition error if the rate underflows over the whole pulse.
std::vector<TunnelEvent> sample_events(const LaserPulse& pulse, long n_events,
                                       std::uint64_t seed,
                                       const TunnelingModel& model = QuasistaticModel{},
                                       const SamplingOptions& options = {});

/// Position and velocity in the xz plane: (x, z, v_x, v_z).
using PhaseState = std::array<double, 4>;

struct IntegrationOptions {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double min_step = 1e-13;    // smaller accepted steps flag the trajectory
  long max_steps = 5000000;
  // Step cap while the field is on, as a fraction of the laser period. The
  // embedded RKF7(8) error estimate is blind to forces that depend on t alone.
  double max_step_fraction = 1.0 / 40.0;
  bool coulomb = true;        // false drops the -r/r^3 term (test switch)
};

enum class TrajectoryStatus { ok = 0, step_underflow = 1, step_limit = 2 };

/// Integrates r'' = -r/r^3 - F(t) z_hat from t0 to t1 (adaptive RKF7(8)).
TrajectoryStatus evolve(PhaseState& state, double t0, double t1,
                        const LaserPulse& pulse, const IntegrationOptions& options,
                        long* steps = nullptr);

/// Field-free Kepler quantities of a phase point.
struct KeplerInvariants {
  double energy;  // p^2/2 - 1/r
  double angular_momentum;  // L_y = z p_x - x p_z (signed)
  std::array<double, 2> runge_lenz;  // (A_x, A_z), A = p x L - r_hat
};

KeplerInvariants kepler_invariants(const PhaseState& s);

/// Asymptotic momentum (k_x, k_z) of an unbound Kepler orbit, outgoing branch.
std::array<double, 2> asymptotic_momentum(const KeplerInvariants& inv);

/// Pericenter (sqrt(1 + (k L)^2) - 1) / k^2 of a hyperbola with energy k^2/2.
double pericenter(double k, double angular_momentum);

struct TrajectoryRecord {
  TunnelEvent event;
  PhaseState final_state{};
  double energy = 0.0;
  double angular_momentum = 0.0;  // |L|
  double k_z = 0.0;               // asymptotic, zero if bound
  double k_rho = 0.0;
  double r_min = std::numeric_limits<double>::quiet_NaN();
  double axis_angle = std::numeric_limits<double>::quiet_NaN();     // polar angle of A
  double opening_angle = std::numeric_limits<double>::quiet_NaN();  // acos(-1/|A|)
  TrajectoryStatus status = TrajectoryStatus::ok;

  bool unbound() const { return status == TrajectoryStatus::ok && energy > 0.0; }
  double k() const { return unbound() ? std::sqrt(2.0 * energy) : 0.0; }
};

TrajectoryRecord integrate(const TunnelEvent& event, const LaserPulse& pulse,
                           const IntegrationOptions& options = {});

/// Integrates every event in parallel; order follows events.
std::vector<TrajectoryRecord> integrate_all(const std::vector<TunnelEvent>& events,
                                            const LaserPulse& pulse,
                                            const IntegrationOptions& options = {});

struct EnergyWindow {
  double k_min = 0.0;
  double k_max = std::numeric_limits<double>::infinity();
  bool contains(double k) const { return k >= k_min && k <= k_max; }
};

/// Weights of unbound, unflagged records in the window binned by |L| into
/// [l, l+1), normalized to unit sum. Empty if nothing is selected.
std::vector<double> l_distribution(const std::vector<TrajectoryRecord>& records,
                                   const EnergyWindow& window);

struct EnsembleSummary {
  long total = 0;
  long unbound = 0;
  long flagged = 0;
  double flagged_fraction() const { return total ? double(flagged) / total : 0.0; }
};

EnsembleSummary summarize(const std::vector<TrajectoryRecord>& records);

enum class PericenterStatus { ok, skipped_zero_field, empty_selection };

struct PericenterSummary {
  PericenterStatus status = PericenterStatus::ok;
  double median_r_min = 0.0;
  double quiver_amplitude = 0.0;
  double ratio = 0.0;
  long selected = 0;
};

/// Median r_min of unbound records in the window against alpha = F0/omega^2.
PericenterSummary pericenter_check(const std::vector<TrajectoryRecord>& records,
                                   const LaserPulse& pulse,
                                   const EnergyWindow& window);

}  // namespace sfion::ctmc
