#include "sfion/ctmc.hpp"

#include <algorithm>
#include <boost/numeric/odeint.hpp>
#include <exception>
#include <numbers>
#include <sstream>

#include "sfion/error.hpp"

namespace sfion::ctmc {

namespace odeint = boost::numeric::odeint;

double QuasistaticModel::rate(double field_abs) const {
  if (!(field_abs > 0.0)) return 0.0;
  return 4.0 / field_abs * std::exp(-2.0 / (3.0 * field_abs));
}

std::vector<double> barrier_roots(double field_abs) {
  if (!(field_abs > 0.0)) throw domain_error("barrier_roots: field must be > 0");
  const double ip = kIonizationPotential;
  const double disc = ip * ip - 4.0 * field_abs;
  if (disc < 0.0) return {};
  const double q = 0.5 * (ip + std::sqrt(disc));  // stable pair of roots
  return {1.0 / q, q / field_abs};
}

double QuasistaticModel::exit_distance(double field_abs) const {
  const auto roots = barrier_roots(field_abs);
  if (roots.empty()) return kIonizationPotential / field_abs;
  return roots.back();
}

double QuasistaticModel::transverse_speed(double field_abs, double u) const {
  return std::sqrt(-field_abs * std::log1p(-u));
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

Substream::Substream(std::uint64_t seed, std::uint64_t index)
    : engine_(splitmix64(splitmix64(seed) ^ index)) {}

double Substream::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::vector<TunnelEvent> sample_events(const LaserPulse& pulse, long n_events,
                                       std::uint64_t seed,
                                       const TunnelingModel& model,
                                       const SamplingOptions& options) {
  if (n_events < 1) throw config_error("sample_events: n_events must be >= 1");
  if (options.time_cells < 2) throw config_error("sample_events: time_cells must be >= 2");
  if (!(pulse.tau > 0.0)) throw config_error("sample_events: tau must be > 0");

  const int m = options.time_cells;
  const double h = pulse.tau / m;
  std::vector<double> cdf(m + 1, 0.0);
  double prev = model.rate(std::abs(pulse.field(0.0)));
  for (int i = 1; i <= m; ++i) {
    const double w = model.rate(std::abs(pulse.field(i * h)));
    cdf[i] = cdf[i - 1] + 0.5 * h * (w + prev);
    prev = w;
  }
  const double total = cdf[m];
  if (!(total > 0.0) || !std::isfinite(total)) {
    std::ostringstream msg;
    msg << "sample_events: tunneling rate underflows for F0 = " << pulse.F0;
    throw precondition_error(msg.str());
  }

  std::vector<TunnelEvent> events(static_cast<std::size_t>(n_events));
  const double weight = 1.0 / static_cast<double>(n_events);
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n_events; ++i) {
    Substream rng(seed, static_cast<std::uint64_t>(i));
    const double target = rng.uniform() * total;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), target);
    const auto cell = std::clamp<long>(it - cdf.begin() - 1, 0, m - 1);
    const double span = cdf[cell + 1] - cdf[cell];
    const double frac = span > 0.0 ? (target - cdf[cell]) / span : 0.5;
    const double t = (cell + frac) * h;
    const double f = pulse.field(t);
    const double fa = std::abs(f);
    TunnelEvent& e = events[static_cast<std::size_t>(i)];
    e.time = t;
    e.z_exit = fa > 0.0 ? -std::copysign(model.exit_distance(fa), f) : 0.0;
    e.v_perp = fa > 0.0 ? model.transverse_speed(fa, rng.uniform()) : 0.0;
    e.weight = weight;
  }
  return events;
}

TrajectoryStatus evolve(PhaseState& state, double t0, double t1,
                        const LaserPulse& pulse, const IntegrationOptions& options,
                        long* steps) {
  const bool coulomb = options.coulomb;
  auto rhs = [&pulse, coulomb](const PhaseState& s, PhaseState& ds, double t) {
    ds[0] = s[2];
    ds[1] = s[3];
    double ax = 0.0;
    double az = -pulse.field(t);
    if (coulomb) {
      const double r2 = s[0] * s[0] + s[1] * s[1];
      const double inv_r3 = 1.0 / (r2 * std::sqrt(r2));
      ax -= s[0] * inv_r3;
      az -= s[1] * inv_r3;
    }
    ds[2] = ax;
    ds[3] = az;
  };

  auto stepper = odeint::make_controlled(options.abs_tol, options.rel_tol,
                                         odeint::runge_kutta_fehlberg78<PhaseState>());
  double t = t0;
  double dt = std::min(0.01, t1 - t0);
  long count = 0;
  auto finish = [&](TrajectoryStatus status) {
    if (steps) *steps = count;
    return status;
  };
  const bool driven = pulse.F0 != 0.0 && pulse.omega > 0.0;
  const double cap = 2.0 * std::numbers::pi / pulse.omega * options.max_step_fraction;
  while (t < t1) {
    if (count >= options.max_steps) return finish(TrajectoryStatus::step_limit);
    if (driven && t < pulse.tau) dt = std::min(dt, cap);
    const bool last = dt >= t1 - t;
    const double tried = last ? t1 - t : dt;
    double next = tried;
    if (stepper.try_step(rhs, state, t, next) == odeint::success) {
      ++count;
      if (last) t = t1;
      else if (tried < options.min_step) return finish(TrajectoryStatus::step_underflow);
      dt = last ? std::max(dt, next) : next;
    } else {
      if (next < options.min_step) return finish(TrajectoryStatus::step_underflow);
      dt = next;
    }
  }
  return finish(TrajectoryStatus::ok);
}

KeplerInvariants kepler_invariants(const PhaseState& s) {
  const double x = s[0], z = s[1], px = s[2], pz = s[3];
  const double r = std::hypot(x, z);
  const double ly = z * px - x * pz;
  return {0.5 * (px * px + pz * pz) - 1.0 / r, ly,
          {-pz * ly - x / r, px * ly - z / r}};
}

std::array<double, 2> asymptotic_momentum(const KeplerInvariants& inv) {
  if (!(inv.energy > 0.0)) {
    throw domain_error("asymptotic_momentum: orbit is bound");
  }
  const double k = std::sqrt(2.0 * inv.energy);
  const double l = inv.angular_momentum;
  const auto [ax, az] = inv.runge_lenz;
  // k_inf = k (k L x A - A) / (1 + k^2 L^2), with L x A = (L A_z, -L A_x).
  const double scale = k / (1.0 + k * k * l * l);
  return {scale * (k * l * az - ax), scale * (-k * l * ax - az)};
}

double pericenter(double k, double angular_momentum) {
  if (!(k > 0.0)) throw domain_error("pericenter: k must be > 0");
  const double kl = k * angular_momentum;
  // (sqrt(1 + x) - 1) / k^2 without cancellation for small x
  return angular_momentum * angular_momentum / (std::sqrt(1.0 + kl * kl) + 1.0);
}

TrajectoryRecord integrate(const TunnelEvent& event, const LaserPulse& pulse,
                           const IntegrationOptions& options) {
  TrajectoryRecord rec;
  rec.event = event;
  PhaseState s{0.0, event.z_exit, event.v_perp, 0.0};
  rec.status = evolve(s, event.time, pulse.tau, pulse, options);
  rec.final_state = s;
  if (rec.status != TrajectoryStatus::ok) return rec;

  const auto inv = kepler_invariants(s);
  rec.energy = inv.energy;
  rec.angular_momentum = std::abs(inv.angular_momentum);
  if (inv.energy > 0.0) {
    const double k = std::sqrt(2.0 * inv.energy);
    const auto [kx, kz] = asymptotic_momentum(inv);
    rec.k_z = kz;
    rec.k_rho = std::abs(kx);
    rec.r_min = pericenter(k, inv.angular_momentum);
    const auto [ax, az] = inv.runge_lenz;
    const double ecc = std::hypot(ax, az);
    rec.axis_angle = std::atan2(std::abs(ax), az);
    rec.opening_angle = std::acos(-1.0 / ecc);
  }
  return rec;
}

std::vector<TrajectoryRecord> integrate_all(const std::vector<TunnelEvent>& events,
                                            const LaserPulse& pulse,
                                            const IntegrationOptions& options) {
  std::vector<TrajectoryRecord> records(events.size());
  std::exception_ptr failure;
  const auto n = static_cast<long>(events.size());
#pragma omp parallel for schedule(dynamic, 64)
  for (long i = 0; i < n; ++i) {
    try {
      records[i] = integrate(events[i], pulse, options);
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return records;
}

std::vector<double> l_distribution(const std::vector<TrajectoryRecord>& records,
                                   const EnergyWindow& window) {
  std::vector<double> hist;
  double total = 0.0;
  for (const auto& r : records) {
    if (!r.unbound() || !window.contains(r.k())) continue;
    const auto bin = static_cast<std::size_t>(std::floor(r.angular_momentum));
    if (bin >= hist.size()) hist.resize(bin + 1, 0.0);
    hist[bin] += r.event.weight;
    total += r.event.weight;
  }
  if (total > 0.0) {
    for (double& h : hist) h /= total;
  }
  return hist;
}

EnsembleSummary summarize(const std::vector<TrajectoryRecord>& records) {
  EnsembleSummary s;
  s.total = static_cast<long>(records.size());
  for (const auto& r : records) {
    if (r.status != TrajectoryStatus::ok) ++s.flagged;
    else if (r.energy > 0.0) ++s.unbound;
  }
  return s;
}

PericenterSummary pericenter_check(const std::vector<TrajectoryRecord>& records,
                                   const LaserPulse& pulse,
                                   const EnergyWindow& window) {
  PericenterSummary out;
  if (pulse.F0 == 0.0) {
    out.status = PericenterStatus::skipped_zero_field;
    return out;
  }
  out.quiver_amplitude = pulse.keldysh().quiver_amplitude;
  std::vector<double> r_min;
  for (const auto& r : records) {
    if (r.unbound() && window.contains(r.k())) r_min.push_back(r.r_min);
  }
  out.selected = static_cast<long>(r_min.size());
  if (r_min.empty()) {
    out.status = PericenterStatus::empty_selection;
    return out;
  }
  const auto mid = r_min.begin() + r_min.size() / 2;
  std::nth_element(r_min.begin(), mid, r_min.end());
  double median = *mid;
  if (r_min.size() % 2 == 0) {
    median = 0.5 * (median + *std::max_element(r_min.begin(), mid));
  }
  out.median_r_min = median;
  out.ratio = median / out.quiver_amplitude;
  return out;
}

}  // namespace sfion::ctmc
