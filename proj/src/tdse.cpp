#include "sfion/tdse.hpp"

#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <sstream>

#include "sfion/error.hpp"

namespace sfion {

namespace {

constexpr char kCheckpointMagic[8] = {'S', 'F', 'I', 'O', 'N', 'P', 'S', 'I'};
constexpr std::uint32_t kCheckpointVersion = 1;

}  // namespace

WaveFunction::WaveFunction(int n, int l_max, std::uint64_t hash)
    : grid_hash(hash), coeffs_(Eigen::MatrixXcd::Zero(n, l_max + 1)) {}

double dipole_coefficient(int l) {
  return (l + 1.0) / std::sqrt((2.0 * l + 1.0) * (2.0 * l + 3.0));
}

DipoleCoupling::DipoleCoupling(int l_max_) : l_max(l_max_) {
  if (l_max < 0) throw config_error("dipole coupling: negative l_max");
  const int size = l_max + 1;
  coefficients.resize(l_max);
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(size, size);
  for (int l = 0; l < l_max; ++l) {
    coefficients[l] = dipole_coefficient(l);
    c(l, l + 1) = c(l + 1, l) = coefficients[l];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(c);
  eigenvalues = solver.eigenvalues();
  eigenvectors = solver.eigenvectors();
}

Propagator::Propagator(const RadialGrid& grid,
                       std::vector<RadialHamiltonian> hamiltonians,
                       double energy_cutoff)
    : grid_(std::make_shared<const RadialGrid>(grid)),
      hams_(std::move(hamiltonians)),
      dipole_(static_cast<int>(hams_.size()) - 1),
      energy_cutoff_(energy_cutoff) {
  if (hams_.empty()) throw config_error("propagator: no partial waves");
  for (std::size_t l = 0; l < hams_.size(); ++l) {
    if (hams_[l].l() != static_cast<int>(l) ||
        hams_[l].eigenvalues().size() != grid.size()) {
      throw config_error("propagator: hamiltonians do not match the grid");
    }
    const auto& e = hams_[l].eigenvalues();
    retained_.push_back(
        static_cast<int>((e.array() < energy_cutoff).count()));
  }
}

WaveFunction Propagator::ground_state() const {
  WaveFunction psi(grid_->size(), l_max(), grid_->hash());
  Eigen::VectorXd v = hams_[0].eigenvectors().col(0);
  if (v[0] < 0) v = -v;
  psi.channel(0) = (v / v.norm()).cast<std::complex<double>>();
  return psi;
}

std::vector<Eigen::VectorXcd> Propagator::free_phases(double t) const {
  // Stored as exp(-i e t) - 1 over the retained eigenstates, so that the
  // update c += V (phase - 1) V^T c is the identity on the discarded part.
  std::vector<Eigen::VectorXcd> phases(hams_.size());
  for (std::size_t l = 0; l < hams_.size(); ++l) {
    const auto& e = hams_[l].eigenvalues();
    const int m = retained_[l];
    phases[l].resize(m);
    for (int i = 0; i < m; ++i) {
      const double angle = -e[i] * t;
      const double s = std::sin(0.5 * angle);
      phases[l][i] = {-2.0 * s * s, std::sin(angle)};
    }
  }
  return phases;
}

void Propagator::apply_free(WaveFunction& psi,
                            const std::vector<Eigen::VectorXcd>& phases) const {
  auto& c = psi.coefficients();
#pragma omp parallel
  {
    Eigen::VectorXcd spectral;
#pragma omp for schedule(dynamic)
    for (int l = 0; l <= l_max(); ++l) {
      const auto v = hams_[l].eigenvectors().leftCols(retained_[l]);
      spectral.noalias() = v.transpose() * c.col(l);
      spectral.array() *= phases[l].array();
      c.col(l).noalias() += v * spectral;
    }
  }
}

void Propagator::apply_dipole(WaveFunction& psi, double field_dt) const {
  if (field_dt == 0.0) return;
  auto& c = psi.coefficients();
  const Eigen::Index n = c.rows();
  const Eigen::Index channels = c.cols();
  Eigen::Map<Eigen::MatrixXd> real(reinterpret_cast<double*>(c.data()), 2 * n,
                                   channels);
  Eigen::MatrixXd rotated = real * dipole_.eigenvectors;
  const auto& r = grid_->nodes();
  const auto& lambda = dipole_.eigenvalues;
#pragma omp parallel for
  for (Eigen::Index m = 0; m < channels; ++m) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double angle = -r[j] * field_dt * lambda[m];
      const double cs = std::cos(angle);
      const double sn = std::sin(angle);
      const double re = rotated(2 * j, m);
      const double im = rotated(2 * j + 1, m);
      rotated(2 * j, m) = re * cs - im * sn;
      rotated(2 * j + 1, m) = re * sn + im * cs;
    }
  }
  real.noalias() = rotated * dipole_.eigenvectors.transpose();
}

void Propagator::gauge_shift(WaveFunction& psi, double a) const {
  apply_dipole(psi, -a);
}

const std::vector<Propagator::PairRotation>& Propagator::pair_rotations() const {
  std::call_once(velocity_->once, [this] {
    const auto& d = grid_->derivative();
    const Eigen::VectorXd inv_r = grid_->nodes().cwiseInverse();
    auto& pairs = velocity_->pairs;
    pairs.resize(l_max());
#pragma omp parallel for schedule(dynamic)
    for (int l = 0; l < l_max(); ++l) {
      // (d/dz)_{l, l+1} = c_l (d/dr + (l + 1) / r) on u = r R
      Eigen::MatrixXd b = dipole_.coefficients[l] * d;
      b.diagonal() += dipole_.coefficients[l] * (l + 1.0) * inv_r;
      const auto wl = hams_[l].eigenvectors().leftCols(retained_[l]);
      const auto wu = hams_[l + 1].eigenvectors().leftCols(retained_[l + 1]);
      const Eigen::MatrixXd p = wl.transpose() * (b * wu);
      Eigen::BDCSVD<Eigen::MatrixXd> svd(p, Eigen::ComputeThinU | Eigen::ComputeThinV);
      pairs[l] = {svd.matrixU(), svd.matrixV(), svd.singularValues()};
    }
  });
  return velocity_->pairs;
}

Propagator::Spectral Propagator::to_spectral(const WaveFunction& psi) const {
  Spectral c(hams_.size());
  for (int l = 0; l <= l_max(); ++l) {
    c[l].noalias() =
        hams_[l].eigenvectors().leftCols(retained_[l]).transpose() * psi.channel(l);
  }
  return c;
}

void Propagator::from_spectral(const Spectral& c, WaveFunction& psi) const {
  for (int l = 0; l <= l_max(); ++l) {
    psi.channel(l).noalias() = hams_[l].eigenvectors().leftCols(retained_[l]) * c[l];
  }
}

void Propagator::spectral_free(Spectral& c, double t) const {
  for (int l = 0; l <= l_max(); ++l) {
    const auto& e = hams_[l].eigenvalues();
    for (Eigen::Index i = 0; i < c[l].size(); ++i) {
      c[l][i] *= std::polar(1.0, -e[i] * t);
    }
  }
}

void Propagator::rotate_pairs(Spectral& c, int parity, double s) const {
  if (s == 0.0) return;
  const auto& pairs = pair_rotations();
#pragma omp parallel
  {
    Eigen::VectorXcd x, y, dx, dy;
#pragma omp for schedule(dynamic)
    for (int l = parity; l < l_max(); l += 2) {
      // exp(-s [[0, P], [-P^T, 0]]) on (c_l, c_{l+1})
      const auto& pr = pairs[l];
      x.noalias() = pr.left.transpose() * c[l];
      y.noalias() = pr.right.transpose() * c[l + 1];
      dx.resize(x.size());
      dy.resize(y.size());
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double angle = s * pr.sigma[i];
        const double sn = std::sin(angle);
        const double h = std::sin(0.5 * angle);
        const double cm = -2.0 * h * h;  // cos - 1
        dx[i] = cm * x[i] - sn * y[i];
        dy[i] = cm * y[i] + sn * x[i];
      }
      c[l].noalias() += pr.left * dx;
      c[l + 1].noalias() += pr.right * dy;
    }
  }
}

void Propagator::step(WaveFunction& psi, const LaserPulse& pulse, double dt,
                      Gauge gauge) const {
  if (!(dt > 0.0)) throw domain_error("step: dt must be > 0");
  const double t = psi.time;
  if (gauge == Gauge::length) {
    const auto half = free_phases(0.5 * dt);
    apply_free(psi, half);
    apply_dipole(psi, pulse.field(t + 0.5 * dt) * dt);
    apply_free(psi, half);
  } else {
    const double s = pulse.vector_potential(t + 0.5 * dt) * dt;
    gauge_shift(psi, -pulse.vector_potential(t));
    auto c = to_spectral(psi);
    rotate_pairs(c, 0, 0.5 * s);
    spectral_free(c, 0.5 * dt);
    rotate_pairs(c, 1, s);
    spectral_free(c, 0.5 * dt);
    rotate_pairs(c, 0, 0.5 * s);
    from_spectral(c, psi);
    gauge_shift(psi, pulse.vector_potential(t + dt));
  }
  psi.time = t + dt;
}

void Propagator::evolve_free(WaveFunction& psi, double t) const {
  apply_free(psi, free_phases(t));
  psi.time += t;
}

namespace {

void record_sample(PropagationDiagnostics& diag,
                   const PropagationOptions& options, double time, double norm,
                   double initial_norm, double top_pop, double z) {
  diag.time.push_back(time);
  diag.norm.push_back(norm);
  diag.dipole_z.push_back(z);
  diag.top_population.push_back(top_pop);
  diag.max_top_population = std::max(diag.max_top_population, top_pop);
  if (!options.mask && std::abs(norm - initial_norm) > options.norm_tolerance) {
    std::ostringstream msg;
    msg << "norm drift " << norm - initial_norm << " at t=" << time
        << " exceeds " << options.norm_tolerance << " (grid or dt inadequate)";
    throw numerical_error(msg.str());
  }
  if (top_pop > options.top_channel_tolerance) {
    std::ostringstream msg;
    msg << "population " << top_pop << " in the top two channels at t=" << time
        << " exceeds " << options.top_channel_tolerance << "; increase l_max";
    throw numerical_error(msg.str());
  }
}

Eigen::VectorXd absorber(const RadialGrid& grid) {
  const auto& r = grid.nodes();
  const double start = 0.9 * grid.r_max();
  Eigen::VectorXd mask = Eigen::VectorXd::Ones(r.size());
  for (Eigen::Index j = 0; j < r.size(); ++j) {
    if (r[j] > start) {
      const double arg = 0.5 * std::numbers::pi * (r[j] - start) /
                         (grid.r_max() - start);
      mask[j] = std::pow(std::max(std::cos(arg), 0.0), 0.125);
    }
  }
  return mask;
}

}  // namespace

WaveFunction Propagator::propagate(WaveFunction psi, const LaserPulse& pulse,
                                   const PropagationOptions& options,
                                   PropagationDiagnostics* diagnostics) const {
  if (!(options.dt > 0.0)) throw config_error("propagate: dt must be > 0");
  if (psi.size() != grid_->size() || psi.l_max() != l_max()) {
    throw config_error("propagate: wavefunction shape does not match");
  }
  PropagationDiagnostics local;
  PropagationDiagnostics& diag = diagnostics ? *diagnostics : local;
  diag = {};
  if (pulse.tau - psi.time <= 0.0) return psi;
  if (options.gauge == Gauge::velocity) {
    return propagate_velocity(std::move(psi), pulse, options, diag);
  }
  const auto start = std::chrono::steady_clock::now();
  const double t0 = psi.time;
  const double span = pulse.tau - t0;

  const long steps = static_cast<long>(std::ceil(span / options.dt - 1e-9));
  const double dt = span / static_cast<double>(steps);
  diag.dt = dt;
  diag.steps = steps;

  const auto half = free_phases(0.5 * dt);
  const auto full = free_phases(dt);
  const Eigen::VectorXd mask =
      options.mask ? absorber(*grid_) : Eigen::VectorXd();
  const double initial_norm = psi.norm();

  auto record = [&](const WaveFunction& state) {
    const int top = l_max();
    double top_pop = state.channel_population(top);
    if (top > 0) top_pop += state.channel_population(top - 1);
    record_sample(diag, options, state.time, state.norm(), initial_norm,
                  top_pop, dipole_z(state));
  };

  record(psi);
  apply_free(psi, half);
  for (long s = 0; s < steps; ++s) {
    const double t_mid = t0 + (static_cast<double>(s) + 0.5) * dt;
    apply_dipole(psi, pulse.field(t_mid) * dt);
    if (options.mask) {
      psi.coefficients().array().colwise() *= mask.array().cast<std::complex<double>>();
    }
    const bool last = s + 1 == steps;
    apply_free(psi, last ? half : full);
    psi.time = t0 + static_cast<double>(s + 1) * dt;
    if (!last && options.diagnostic_stride > 0 &&
        (s + 1) % options.diagnostic_stride == 0) {
      WaveFunction sample = psi;
      apply_free(sample, free_phases(-0.5 * dt));
      record(sample);
    }
  }
  psi.time = pulse.tau;
  record(psi);
  diag.seconds = std::chrono::duration<double>(
                     std::chrono::steady_clock::now() - start).count();
  return psi;
}

WaveFunction Propagator::propagate_velocity(WaveFunction psi,
                                            const LaserPulse& pulse,
                                            const PropagationOptions& options,
                                            PropagationDiagnostics& diag) const {
  const auto start = std::chrono::steady_clock::now();
  const double t0 = psi.time;
  const double span = pulse.tau - t0;
  const long steps = static_cast<long>(std::ceil(span / options.dt - 1e-9));
  const double dt = span / static_cast<double>(steps);
  diag.dt = dt;
  diag.steps = steps;
  pair_rotations();

  const Eigen::VectorXd mask =
      options.mask ? absorber(*grid_) : Eigen::VectorXd();
  gauge_shift(psi, -pulse.vector_potential(t0));
  Spectral c = to_spectral(psi);

  auto norm_of = [&](const Spectral& x) {
    double n = 0.0;
    for (const auto& v : x) n += v.squaredNorm();
    return n;
  };
  const double initial_norm = norm_of(c);
  auto record = [&](const Spectral& x, double time) {
    const int top = l_max();
    double top_pop = x[top].squaredNorm();
    if (top > 0) top_pop += x[top - 1].squaredNorm();
    from_spectral(x, psi);
    record_sample(diag, options, time, norm_of(x), initial_norm, top_pop,
                  dipole_z(psi));
  };
  auto kick = [&](long k) {
    return pulse.vector_potential(t0 + (static_cast<double>(k) + 0.5) * dt) * dt;
  };

  record(c, t0);
  double s = kick(0);
  rotate_pairs(c, 0, 0.5 * s);
  for (long k = 0; k < steps; ++k) {
    spectral_free(c, 0.5 * dt);
    rotate_pairs(c, 1, s);
    spectral_free(c, 0.5 * dt);
    if (options.mask) {
      from_spectral(c, psi);
      psi.coefficients().array().colwise() *= mask.array().cast<std::complex<double>>();
      c = to_spectral(psi);
    }
    if (k + 1 == steps) {
      rotate_pairs(c, 0, 0.5 * s);
      break;
    }
    if (options.diagnostic_stride > 0 && (k + 1) % options.diagnostic_stride == 0) {
      Spectral sample = c;
      rotate_pairs(sample, 0, 0.5 * s);
      record(sample, t0 + static_cast<double>(k + 1) * dt);
    }
    const double next = kick(k + 1);
    rotate_pairs(c, 0, 0.5 * (s + next));
    s = next;
  }
  record(c, pulse.tau);
  from_spectral(c, psi);
  gauge_shift(psi, pulse.vector_potential(pulse.tau));
  psi.time = pulse.tau;
  diag.seconds = std::chrono::duration<double>(
                     std::chrono::steady_clock::now() - start).count();
  return psi;
}

double Propagator::energy(const WaveFunction& psi) const {
  double e = 0.0;
  for (int l = 0; l <= l_max(); ++l) {
    const Eigen::VectorXcd spectral =
        hams_[l].eigenvectors().transpose() * psi.channel(l);
    e += (hams_[l].eigenvalues().array() * spectral.array().abs2()).sum();
  }
  return e;
}

double Propagator::mean_radius(const WaveFunction& psi) const {
  return (psi.coefficients().cwiseAbs2().rowwise().sum().array() *
          grid_->nodes().array()).sum();
}

double Propagator::dipole_z(const WaveFunction& psi) const {
  const auto& c = psi.coefficients();
  const auto& r = grid_->nodes();
  double z = 0.0;
  for (int l = 0; l < l_max(); ++l) {
    const double cl = dipole_.coefficients[l];
    for (Eigen::Index j = 0; j < c.rows(); ++j) {
      z += 2.0 * cl * r[j] * std::real(std::conj(c(j, l)) * c(j, l + 1));
    }
  }
  return z;
}

double Propagator::bound_population(const WaveFunction& psi) const {
  double p = 0.0;
  for (int l = 0; l <= l_max(); ++l) {
    const int nb = hams_[l].bound_count();
    if (nb == 0) continue;
    const Eigen::VectorXcd spectral =
        hams_[l].eigenvectors().leftCols(nb).transpose() * psi.channel(l);
    p += spectral.squaredNorm();
  }
  return p;
}

void save_checkpoint(const std::filesystem::path& file, const RadialGrid& grid,
                     const WaveFunction& psi) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw io_error("cannot write checkpoint " + file.string());
  const std::int32_t n = psi.size();
  const std::int32_t l_max = psi.l_max();
  const double r_max = grid.r_max();
  const double a = grid.map_param();
  out.write(kCheckpointMagic, 8);
  out.write(reinterpret_cast<const char*>(&kCheckpointVersion),
            sizeof kCheckpointVersion);
  out.write(reinterpret_cast<const char*>(&n), sizeof n);
  out.write(reinterpret_cast<const char*>(&l_max), sizeof l_max);
  out.write(reinterpret_cast<const char*>(&r_max), sizeof r_max);
  out.write(reinterpret_cast<const char*>(&a), sizeof a);
  out.write(reinterpret_cast<const char*>(&psi.grid_hash), sizeof psi.grid_hash);
  out.write(reinterpret_cast<const char*>(&psi.time), sizeof psi.time);
  out.write(reinterpret_cast<const char*>(psi.coefficients().data()),
            sizeof(std::complex<double>) * psi.coefficients().size());
  if (!out) throw io_error("failed writing checkpoint " + file.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw io_error("cannot open checkpoint " + file.string());
  char magic[8];
  std::uint32_t version = 0;
  std::int32_t n = 0, l_max = 0;
  Checkpoint cp{};
  std::uint64_t hash = 0;
  double time = 0;
  in.read(magic, 8);
  in.read(reinterpret_cast<char*>(&version), sizeof version);
  in.read(reinterpret_cast<char*>(&n), sizeof n);
  in.read(reinterpret_cast<char*>(&l_max), sizeof l_max);
  in.read(reinterpret_cast<char*>(&cp.r_max), sizeof cp.r_max);
  in.read(reinterpret_cast<char*>(&cp.map_param), sizeof cp.map_param);
  in.read(reinterpret_cast<char*>(&hash), sizeof hash);
  in.read(reinterpret_cast<char*>(&time), sizeof time);
  if (!in || std::memcmp(magic, kCheckpointMagic, 8) != 0 ||
      version != kCheckpointVersion || n <= 0 || l_max < 0) {
    throw io_error("not a valid checkpoint: " + file.string());
  }
  cp.n = n;
  cp.psi = WaveFunction(n, l_max, hash);
  cp.psi.time = time;
  in.read(reinterpret_cast<char*>(cp.psi.coefficients().data()),
          sizeof(std::complex<double>) * cp.psi.coefficients().size());
  if (!in) throw io_error("truncated checkpoint: " + file.string());
  return cp;
}

}  // namespace sfion
