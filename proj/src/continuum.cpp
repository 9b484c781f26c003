#include "sfion/continuum.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "sfion/error.hpp"

namespace sfion {

namespace {
constexpr double kPi = std::numbers::pi;
}

std::vector<double> MomentumGrid::values() const {
  if (!(k_min > 0.0) || !(k_step > 0.0) || k_max < k_min) {
    throw config_error("momentum grid: need 0 < k_min <= k_max, k_step > 0");
  }
  const auto count =
      static_cast<std::size_t>(std::floor((k_max - k_min) / k_step + 1e-9)) + 1;
  std::vector<double> k(count);
  for (std::size_t i = 0; i < count; ++i) k[i] = k_min + k_step * i;
  return k;
}

PartialWaveAmplitudes::PartialWaveAmplitudes(std::vector<double> k,
                                             Eigen::MatrixXcd amplitudes)
    : k_(std::move(k)), a_(std::move(amplitudes)) {
  if (static_cast<Eigen::Index>(k_.size()) != a_.rows()) {
    throw config_error("amplitudes: k grid and table rows differ");
  }
}

std::size_t PartialWaveAmplitudes::index_of(double k) const {
  const auto it = std::lower_bound(k_.begin(), k_.end(), k - 1e-9);
  if (it == k_.end() || std::abs(*it - k) > 1e-9) {
    std::ostringstream msg;
    msg << "k = " << k << " is not on the momentum grid";
    throw domain_error(msg.str());
  }
  return static_cast<std::size_t>(it - k_.begin());
}

std::vector<double> PartialWaveAmplitudes::spectrum() const {
  std::vector<double> s(k_.size());
  for (std::size_t i = 0; i < k_.size(); ++i) {
    s[i] = k_[i] * a_.row(static_cast<Eigen::Index>(i)).squaredNorm();
  }
  return s;
}

double PartialWaveAmplitudes::total_probability() const {
  const auto s = spectrum();
  double total = 0.0;
  for (std::size_t i = 1; i < s.size(); ++i) {
    total += 0.5 * (s[i] + s[i - 1]) * (k_[i] - k_[i - 1]);
  }
  return total;
}

PartialWaveAmplitudes project(const Propagator& propagator,
                              const WaveFunction& psi,
                              std::span<const double> k, int l_max) {
  const RadialGrid& grid = propagator.grid();
  if (l_max < 0 || l_max > psi.l_max() || l_max > propagator.l_max()) {
    throw config_error("project: l_max exceeds the wavefunction's channels");
  }
  const double k_limit = grid.max_resolvable_k();
  for (double kk : k) {
    if (!(kk > 0.0)) throw domain_error("project: k must be > 0");
    if (kk > k_limit) {
      std::ostringstream msg;
      msg << "project: k = " << kk << " exceeds the grid resolution limit "
          << k_limit << " (k * max spacing > pi)";
      throw precondition_error(msg.str());
    }
  }
  const std::vector<double> radii(grid.nodes().data(),
                                  grid.nodes().data() + grid.size());
  const Eigen::VectorXd& sqrt_w = grid.sqrt_weights();
  const auto nk = static_cast<Eigen::Index>(k.size());
  Eigen::MatrixXcd table(nk, l_max + 1);

  for (int l = 0; l <= l_max; ++l) {
    const auto& h = propagator.hamiltonian(l);
    const auto bound = h.eigenvectors().leftCols(h.bound_count());
    Eigen::VectorXcd rest = psi.channel(l);
    rest -= bound * (bound.transpose() * rest).eval();
    const Eigen::VectorXcd weighted = rest.cwiseProduct(sqrt_w);
#pragma omp parallel for schedule(dynamic)
    for (Eigen::Index ik = 0; ik < nk; ++ik) {
      const auto wave = specfun::coulomb_wave_samples(k[ik], l, radii);
      const Eigen::Map<const Eigen::VectorXd> u(wave.u.data(), grid.size());
      table(ik, l) = u.cast<std::complex<double>>().dot(weighted);
    }
  }
  return PartialWaveAmplitudes(std::vector<double>(k.begin(), k.end()),
                               std::move(table));
}

MomentumDensity::MomentumDensity(const PartialWaveAmplitudes& amps)
    : amps_(&amps), delta_(amps.k(), amps.l_max()) {}

double MomentumDensity::at(std::size_t ik, double cos_theta) const {
  const int l_max = amps_->l_max();
  std::vector<double> p(l_max + 1);
  specfun::legendre_all(l_max, std::clamp(cos_theta, -1.0, 1.0), p);
  std::complex<double> sum = 0.0;
  for (int l = 0; l <= l_max; ++l) {
    sum += std::polar(std::sqrt(2.0 * l + 1.0) * p[l], delta_(l, ik)) *
           (*amps_)(ik, l);
  }
  return std::norm(sum) / (4.0 * kPi * amps_->k()[ik]);
}

double MomentumDensity::operator()(double k, double cos_theta) const {
  const auto& grid = amps_->k();
  if (grid.empty() || k < grid.front() || k > grid.back()) return 0.0;
  const auto hi = static_cast<std::size_t>(
      std::upper_bound(grid.begin(), grid.end(), k) - grid.begin());
  if (hi >= grid.size()) return at(grid.size() - 1, cos_theta);
  const std::size_t lo = hi - 1;
  const double t = (k - grid[lo]) / (grid[hi] - grid[lo]);
  return (1.0 - t) * at(lo, cos_theta) + t * at(hi, cos_theta);
}

double MomentumMap::integral() const {
  if (k_z.size() < 2 || k_rho.size() < 2) return 0.0;
  const double dz = k_z[1] - k_z[0];
  const double drho = k_rho[1] - k_rho[0];
  return density.sum() * dz * drho;
}

MomentumMap momentum_map(const MomentumDensity& density, const MapMesh& mesh) {
  if (mesh.n_z < 2 || mesh.n_rho < 2 || !(mesh.k_extent > 0.0)) {
    throw config_error("momentum map: invalid mesh");
  }
  MomentumMap map;
  // Cell-centred mesh so the midpoint rule applies directly.
  const double dz = 2.0 * mesh.k_extent / mesh.n_z;
  const double drho = mesh.k_extent / mesh.n_rho;
  for (int i = 0; i < mesh.n_z; ++i) map.k_z.push_back(-mesh.k_extent + (i + 0.5) * dz);
  for (int i = 0; i < mesh.n_rho; ++i) map.k_rho.push_back((i + 0.5) * drho);
  map.density.resize(mesh.n_rho, mesh.n_z);
#pragma omp parallel for schedule(dynamic)
  for (int ir = 0; ir < mesh.n_rho; ++ir) {
    for (int iz = 0; iz < mesh.n_z; ++iz) {
      const double kz = map.k_z[iz];
      const double kr = map.k_rho[ir];
      const double k = std::hypot(kz, kr);
      map.density(ir, iz) =
          k > 0.0 ? 2.0 * kPi * kr * density(k, kz / k) : 0.0;
    }
  }
  return map;
}

std::vector<RingSpec> detect_rings(const PartialWaveAmplitudes& amps,
                                   const RingOptions& options) {
  const auto& k = amps.k();
  const auto raw = amps.spectrum();
  const int n = static_cast<int>(raw.size());
  if (options.smoothing < 1 || options.smoothing % 2 == 0) {
    throw config_error("detect_rings: smoothing window must be odd");
  }
  const int half = options.smoothing / 2;
  std::vector<double> smooth(n);
  for (int i = 0; i < n; ++i) {
    const int lo = std::max(0, i - half);
    const int hi = std::min(n - 1, i + half);
    double s = 0.0;
    for (int j = lo; j <= hi; ++j) s += raw[j];
    smooth[i] = s / (hi - lo + 1);
  }

  // Alternating extrema of the smoothed spectrum; plateaus take their first
  // point. The grid start counts as a minimum when the spectrum rises.
  std::vector<int> minima;
  std::vector<int> maxima;
  for (int i = 1; i + 1 < n; ++i) {
    int j = i;
    while (j + 1 < n - 1 && smooth[j + 1] == smooth[i]) ++j;
    if (smooth[i] < smooth[i - 1] && smooth[j] < smooth[j + 1]) {
      minima.push_back(i);
    } else if (smooth[i] > smooth[i - 1] && smooth[j] > smooth[j + 1]) {
      maxima.push_back(i);
    }
    i = j;
  }
  if (n >= 2 && (minima.empty() || (!maxima.empty() && maxima.front() < minima.front()))) {
    minima.insert(minima.begin(), 0);
  }
  // Refine minima on the unsmoothed spectrum within the window.
  for (int& m : minima) {
    if (m == 0) continue;
    const int lo = std::max(0, m - half);
    const int hi = std::min(n - 1, m + half);
    m = static_cast<int>(std::min_element(raw.begin() + lo, raw.begin() + hi + 1) -
                         raw.begin());
  }

  std::vector<RingSpec> rings;
  int index = 0;
  for (std::size_t a = 0; a + 1 < minima.size(); ++a) {
    const int lo = minima[a];
    const int hi = minima[a + 1];
    if (hi <= lo + 1) continue;
    const auto peak = std::max_element(smooth.begin() + lo, smooth.begin() + hi + 1);
    const int ip = static_cast<int>(peak - smooth.begin());
    if (ip == lo || ip == hi) continue;
    if (k[ip] <= options.k_floor) continue;
    rings.push_back({++index, k[lo], k[hi], k[ip]});
  }
  return rings;
}

std::vector<double> ring_partial_probability(const PartialWaveAmplitudes& amps,
                                             const RingSpec& ring) {
  const auto& k = amps.k();
  if (k.empty() || ring.k_lo < k.front() - 1e-9 || ring.k_hi > k.back() + 1e-9 ||
      !(ring.k_hi > ring.k_lo)) {
    throw domain_error("ring_partial_probability: ring outside the k grid");
  }
  std::vector<double> p(amps.l_max() + 1, 0.0);
  std::size_t prev = k.size();
  for (std::size_t i = 0; i < k.size(); ++i) {
    if (k[i] < ring.k_lo - 1e-9 || k[i] > ring.k_hi + 1e-9) continue;
    if (prev != k.size()) {
      const double dk = k[i] - k[prev];
      for (int l = 0; l <= amps.l_max(); ++l) {
        p[l] += 0.5 * dk *
                (k[i] * std::norm(amps(i, l)) + k[prev] * std::norm(amps(prev, l)));
      }
    }
    prev = i;
  }
  return p;
}

LegendreFit fit_single_legendre(std::span<const double> cos_theta,
                                std::span<const double> values, int l_max) {
  const std::size_t n = cos_theta.size();
  if (n < 2 || values.size() != n) {
    throw domain_error("fit_single_legendre: need matching samples");
  }
  // Trapezoidal inner products on the sample grid.
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double left = i > 0 ? cos_theta[i] - cos_theta[i - 1] : 0.0;
    const double right = i + 1 < n ? cos_theta[i + 1] - cos_theta[i] : 0.0;
    w[i] = 0.5 * (left + right);
  }
  double ff = 0.0;
  for (std::size_t i = 0; i < n; ++i) ff += w[i] * values[i] * values[i];
  LegendreFit best{0, 0.0, 1.0};
  double best_res = std::numeric_limits<double>::infinity();
  for (int l = 0; l <= l_max; ++l) {
    double fp = 0.0;
    double pp = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double p = specfun::legendre(l, std::clamp(cos_theta[i], -1.0, 1.0));
      const double p2 = p * p;
      fp += w[i] * values[i] * p2;
      pp += w[i] * p2 * p2;
    }
    const double scale = fp / pp;
    const double res = std::max(ff - fp * scale, 0.0);
    if (res < best_res) {
      best_res = res;
      best = {l, scale, ff > 0.0 ? std::sqrt(res / ff) : 0.0};
    }
  }
  return best;
}

AngularCut angular_cut(const MomentumDensity& density, double k, int n_cos) {
  if (n_cos < 3) throw config_error("angular_cut: need >= 3 samples");
  const auto& amps = density.amplitudes();
  const std::size_t ik = amps.index_of(k);
  AngularCut cut;
  cut.k = amps.k()[ik];
  cut.cos_theta.resize(n_cos);
  cut.density.resize(n_cos);
  const double factor = 2.0 * kPi * cut.k * cut.k;
  for (int i = 0; i < n_cos; ++i) {
    const double c = -1.0 + 2.0 * i / (n_cos - 1.0);
    cut.cos_theta[i] = c;
    cut.density[i] = factor * density.at(ik, c);
  }
  const auto fit = fit_single_legendre(cut.cos_theta, cut.density, amps.l_max());
  cut.best_l0 = fit.l0;
  cut.scale = fit.scale;
  cut.relative_residual = fit.relative_residual;
  cut.fit.resize(n_cos);
  for (int i = 0; i < n_cos; ++i) {
    const double p = specfun::legendre(fit.l0, cut.cos_theta[i]);
    cut.fit[i] = fit.scale * p * p;
  }
  for (int i = 1; i + 1 < n_cos; ++i) {
    const double f = cut.density[i];
    if (f < cut.density[i - 1] && f <= cut.density[i + 1]) {
      // parabolic refinement through the three samples
      const double a = cut.density[i - 1];
      const double c = cut.density[i + 1];
      const double denom = a - 2.0 * f + c;
      const double h = cut.cos_theta[i + 1] - cut.cos_theta[i];
      const double shift = denom > 0.0 ? 0.5 * h * (a - c) / denom : 0.0;
      cut.minima.push_back(cut.cos_theta[i] + shift);
    }
  }
  return cut;
}

}  // namespace sfion
