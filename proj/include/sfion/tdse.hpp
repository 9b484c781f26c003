#pragma once

// Split-operator propagation of the m = 0 partial-wave expansion
// psi(r, t) = sum_l u_l(r, t) / r Y_l0(theta).
//
// Wavefunctions passed in and out are in length gauge. By default the
// interior of propagate() runs in velocity gauge, H = H0 + A(t) p_z, where
// the canonical momentum equals the drift momentum and the partial-wave
// content stays bounded; the result is mapped back with exp(i A(t) z).

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <memory>
#include <mutex>
#include <vector>

#include "sfion/pulse.hpp"
#include "sfion/radial_grid.hpp"

namespace sfion {

/// Weighted amplitudes c_l(r_j) (rows j, columns l) at time t.
class WaveFunction {
 public:
  WaveFunction() = default;
  WaveFunction(int n, int l_max, std::uint64_t grid_hash);

  int size() const noexcept { return static_cast<int>(coeffs_.rows()); }
  int l_max() const noexcept { return static_cast<int>(coeffs_.cols()) - 1; }

  Eigen::MatrixXcd& coefficients() noexcept { return coeffs_; }
  const Eigen::MatrixXcd& coefficients() const noexcept { return coeffs_; }
  auto channel(int l) { return coeffs_.col(l); }
  auto channel(int l) const { return coeffs_.col(l); }

  double norm() const { return coeffs_.squaredNorm(); }
  double channel_population(int l) const { return coeffs_.col(l).squaredNorm(); }

  double time = 0.0;
  std::uint64_t grid_hash = 0;

 private:
  Eigen::MatrixXcd coeffs_;
};

/// <l+1, 0| cos(theta) |l, 0> = (l + 1) / sqrt((2l + 1)(2l + 3)).
double dipole_coefficient(int l);

/// Tridiagonal cos(theta) matrix over l = 0..l_max and its eigendecomposition.
struct DipoleCoupling {
  explicit DipoleCoupling(int l_max);

  int l_max;
  std::vector<double> coefficients;  // c_0 .. c_{l_max-1}
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd eigenvectors;
};

enum class Gauge { velocity, length };

struct PropagationOptions {
  double dt = 0.05;
  Gauge gauge = Gauge::velocity;
  bool mask = false;             // cos^{1/8} absorber over the last 10% of the box
  int diagnostic_stride = 100;   // steps between norm / <z> samples
  double norm_tolerance = 1e-4;  // abort if |norm - 1| exceeds this (no mask)
  double top_channel_tolerance = 1e-8;
};

struct PropagationDiagnostics {
  std::vector<double> time;
  std::vector<double> norm;
  std::vector<double> dipole_z;
  std::vector<double> top_population;  // top two channels, propagation gauge
  double max_top_population = 0.0;  // top two channels, over all samples
  double dt = 0.0;
  long steps = 0;
  double seconds = 0.0;
};

class Propagator {
 public:
  /// Velocity gauge works in the basis of eigenstates with energy below
  /// energy_cutoff and discards the rest. Length gauge leaves the states
  /// above the cutoff untouched by the field-free factor. Pass infinity for
  /// the full spectrum.
  Propagator(const RadialGrid& grid, std::vector<RadialHamiltonian> hamiltonians,
             double energy_cutoff = kDefaultEnergyCutoff);

  static constexpr double kDefaultEnergyCutoff =
      std::numeric_limits<double>::infinity();

  const RadialGrid& grid() const noexcept { return *grid_; }
  int l_max() const noexcept { return static_cast<int>(hams_.size()) - 1; }
  const RadialHamiltonian& hamiltonian(int l) const { return hams_.at(l); }
  const DipoleCoupling& dipole() const noexcept { return dipole_; }
  double energy_cutoff() const noexcept { return energy_cutoff_; }
  /// Number of eigenstates of H_l below the energy cutoff.
  int retained(int l) const { return retained_.at(l); }

  /// Lowest l = 0 eigenvector, unit norm, positive at the first node.
  WaveFunction ground_state() const;

  /// One symmetric split step starting at psi.time; advances psi.time by dt.
  /// Length gauge: exp(-i H0 dt/2) exp(-i z F dt) exp(-i H0 dt/2).
  /// Velocity gauge: E/2 H0/2 O H0/2 E/2, where E and O couple the
  /// (even, odd) and (odd, even) channel pairs through A p_z.
  void step(WaveFunction& psi, const LaserPulse& pulse, double dt,
            Gauge gauge = Gauge::velocity) const;

  /// Evolves from psi0.time to pulse.tau with dt reduced so the interval is
  /// an integer number of steps. Throws a numerical error on norm drift or
  /// l_max exhaustion.
  WaveFunction propagate(WaveFunction psi0, const LaserPulse& pulse,
                         const PropagationOptions& options,
                         PropagationDiagnostics* diagnostics = nullptr) const;

  /// Field-free evolution exp(-i H0 t).
  void evolve_free(WaveFunction& psi, double t) const;

  double energy(const WaveFunction& psi) const;
  double mean_radius(const WaveFunction& psi) const;
  double dipole_z(const WaveFunction& psi) const;
  /// Multiplies by exp(i a z); maps velocity to length gauge for a = A(t).
  void gauge_shift(WaveFunction& psi, double a) const;
  /// Population of all eigenstates with negative energy.
  double bound_population(const WaveFunction& psi) const;

 private:
  void apply_free(WaveFunction& psi,
                  const std::vector<Eigen::VectorXcd>& phases) const;
  void apply_dipole(WaveFunction& psi, double field_dt) const;
  std::vector<Eigen::VectorXcd> free_phases(double t) const;

  // Velocity gauge. The p_z block between channels l and l + 1 in the
  // truncated eigenbases is P = U diag(sigma) V^T.
  struct PairRotation {
    Eigen::MatrixXd left, right;
    Eigen::VectorXd sigma;
  };
  struct VelocityData {
    std::once_flag once;
    std::vector<PairRotation> pairs;
  };
  using Spectral = std::vector<Eigen::VectorXcd>;
  const std::vector<PairRotation>& pair_rotations() const;
  Spectral to_spectral(const WaveFunction& psi) const;
  void from_spectral(const Spectral& c, WaveFunction& psi) const;
  void rotate_pairs(Spectral& c, int parity, double s) const;
  void spectral_free(Spectral& c, double t) const;
  WaveFunction propagate_velocity(WaveFunction psi, const LaserPulse& pulse,
                                  const PropagationOptions& options,
                                  PropagationDiagnostics& diag) const;

  std::shared_ptr<const RadialGrid> grid_;
  std::vector<RadialHamiltonian> hams_;
  DipoleCoupling dipole_;
  double energy_cutoff_;
  std::vector<int> retained_;
  std::shared_ptr<VelocityData> velocity_ = std::make_shared<VelocityData>();
};

/// Binary checkpoint of c_l(r_j) plus grid parameters and time.
void save_checkpoint(const std::filesystem::path& file, const RadialGrid& grid,
                     const WaveFunction& psi);

struct Checkpoint {
  int n;
  double r_max;
  double map_param;
  WaveFunction psi;
};

Checkpoint load_checkpoint(const std::filesystem::path& file);

}  // namespace sfion
