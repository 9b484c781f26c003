#pragma once

// Mapped Gauss-Lobatto (generalized pseudospectral) radial discretization.
//
// The map r(x) = L (1 + x) / (1 - x + a), L = r_max a / 2, sends the
// Lobatto nodes x in [-1, 1] to [0, r_max] with points clustered at the
// origin. Radial functions are carried as quadrature-weighted amplitudes
//   d_j = sqrt(w_j r'(x_j)) u(r_j),
// so that sum_j |d_j|^2 approximates int |u|^2 dr and every operator below
// is a plain real-symmetric matrix.

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

namespace sfion {

class RadialGrid {
 public:
  /// n interior collocation points (the unknowns; both endpoints carry
  /// Dirichlet zeros), box radius r_max, mapping stiffness a = map_param.
  RadialGrid(int n, double r_max, double map_param);

  int size() const noexcept { return n_; }
  double r_max() const noexcept { return r_max_; }
  double map_param() const noexcept { return map_param_; }

  /// Interior nodes r_1 < ... < r_n.
  const Eigen::VectorXd& nodes() const noexcept { return r_; }
  /// Interior quadrature weights in the r measure, w_j r'(x_j).
  const Eigen::VectorXd& weights() const noexcept { return weights_; }
  /// sqrt of weights(): converts u(r_j) to weighted amplitudes.
  const Eigen::VectorXd& sqrt_weights() const noexcept { return sqrt_w_; }

  /// int_0^{r_max} f(r) dr over all Lobatto nodes, endpoints included.
  double integrate(const std::function<double(double)>& f) const;

  /// Maps x in [-1, 1] to r.
  double map(double x) const;

  /// Largest spacing between adjacent nodes.
  double max_spacing() const;
  /// Largest momentum with k * max_spacing <= pi.
  double max_resolvable_k() const { return 3.141592653589793 / max_spacing(); }

  /// Symmetrized kinetic block -1/2 d^2/dr^2 on the interior nodes.
  const Eigen::MatrixXd& kinetic() const noexcept { return *kinetic_; }
  /// Antisymmetric d/dr in the weighted representation (Galerkin form with
  /// Lobatto quadrature, Dirichlet at both ends).
  const Eigen::MatrixXd& derivative() const noexcept { return *derivative_; }

  /// Stable identifier for cache keys and checkpoints.
  std::uint64_t hash() const;

 private:
  int n_;
  double r_max_;
  double map_param_;
  double scale_;  // L
  std::vector<double> x_all_;
  std::vector<double> w_all_;  // w_k r'(x_k), all nodes
  std::vector<double> r_all_;
  Eigen::VectorXd r_;
  Eigen::VectorXd weights_;
  Eigen::VectorXd sqrt_w_;
  std::shared_ptr<const Eigen::MatrixXd> kinetic_;
  std::shared_ptr<const Eigen::MatrixXd> derivative_;
};

/// Validates arguments and builds the grid; throws a config error for n < 16
/// or non-positive r_max / map_param.
RadialGrid build_grid(int n, double r_max, double map_param);

/// Field-free radial Hamiltonian -1/2 d^2/dr^2 + l(l+1)/(2 r^2) - 1/r for one
/// partial wave, with its full eigendecomposition (eigenvalues ascending,
/// eigenvectors as columns in the weighted-amplitude representation).
class RadialHamiltonian {
 public:
  RadialHamiltonian(int l, Eigen::VectorXd eigenvalues,
                    Eigen::MatrixXd eigenvectors);

  int l() const noexcept { return l_; }
  const Eigen::VectorXd& eigenvalues() const noexcept { return values_; }
  const Eigen::MatrixXd& eigenvectors() const noexcept { return vectors_; }
  /// Number of eigenvalues below zero (box bound states).
  int bound_count() const noexcept { return bound_count_; }

 private:
  int l_;
  Eigen::VectorXd values_;
  Eigen::MatrixXd vectors_;
  int bound_count_;
};

/// Dense symmetric matrix of H_l on the grid.
Eigen::MatrixXd hamiltonian_matrix(const RadialGrid& grid, int l);

RadialHamiltonian build_hamiltonian(const RadialGrid& grid, int l);

/// Hamiltonians for l = 0..l_max, built in parallel over l. When cache_dir is
/// set, eigendecompositions are read from / written to versioned binary files
/// keyed by (n, r_max, map_param, l).
std::vector<RadialHamiltonian> build_hamiltonians(
    const RadialGrid& grid, int l_max,
    const std::optional<std::filesystem::path>& cache_dir = std::nullopt);

/// Binary eigendecomposition cache. Returns nullopt if the file is absent or
/// its header does not match the grid and l.
std::optional<RadialHamiltonian> load_hamiltonian(
    const std::filesystem::path& file, const RadialGrid& grid, int l);
void save_hamiltonian(const std::filesystem::path& file,
                      const RadialGrid& grid, const RadialHamiltonian& h);
std::filesystem::path hamiltonian_cache_file(const std::filesystem::path& dir,
                                             const RadialGrid& grid, int l);

}  // namespace sfion
