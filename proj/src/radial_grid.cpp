#include "sfion/radial_grid.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "sfion/error.hpp"
#include "sfion/specfun.hpp"

namespace sfion {

namespace {

constexpr char kCacheMagic[8] = {'S', 'F', 'I', 'O', 'N', 'E', 'I', 'G'};
constexpr std::uint32_t kCacheVersion = 1;

std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t h) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= bytes[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Fixes the eigenvector sign: first non-negligible component positive.
void normalize_sign(Eigen::Ref<Eigen::VectorXd> v) {
  const double cutoff = 1e-3 * v.cwiseAbs().maxCoeff();
  for (Eigen::Index j = 0; j < v.size(); ++j) {
    if (std::abs(v[j]) > cutoff) {
      if (v[j] < 0) v = -v;
      return;
    }
  }
}

}  // namespace

RadialGrid::RadialGrid(int n, double r_max, double map_param)
    : n_(n), r_max_(r_max), map_param_(map_param),
      scale_(0.5 * r_max * map_param) {
  const int order = n + 1;
  auto rule = specfun::gauss_lobatto(order + 1);
  x_all_ = std::move(rule.nodes);
  r_all_.resize(x_all_.size());
  w_all_.resize(x_all_.size());
  std::vector<double> drdx(x_all_.size());
  for (std::size_t k = 0; k < x_all_.size(); ++k) {
    const double x = x_all_[k];
    const double denom = 1.0 - x + map_param_;
    r_all_[k] = map(x);
    drdx[k] = scale_ * (2.0 + map_param_) / (denom * denom);
    w_all_[k] = rule.weights[k] * drdx[k];
  }
  r_all_.front() = 0.0;
  r_all_.back() = r_max_;

  r_.resize(n);
  weights_.resize(n);
  for (int j = 0; j < n; ++j) {
    r_[j] = r_all_[j + 1];
    weights_[j] = w_all_[j + 1];
  }
  sqrt_w_ = weights_.cwiseSqrt();

  // Lagrange derivative matrix D(k, j) = l_j'(x_k) over all Lobatto nodes.
  const int total = order + 1;
  std::vector<double> pn(total);
  for (int k = 0; k < total; ++k) {
    pn[k] = specfun::legendre(order, std::clamp(x_all_[k], -1.0, 1.0));
  }
  Eigen::MatrixXd deriv(total, n);
  for (int k = 0; k < total; ++k) {
    for (int j = 1; j <= n; ++j) {
      deriv(k, j - 1) =
          k == j ? 0.0 : pn[k] / (pn[j] * (x_all_[k] - x_all_[j]));
    }
  }
  // Weak form: T_ij = 1/2 sum_k w_k l_i'(x_k) l_j'(x_k) / r'(x_k), then
  // T -> S^{-1/2} T S^{-1/2} with the diagonal overlap S = diag(w_j r'_j).
  Eigen::VectorXd c(total);
  for (int k = 0; k < total; ++k) c[k] = rule.weights[k] / drdx[k];
  Eigen::MatrixXd t = 0.5 * deriv.transpose() * (c.asDiagonal() * deriv);
  const Eigen::VectorXd inv_sqrt = sqrt_w_.cwiseInverse();
  t = inv_sqrt.asDiagonal() * t * inv_sqrt.asDiagonal();
  t = 0.5 * (t + t.transpose()).eval();
  kinetic_ = std::make_shared<const Eigen::MatrixXd>(std::move(t));

  // D_ij = w_i l_j'(x_i) / sqrt(W_i W_j) with W = w r'; exact antisymmetry
  // follows from Lobatto exactness for (l_i l_j)'.
  Eigen::MatrixXd d(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      d(i, j) = rule.weights[i + 1] * deriv(i + 1, j) / (sqrt_w_[i] * sqrt_w_[j]);
    }
  }
  d = 0.5 * (d - d.transpose()).eval();
  derivative_ = std::make_shared<const Eigen::MatrixXd>(std::move(d));
}

double RadialGrid::map(double x) const {
  return scale_ * (1.0 + x) / (1.0 - x + map_param_);
}

double RadialGrid::integrate(const std::function<double(double)>& f) const {
  double sum = 0.0;
  for (std::size_t k = 0; k < r_all_.size(); ++k) sum += w_all_[k] * f(r_all_[k]);
  return sum;
}

double RadialGrid::max_spacing() const {
  double best = 0.0;
  for (std::size_t k = 1; k < r_all_.size(); ++k) {
    best = std::max(best, r_all_[k] - r_all_[k - 1]);
  }
  return best;
}

std::uint64_t RadialGrid::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  h = fnv1a(&n_, sizeof n_, h);
  h = fnv1a(&r_max_, sizeof r_max_, h);
  h = fnv1a(&map_param_, sizeof map_param_, h);
  return h;
}

RadialGrid build_grid(int n, double r_max, double map_param) {
  if (n < 16) throw config_error("radial grid: n must be >= 16");
  if (!(r_max > 0.0)) throw config_error("radial grid: r_max must be > 0");
  if (!(map_param > 0.0)) {
    throw config_error("radial grid: map_param must be > 0");
  }
  return RadialGrid(n, r_max, map_param);
}

RadialHamiltonian::RadialHamiltonian(int l, Eigen::VectorXd eigenvalues,
                                     Eigen::MatrixXd eigenvectors)
    : l_(l), values_(std::move(eigenvalues)), vectors_(std::move(eigenvectors)),
      bound_count_(static_cast<int>((values_.array() < 0.0).count())) {}

Eigen::MatrixXd hamiltonian_matrix(const RadialGrid& grid, int l) {
  Eigen::MatrixXd h = grid.kinetic();
  const auto& r = grid.nodes();
  const double l2 = l * (l + 1.0);
  for (int j = 0; j < grid.size(); ++j) {
    h(j, j) += 0.5 * l2 / (r[j] * r[j]) - 1.0 / r[j];
  }
  return h;
}

RadialHamiltonian build_hamiltonian(const RadialGrid& grid, int l) {
  if (l < 0) throw config_error("radial hamiltonian: negative l");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
      hamiltonian_matrix(grid, l));
  if (solver.info() != Eigen::Success) {
    throw numerical_error("radial hamiltonian: eigensolver failed");
  }
  Eigen::MatrixXd vectors = solver.eigenvectors();
  for (Eigen::Index c = 0; c < vectors.cols(); ++c) {
    normalize_sign(vectors.col(c));
  }
  return RadialHamiltonian(l, solver.eigenvalues(), std::move(vectors));
}

std::filesystem::path hamiltonian_cache_file(const std::filesystem::path& dir,
                                             const RadialGrid& grid, int l) {
  std::ostringstream name;
  name << "eig_n" << grid.size() << "_r" << grid.r_max() << "_a"
       << grid.map_param() << "_l" << l << ".bin";
  return dir / name.str();
}

std::optional<RadialHamiltonian> load_hamiltonian(
    const std::filesystem::path& file, const RadialGrid& grid, int l) {
  std::ifstream in(file, std::ios::binary);
  if (!in) return std::nullopt;
  char magic[8];
  std::uint32_t version = 0;
  std::int32_t n = 0, ll = 0;
  double r_max = 0, a = 0;
  in.read(magic, 8);
  in.read(reinterpret_cast<char*>(&version), sizeof version);
  in.read(reinterpret_cast<char*>(&n), sizeof n);
  in.read(reinterpret_cast<char*>(&r_max), sizeof r_max);
  in.read(reinterpret_cast<char*>(&a), sizeof a);
  in.read(reinterpret_cast<char*>(&ll), sizeof ll);
  if (!in || std::memcmp(magic, kCacheMagic, 8) != 0 ||
      version != kCacheVersion || n != grid.size() || r_max != grid.r_max() ||
      a != grid.map_param() || ll != l) {
    return std::nullopt;
  }
  Eigen::VectorXd values(n);
  Eigen::MatrixXd vectors(n, n);
  in.read(reinterpret_cast<char*>(values.data()), sizeof(double) * n);
  in.read(reinterpret_cast<char*>(vectors.data()),
          sizeof(double) * static_cast<std::size_t>(n) * n);
  if (!in) return std::nullopt;
  return RadialHamiltonian(l, std::move(values), std::move(vectors));
}

void save_hamiltonian(const std::filesystem::path& file,
                      const RadialGrid& grid, const RadialHamiltonian& h) {
  const auto tmp = std::filesystem::path(file).concat(".tmp");
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw io_error("cannot write eigen cache " + tmp.string());
    const std::int32_t n = grid.size();
    const std::int32_t l = h.l();
    const double r_max = grid.r_max();
    const double a = grid.map_param();
    out.write(kCacheMagic, 8);
    out.write(reinterpret_cast<const char*>(&kCacheVersion), sizeof kCacheVersion);
    out.write(reinterpret_cast<const char*>(&n), sizeof n);
    out.write(reinterpret_cast<const char*>(&r_max), sizeof r_max);
    out.write(reinterpret_cast<const char*>(&a), sizeof a);
    out.write(reinterpret_cast<const char*>(&l), sizeof l);
    out.write(reinterpret_cast<const char*>(h.eigenvalues().data()),
              sizeof(double) * n);
    out.write(reinterpret_cast<const char*>(h.eigenvectors().data()),
              sizeof(double) * static_cast<std::size_t>(n) * n);
    if (!out) throw io_error("failed writing eigen cache " + tmp.string());
  }
  std::filesystem::rename(tmp, file);
}

std::vector<RadialHamiltonian> build_hamiltonians(
    const RadialGrid& grid, int l_max,
    const std::optional<std::filesystem::path>& cache_dir) {
  if (l_max < 0) throw config_error("radial hamiltonian: negative l_max");
  if (cache_dir) std::filesystem::create_directories(*cache_dir);
  std::vector<std::optional<RadialHamiltonian>> slots(l_max + 1);
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
  for (int l = 0; l <= l_max; ++l) {
    try {
      if (cache_dir) {
        const auto file = hamiltonian_cache_file(*cache_dir, grid, l);
        slots[l] = load_hamiltonian(file, grid, l);
        if (!slots[l]) {
          slots[l] = build_hamiltonian(grid, l);
          save_hamiltonian(file, grid, *slots[l]);
        }
      } else {
        slots[l] = build_hamiltonian(grid, l);
      }
    } catch (...) {
#pragma omp critical
      failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  std::vector<RadialHamiltonian> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace sfion
