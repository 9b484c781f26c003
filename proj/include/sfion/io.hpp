#pragma once

// File emission: CSV tables (header row, 17 significant digits), binary PPM
// heatmaps and content hashes.

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "sfion/continuum.hpp"
#include "sfion/ctmc.hpp"

namespace sfion::io {

/// Rows of numbers under a header; every value printed with %.17g.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  void add_row(const std::vector<double>& values);
  std::size_t rows() const noexcept { return rows_; }
  const std::string& text() const noexcept { return text_; }
  void write(const std::filesystem::path& file) const;

 private:
  std::size_t columns_;
  std::size_t rows_ = 0;
  std::string text_;
};

/// (k, l, re_a, im_a)
CsvTable amplitudes_table(const PartialWaveAmplitudes& amps);
/// (k, dP_dk)
CsvTable spectrum_table(const PartialWaveAmplitudes& amps);
/// (k_z, k_rho, density)
CsvTable map_table(const MomentumMap& map);
/// (cos_theta, density, fit)
CsvTable cut_table(const AngularCut& cut);
/// (ring, k_lo, k_peak, k_hi, l, p_l)
CsvTable rings_table(const PartialWaveAmplitudes& amps,
                     const std::vector<RingSpec>& rings);
/// (t_i, z_exit, v_perp, E, L, k_z, k_rho, r_min, flag, axis_angle, opening_angle)
CsvTable records_table(const std::vector<ctmc::TrajectoryRecord>& records);
/// (l, weight)
CsvTable histogram_table(const std::vector<double>& histogram);

enum class ColorScale { linear, log };

/// Colormap on t in [0, 1]: piecewise linear through black (0), dark blue
/// (0.25), red (0.5), yellow (0.75) and white (1).
std::array<unsigned char, 3> colormap(double t);

/// Binary PPM (P6) of map.density: k_z left to right, k_rho bottom to top.
/// Linear scale maps [0, max] to [0, 1]; log scale maps
/// [1e-6 max, max] to [0, 1] and clamps below. An all-zero map renders in
/// the lowest color.
std::vector<unsigned char> render_heatmap(const MomentumMap& map, ColorScale scale);
void write_heatmap(const MomentumMap& map, ColorScale scale,
                   const std::filesystem::path& file);

/// Lower-case hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& file);
std::string sha256(std::string_view bytes);

/// Writes bytes atomically (temporary file then rename); I/O errors name the path.
void write_file(const std::filesystem::path& file, std::string_view bytes);

}  // namespace sfion::io
