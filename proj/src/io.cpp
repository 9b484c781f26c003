#include "sfion/io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

#include "sfion/error.hpp"

namespace sfion::io {

CsvTable::CsvTable(std::vector<std::string> header) : columns_(header.size()) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) text_ += ',';
    text_ += header[i];
  }
  text_ += '\n';
}

void CsvTable::add_row(const std::vector<double>& values) {
  if (values.size() != columns_) {
    throw precondition_error("csv row has the wrong number of columns");
  }
  char buf[32];
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) text_ += ',';
    std::snprintf(buf, sizeof buf, "%.17g", values[i]);
    text_ += buf;
  }
  text_ += '\n';
  ++rows_;
}

void CsvTable::write(const std::filesystem::path& file) const { write_file(file, text_); }

CsvTable amplitudes_table(const PartialWaveAmplitudes& amps) {
  CsvTable t({"k", "l", "re_a", "im_a"});
  for (std::size_t ik = 0; ik < amps.k().size(); ++ik) {
    for (int l = 0; l <= amps.l_max(); ++l) {
      const auto a = amps(ik, l);
      t.add_row({amps.k()[ik], double(l), a.real(), a.imag()});
    }
  }
  return t;
}

CsvTable spectrum_table(const PartialWaveAmplitudes& amps) {
  CsvTable t({"k", "dP_dk"});
  const auto s = amps.spectrum();
  for (std::size_t ik = 0; ik < s.size(); ++ik) t.add_row({amps.k()[ik], s[ik]});
  return t;
}

CsvTable map_table(const MomentumMap& map) {
  CsvTable t({"k_z", "k_rho", "density"});
  for (std::size_t ir = 0; ir < map.k_rho.size(); ++ir) {
    for (std::size_t iz = 0; iz < map.k_z.size(); ++iz) {
      t.add_row({map.k_z[iz], map.k_rho[ir], map.density(ir, iz)});
    }
  }
  return t;
}

CsvTable cut_table(const AngularCut& cut) {
  CsvTable t({"cos_theta", "density", "fit"});
  for (std::size_t i = 0; i < cut.cos_theta.size(); ++i) {
    t.add_row({cut.cos_theta[i], cut.density[i], cut.fit[i]});
  }
  return t;
}

CsvTable rings_table(const PartialWaveAmplitudes& amps,
                     const std::vector<RingSpec>& rings) {
  CsvTable t({"ring", "k_lo", "k_peak", "k_hi", "l", "p_l"});
  for (const auto& ring : rings) {
    const auto p = ring_partial_probability(amps, ring);
    for (std::size_t l = 0; l < p.size(); ++l) {
      t.add_row({double(ring.index), ring.k_lo, ring.k_peak, ring.k_hi, double(l), p[l]});
    }
  }
  return t;
}

CsvTable records_table(const std::vector<ctmc::TrajectoryRecord>& records) {
  CsvTable t({"t_i", "z_exit", "v_perp", "E", "L", "k_z", "k_rho", "r_min", "flag",
              "axis_angle", "opening_angle"});
  for (const auto& r : records) {
    t.add_row({r.event.time, r.event.z_exit, r.event.v_perp, r.energy,
               r.angular_momentum, r.k_z, r.k_rho, r.r_min, double(int(r.status)),
               r.axis_angle, r.opening_angle});
  }
  return t;
}

CsvTable histogram_table(const std::vector<double>& histogram) {
  CsvTable t({"l", "weight"});
  for (std::size_t l = 0; l < histogram.size(); ++l) t.add_row({double(l), histogram[l]});
  return t;
}

std::array<unsigned char, 3> colormap(double t) {
  static constexpr std::array<std::array<double, 3>, 5> stops = {{
      {0, 0, 0}, {20, 30, 140}, {200, 30, 40}, {250, 220, 40}, {255, 255, 255}}};
  t = std::clamp(std::isfinite(t) ? t : 0.0, 0.0, 1.0);
  const double x = t * 4.0;
  const int i = std::min(3, static_cast<int>(x));
  const double f = x - i;
  std::array<unsigned char, 3> rgb{};
  for (int c = 0; c < 3; ++c) {
    rgb[c] = static_cast<unsigned char>(
        std::lround(stops[i][c] + f * (stops[i + 1][c] - stops[i][c])));
  }
  return rgb;
}

std::vector<unsigned char> render_heatmap(const MomentumMap& map, ColorScale scale) {
  const auto height = map.density.rows();
  const auto width = map.density.cols();
  if (height == 0 || width == 0) throw precondition_error("heatmap: map is empty");
  const double top = map.density.maxCoeff();
  const std::string header = "P6\n" + std::to_string(width) + " " +
                             std::to_string(height) + "\n255\n";
  std::vector<unsigned char> out(header.begin(), header.end());
  out.reserve(out.size() + 3 * width * height);
  for (Eigen::Index row = height - 1; row >= 0; --row) {
    for (Eigen::Index col = 0; col < width; ++col) {
      const double v = map.density(row, col);
      double t = 0.0;
      if (top > 0.0) {
        t = scale == ColorScale::linear
                ? v / top
                : (std::log10(std::max(v / top, 1e-6)) + 6.0) / 6.0;
      }
      const auto rgb = colormap(t);
      out.insert(out.end(), rgb.begin(), rgb.end());
    }
  }
  return out;
}

void write_heatmap(const MomentumMap& map, ColorScale scale,
                   const std::filesystem::path& file) {
  const auto bytes = render_heatmap(map, scale);
  write_file(file, {reinterpret_cast<const char*>(bytes.data()), bytes.size()});
}

namespace {

struct DigestDeleter {
  void operator()(EVP_MD_CTX* ctx) const { EVP_MD_CTX_free(ctx); }
};

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new()) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1) {
      throw io_error("sha256: digest initialization failed");
    }
  }
  void update(const void* data, std::size_t size) {
    if (EVP_DigestUpdate(ctx_.get(), data, size) != 1) {
      throw io_error("sha256: digest update failed");
    }
  }
  std::string hex() {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(ctx_.get(), md, &len) != 1) {
      throw io_error("sha256: digest finalization failed");
    }
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
      out += digits[md[i] >> 4];
      out += digits[md[i] & 15];
    }
    return out;
  }

 private:
  std::unique_ptr<EVP_MD_CTX, DigestDeleter> ctx_;
};

}  // namespace

std::string sha256(std::string_view bytes) {
  Sha256 h;
  h.update(bytes.data(), bytes.size());
  return h.hex();
}

std::string sha256_file(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw io_error("cannot read " + file.string());
  Sha256 h;
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    h.update(buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  return h.hex();
}

void write_file(const std::filesystem::path& file, std::string_view bytes) {
  std::error_code ec;
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path(), ec);
  if (ec) throw io_error("cannot create directory for " + file.string() + ": " + ec.message());
  auto tmp = file;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error("cannot write " + file.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw io_error("write failed for " + file.string());
  }
  std::filesystem::rename(tmp, file, ec);
  if (ec) throw io_error("cannot rename into " + file.string() + ": " + ec.message());
}

}  // namespace sfion::io
