#pragma once

// Output helpers: shortest round-trip number formatting, atomic file
// writes, CSV rows for curves and free energies, and SVG path drawings.

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "ipdsaw/entropy.hpp"
#include "ipdsaw/free_energy.hpp"
#include "ipdsaw/lattice.hpp"

namespace ipdsaw {

/// Shortest representation that parses back to the same double.
inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  if (res.ec != std::errc{}) throw std::runtime_error("number formatting failed");
  return std::string(buf, res.ptr);
}

/// Writes via a sibling temporary file and rename, so readers never see
/// a partial file.
inline void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("write to " + tmp.string() + " failed");
  }
  std::filesystem::rename(tmp, path);
}

inline constexpr std::string_view kEntropyCsvHeader = "beta,alpha_num,alpha_den,N,g_N,g_est,gap";
inline constexpr std::string_view kFreeEnergyCsvHeader = "model,beta,L_or_inf,f,f_excess,alpha_star,phase";

inline std::string entropy_csv(const EntropyCurve& curve) {
  std::string out(kEntropyCsvHeader);
  out += '\n';
  for (const auto& p : curve.points) {
    out += format_double(curve.beta) + ',' + std::to_string(p.alpha.num) + ',' + std::to_string(p.alpha.den) + ',' +
           std::to_string(p.n) + ',' + format_double(p.g_n) + ',' + format_double(p.g_est) + ',' +
           format_double(p.gap) + '\n';
  }
  return out;
}

inline std::string free_energy_csv_row(const FreeEnergyPoint& p) {
  std::string row(to_string(p.model));
  row += ',' + format_double(p.beta) + ',' + (p.length ? std::to_string(*p.length) : std::string("inf")) + ',' +
         format_double(p.f) + ',' + format_double(p.f_excess) + ',';
  row += p.length ? std::string() : format_double(p.alpha_star);
  row += ',';
  if (p.phase) row += to_string(*p.phase);
  row += '\n';
  return row;
}

struct SvgStyle {
  int cell = 24;
  int margin = 16;
};

/// Unit-grid drawing of a path; bonds between self-touching vertex pairs
/// are drawn as shaded strokes.
inline std::string render_svg(const LatticePath& path, SvgStyle style = {}, std::string_view title = {}) {
  const auto& w = path.vertices();
  int x_lo = 0, x_hi = 0, y_lo = 0, y_hi = 0;
  for (const auto& v : w) {
    x_lo = std::min(x_lo, v.x);
    x_hi = std::max(x_hi, v.x);
    y_lo = std::min(y_lo, v.y);
    y_hi = std::max(y_hi, v.y);
  }
  const int width = (x_hi - x_lo) * style.cell + 2 * style.margin;
  const int height = (y_hi - y_lo) * style.cell + 2 * style.margin;
  auto px = [&](int x) { return (x - x_lo) * style.cell + style.margin; };
  auto py = [&](int y) { return (y_hi - y) * style.cell + style.margin; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
  if (!title.empty()) svg << "<title>" << title << "</title>\n";
  svg << "<g stroke=\"#dddddd\" stroke-width=\"1\">\n";
  for (int x = x_lo; x <= x_hi; ++x)
    svg << "<line x1=\"" << px(x) << "\" y1=\"" << py(y_hi) << "\" x2=\"" << px(x) << "\" y2=\"" << py(y_lo)
        << "\"/>\n";
  for (int y = y_lo; y <= y_hi; ++y)
    svg << "<line x1=\"" << px(x_lo) << "\" y1=\"" << py(y) << "\" x2=\"" << px(x_hi) << "\" y2=\"" << py(y)
        << "\"/>\n";
  svg << "</g>\n<g stroke=\"#f4a261\" stroke-width=\"" << style.cell / 3 << "\" stroke-opacity=\"0.6\">\n";
  for (std::size_t i = 0; i < w.size(); ++i)
    for (std::size_t j = i + 2; j < w.size(); ++j)
      if (std::abs(w[i].x - w[j].x) + std::abs(w[i].y - w[j].y) == 1)
        svg << "<line class=\"touch\" x1=\"" << px(w[i].x) << "\" y1=\"" << py(w[i].y) << "\" x2=\"" << px(w[j].x)
            << "\" y2=\"" << py(w[j].y) << "\"/>\n";
  svg << "</g>\n<polyline fill=\"none\" stroke=\"#1d3557\" stroke-width=\"2\" points=\"";
  for (std::size_t i = 0; i < w.size(); ++i) svg << (i ? " " : "") << px(w[i].x) << ',' << py(w[i].y);
  svg << "\"/>\n<circle cx=\"" << px(0) << "\" cy=\"" << py(0) << "\" r=\"3\" fill=\"#e63946\"/>\n</svg>\n";
  return svg.str();
}

}  // namespace ipdsaw
