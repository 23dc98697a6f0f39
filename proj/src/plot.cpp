#include "spinmech/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <vector>

#include "spinmech/errors.hpp"

namespace spinmech {

namespace {

constexpr double kW = 760, kH = 540;
constexpr double kL = 90, kR = 150, kT = 50, kB = 70;

std::string fmt_g(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", x);
  return buf;
}

std::string axis_label(const ResultTable& t, std::size_t col) {
  return t.columns[col] + " [" + t.units[col] + "]";
}

std::size_t column_index(const ResultTable& t, const std::string& name) {
  for (std::size_t c = 0; c < t.columns.size(); ++c)
    if (t.columns[c] == name) return c;
  throw PreconditionError("plot column '" + name + "' missing from table");
}

struct Range {
  double lo = 0.0, hi = 1.0;
};

Range finite_range(const std::vector<double>& v) {
  Range r{std::numeric_limits<double>::infinity(),
          -std::numeric_limits<double>::infinity()};
  for (double x : v)
    if (std::isfinite(x)) {
      r.lo = std::min(r.lo, x);
      r.hi = std::max(r.hi, x);
    }
  if (!(r.lo <= r.hi)) return {0.0, 1.0};
  if (r.lo == r.hi) {
    const double pad = 0.5 * std::abs(r.lo) + 1.0;
    return {r.lo - pad, r.hi + pad};
  }
  return r;
}

// Three-stop perceptual-ish ramp, dark purple -> teal -> yellow.
std::string ramp_color(double t) {
  static const double stops[3][3] = {
      {68, 1, 84}, {33, 145, 140}, {253, 231, 37}};
  t = std::clamp(t, 0.0, 1.0);
  const int seg = t < 0.5 ? 0 : 1;
  const double u = (t - 0.5 * seg) * 2.0;
  char buf[16];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x",
                static_cast<int>(std::lround(
                    stops[seg][0] + u * (stops[seg + 1][0] - stops[seg][0]))),
                static_cast<int>(std::lround(
                    stops[seg][1] + u * (stops[seg + 1][1] - stops[seg][1]))),
                static_cast<int>(std::lround(
                    stops[seg][2] + u * (stops[seg + 1][2] - stops[seg][2]))));
  return buf;
}

void open_svg(std::ostringstream& svg, const ResultTable& t) {
  char fp[32];
  std::snprintf(fp, sizeof(fp), "0x%016llx",
                static_cast<unsigned long long>(t.fingerprint));
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW
      << "\" height=\"" << kH << "\" viewBox=\"0 0 " << kW << " " << kH
      << "\">\n";
  svg << "<rect width=\"" << kW << "\" height=\"" << kH
      << "\" fill=\"white\"/>\n";
  svg << "<text x=\"" << kL << "\" y=\"28\" font-family=\"sans-serif\" "
         "font-size=\"16\">"
      << kind_name(t.kind) << " (" << fp << ")</text>\n";
}

void draw_axes(std::ostringstream& svg, const std::string& xlabel,
               const std::string& ylabel, const Range& xr, const Range& yr) {
  svg << "<rect x=\"" << kL << "\" y=\"" << kT << "\" width=\""
      << (kW - kL - kR) << "\" height=\"" << (kH - kT - kB)
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  svg << "<text x=\"" << (kL + (kW - kL - kR) / 2) << "\" y=\"" << (kH - 18)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"14\">"
      << xlabel << "</text>\n";
  svg << "<text x=\"22\" y=\"" << (kT + (kH - kT - kB) / 2)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"14\" transform=\"rotate(-90 22 "
      << (kT + (kH - kT - kB) / 2) << ")\">" << ylabel << "</text>\n";
  svg << "<text x=\"" << kL << "\" y=\"" << (kH - kB + 18)
      << "\" font-family=\"sans-serif\" font-size=\"11\">" << fmt_g(xr.lo)
      << "</text>\n";
  svg << "<text x=\"" << (kW - kR) << "\" y=\"" << (kH - kB + 18)
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
         "font-size=\"11\">"
      << fmt_g(xr.hi) << "</text>\n";
  svg << "<text x=\"" << (kL - 6) << "\" y=\"" << (kH - kB)
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
         "font-size=\"11\">"
      << fmt_g(yr.lo) << "</text>\n";
  svg << "<text x=\"" << (kL - 6) << "\" y=\"" << (kT + 12)
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
         "font-size=\"11\">"
      << fmt_g(yr.hi) << "</text>\n";
}

std::string heatmap_svg(const ResultTable& t, std::size_t xc, std::size_t yc,
                        std::size_t zc) {
  std::set<double> xset, yset;
  for (const auto& row : t.rows) {
    xset.insert(row[xc]);
    yset.insert(row[yc]);
  }
  const std::vector<double> xs(xset.begin(), xset.end());
  const std::vector<double> ys(yset.begin(), yset.end());
  std::vector<double> zvals;
  zvals.reserve(t.rows.size());
  for (const auto& row : t.rows) zvals.push_back(row[zc]);
  const Range zr = finite_range(zvals);

  std::ostringstream svg;
  open_svg(svg, t);
  draw_axes(svg, axis_label(t, xc), axis_label(t, yc),
            {xs.front(), xs.back()}, {ys.front(), ys.back()});

  const double cw = (kW - kL - kR) / xs.size();
  const double ch = (kH - kT - kB) / ys.size();
  auto index_of = [](const std::vector<double>& v, double x) {
    return static_cast<std::size_t>(
        std::lower_bound(v.begin(), v.end(), x) - v.begin());
  };
  for (const auto& row : t.rows) {
    const std::size_t ix = index_of(xs, row[xc]);
    const std::size_t iy = index_of(ys, row[yc]);
    const double z = row[zc];
    const std::string color =
        std::isfinite(z)
            ? ramp_color((z - zr.lo) / std::max(zr.hi - zr.lo, 1e-300))
            : std::string("#bbbbbb");
    svg << "<rect x=\"" << (kL + ix * cw) << "\" y=\""
        << (kH - kB - (iy + 1) * ch) << "\" width=\"" << cw << "\" height=\""
        << ch << "\" fill=\"" << color << "\"/>\n";
  }
  // color scale
  const double bx = kW - kR + 30;
  for (int i = 0; i < 24; ++i) {
    svg << "<rect x=\"" << bx << "\" y=\""
        << (kH - kB - (i + 1) * (kH - kT - kB) / 24.0) << "\" width=\"18\" "
        << "height=\"" << ((kH - kT - kB) / 24.0 + 0.5) << "\" fill=\""
        << ramp_color((i + 0.5) / 24.0) << "\"/>\n";
  }
  svg << "<text x=\"" << (bx + 24) << "\" y=\"" << (kH - kB)
      << "\" font-family=\"sans-serif\" font-size=\"11\">" << fmt_g(zr.lo)
      << "</text>\n";
  svg << "<text x=\"" << (bx + 24) << "\" y=\"" << (kT + 12)
      << "\" font-family=\"sans-serif\" font-size=\"11\">" << fmt_g(zr.hi)
      << "</text>\n";
  svg << "<text x=\"" << bx << "\" y=\"" << (kT - 6)
      << "\" font-family=\"sans-serif\" font-size=\"12\">"
      << axis_label(t, zc) << "</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

std::string line_svg(const ResultTable& t, std::size_t xc,
                     const std::vector<std::size_t>& ycols) {
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};
  std::vector<double> xs, all_y;
  for (const auto& row : t.rows) xs.push_back(row[xc]);
  for (std::size_t yc : ycols)
    for (const auto& row : t.rows)
      if (std::isfinite(row[yc])) all_y.push_back(row[yc]);
  const Range xr = finite_range(xs);
  const Range yr = finite_range(all_y);

  auto px = [&](double x) {
    return kL + (x - xr.lo) / (xr.hi - xr.lo) * (kW - kL - kR);
  };
  auto py = [&](double y) {
    return kH - kB - (y - yr.lo) / (yr.hi - yr.lo) * (kH - kT - kB);
  };

  std::ostringstream svg;
  open_svg(svg, t);
  std::string ylabel = axis_label(t, ycols[0]);
  if (ycols.size() > 1) ylabel = "[" + t.units[ycols[0]] + "]";
  draw_axes(svg, axis_label(t, xc), ylabel, xr, yr);

  for (std::size_t s = 0; s < ycols.size(); ++s) {
    const std::size_t yc = ycols[s];
    const char* color = palette[s % 4];
    std::ostringstream points;
    bool in_segment = false;
    auto flush = [&] {
      if (in_segment)
        svg << "<polyline fill=\"none\" stroke=\"" << color
            << "\" stroke-width=\"1.5\" points=\"" << points.str()
            << "\"/>\n";
      points.str("");
      in_segment = false;
    };
    for (const auto& row : t.rows) {
      if (!std::isfinite(row[xc]) || !std::isfinite(row[yc])) {
        flush();
        continue;
      }
      points << px(row[xc]) << "," << py(row[yc]) << " ";
      in_segment = true;
    }
    flush();
    svg << "<text x=\"" << (kW - kR + 16) << "\" y=\"" << (kT + 20 + 18 * s)
        << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"" << color
        << "\">" << t.columns[yc] << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

bool full_grid(const ResultTable& t, std::size_t xc, std::size_t yc) {
  std::set<double> xset, yset;
  for (const auto& row : t.rows) {
    xset.insert(row[xc]);
    yset.insert(row[yc]);
  }
  return xset.size() > 1 && yset.size() > 1 &&
         xset.size() * yset.size() == t.rows.size();
}

}  // namespace

std::string write_plot(const ResultTable& t, const std::string& dir) {
  if (t.rows.empty())
    throw PreconditionError("refusing to plot an empty result table");

  std::string body;
  switch (t.kind) {
    case ExperimentKind::eigen_map: {
      const auto x = column_index(t, "Omega_R"), y = column_index(t, "delta_nu"),
                 z = column_index(t, "shift_Hz");
      body = full_grid(t, x, y) ? heatmap_svg(t, x, y, z)
                                : line_svg(t, x, {z});
      break;
    }
    case ExperimentKind::threshold_map: {
      const auto x = column_index(t, "delta_r"), y = column_index(t, "delta_nu"),
                 z = column_index(t, "lambda_min");
      body = full_grid(t, x, y) ? heatmap_svg(t, x, y, z)
                                : line_svg(t, x, {z});
      break;
    }
    case ExperimentKind::gate_sweep: {
      const auto x = column_index(t, "lambda"), y = column_index(t, "delta_r"),
                 z = column_index(t, "fidelity");
      body = full_grid(t, x, y) ? heatmap_svg(t, x, y, z)
                                : line_svg(t, y, {z});
      break;
    }
    case ExperimentKind::shift_sweep:
      body = line_svg(t, column_index(t, "lambda"),
                      {column_index(t, "shift_sim"),
                       column_index(t, "shift_eigen"),
                       column_index(t, "shift_analytic")});
      break;
    case ExperimentKind::gamma_sweep:
      body = line_svg(t, column_index(t, "gamma_pct"),
                      {column_index(t, "fidelity")});
      break;
    case ExperimentKind::donor_coupling:
      body = line_svg(t, column_index(t, "distance"),
                      {column_index(t, "lambda_single"),
                       column_index(t, "lambda_ensemble")});
      break;
    case ExperimentKind::spectrum:
      body = line_svg(t, column_index(t, "omega"),
                      {column_index(t, "S_bar")});
      break;
  }

  const std::string path =
      (std::filesystem::path(dir) / (kind_name(t.kind) + ".svg")).string();
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw Error("cannot open for writing: " + path);
  file << body;
  if (!file) throw Error("write failed: " + path);
  return path;
}

}  // namespace spinmech
