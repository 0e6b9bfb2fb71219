#include "decaykit/plot.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "decaykit/csv.hpp"
#include "decaykit/error.hpp"

namespace decaykit {

namespace {

std::string fmt(double v) {
  // fixed precision keeps coordinates compact and deterministic
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string fmt_tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

}  // namespace

SvgPlot::SvgPlot(std::string title, std::string x_label, std::string y_label, int width,
                 int height)
    : title_(std::move(title)),
      x_label_(std::move(x_label)),
      y_label_(std::move(y_label)),
      width_(width),
      height_(height),
      x_min_(0.0),
      x_max_(1.0),
      y_min_(0.0),
      y_max_(1.0) {}

void SvgPlot::grow_bounds(double x, double y) {
  if (!std::isfinite(x) || !std::isfinite(y)) return;
  if (!has_data_) {
    x_min_ = x_max_ = x;
    y_min_ = y_max_ = y;
    has_data_ = true;
    return;
  }
  x_min_ = std::min(x_min_, x);
  x_max_ = std::max(x_max_, x);
  y_min_ = std::min(y_min_, y);
  y_max_ = std::max(y_max_, y);
}

void SvgPlot::add_scatter(const Points& pts, const std::string& color, double radius, bool open) {
  for (const auto& [x, y] : pts) grow_bounds(x, y);
  scatters_.push_back({pts, color, radius, open});
}

void SvgPlot::add_line(const Points& pts, const std::string& color, bool dashed,
                       double stroke_width) {
  for (const auto& [x, y] : pts) grow_bounds(x, y);
  lines_.push_back({pts, color, dashed, stroke_width});
}

void SvgPlot::add_band(const std::vector<double>& x, const std::vector<double>& lo,
                       const std::vector<double>& hi, const std::string& color, double opacity) {
  require(x.size() == lo.size() && x.size() == hi.size(), "SvgPlot::add_band: length mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) {
    grow_bounds(x[i], lo[i]);
    grow_bounds(x[i], hi[i]);
  }
  bands_.push_back({x, lo, hi, color, opacity});
}

void SvgPlot::add_labelled_point(double x, double y, const std::string& label,
                                 const std::string& color) {
  grow_bounds(x, y);
  labelled_.push_back({x, y, label, color});
}

std::string SvgPlot::render() const {
  const double ml = 64, mr = 20, mt = 36, mb = 48;  // margins
  const double pw = width_ - ml - mr;
  const double ph = height_ - mt - mb;
  double x_lo = x_min_, x_hi = x_max_, y_lo = y_min_, y_hi = y_max_;
  if (x_hi <= x_lo) x_hi = x_lo + 1.0;
  if (y_hi <= y_lo) y_hi = y_lo + 1.0;
  const double x_pad = 0.04 * (x_hi - x_lo);
  const double y_pad = 0.06 * (y_hi - y_lo);
  x_lo -= x_pad;
  x_hi += x_pad;
  y_lo -= y_pad;
  y_hi += y_pad;

  auto px = [&](double x) { return ml + (x - x_lo) / (x_hi - x_lo) * pw; };
  auto py = [&](double y) { return mt + ph - (y - y_lo) / (y_hi - y_lo) * ph; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width_ << "\" height=\""
      << height_ << "\" viewBox=\"0 0 " << width_ << " " << height_ << "\">\n";
  svg << "<rect width=\"" << width_ << "\" height=\"" << height_ << "\" fill=\"white\"/>\n";
  svg << "<text x=\"" << width_ / 2 << "\" y=\"20\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"14\">" << title_ << "</text>\n";

  for (const Band& band : bands_) {
    svg << "<polygon fill=\"" << band.color << "\" fill-opacity=\"" << band.opacity
        << "\" stroke=\"none\" points=\"";
    for (std::size_t i = 0; i < band.x.size(); ++i) {
      svg << fmt(px(band.x[i])) << "," << fmt(py(band.hi[i])) << " ";
    }
    for (std::size_t i = band.x.size(); i-- > 0;) {
      svg << fmt(px(band.x[i])) << "," << fmt(py(band.lo[i])) << " ";
    }
    svg << "\"/>\n";
  }

  // axes
  svg << "<line x1=\"" << fmt(ml) << "\" y1=\"" << fmt(mt + ph) << "\" x2=\"" << fmt(ml + pw)
      << "\" y2=\"" << fmt(mt + ph) << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << fmt(ml) << "\" y1=\"" << fmt(mt) << "\" x2=\"" << fmt(ml) << "\" y2=\""
      << fmt(mt + ph) << "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 5; ++t) {
    const double fx = x_lo + (x_hi - x_lo) * t / 5.0;
    const double fy = y_lo + (y_hi - y_lo) * t / 5.0;
    svg << "<line x1=\"" << fmt(px(fx)) << "\" y1=\"" << fmt(mt + ph) << "\" x2=\"" << fmt(px(fx))
        << "\" y2=\"" << fmt(mt + ph + 5) << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << fmt(px(fx)) << "\" y=\"" << fmt(mt + ph + 18)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">" << fmt_tick(fx)
        << "</text>\n";
    svg << "<line x1=\"" << fmt(ml - 5) << "\" y1=\"" << fmt(py(fy)) << "\" x2=\"" << fmt(ml)
        << "\" y2=\"" << fmt(py(fy)) << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << fmt(ml - 8) << "\" y=\"" << fmt(py(fy) + 3)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" << fmt_tick(fy)
        << "</text>\n";
  }
  svg << "<text x=\"" << fmt(ml + pw / 2) << "\" y=\"" << fmt(mt + ph + 36)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << x_label_
      << "</text>\n";
  svg << "<text x=\"16\" y=\"" << fmt(mt + ph / 2)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 16 "
      << fmt(mt + ph / 2) << ")\">" << y_label_ << "</text>\n";

  for (const Line& line : lines_) {
    svg << "<polyline fill=\"none\" stroke=\"" << line.color << "\" stroke-width=\""
        << line.stroke_width << "\"";
    if (line.dashed) svg << " stroke-dasharray=\"6,4\"";
    svg << " points=\"";
    for (const auto& [x, y] : line.pts) svg << fmt(px(x)) << "," << fmt(py(y)) << " ";
    svg << "\"/>\n";
  }
  for (const Scatter& sc : scatters_) {
    for (const auto& [x, y] : sc.pts) {
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      svg << "<circle cx=\"" << fmt(px(x)) << "\" cy=\"" << fmt(py(y)) << "\" r=\"" << sc.radius
          << "\" fill=\"" << (sc.open ? "none" : sc.color) << "\" stroke=\"" << sc.color
          << "\"/>\n";
    }
  }
  for (const Labelled& lp : labelled_) {
    svg << "<rect x=\"" << fmt(px(lp.x) - 4) << "\" y=\"" << fmt(py(lp.y) - 4)
        << "\" width=\"8\" height=\"8\" fill=\"" << lp.color << "\"/>\n";
    svg << "<text x=\"" << fmt(px(lp.x) + 7) << "\" y=\"" << fmt(py(lp.y) + 4)
        << "\" font-family=\"sans-serif\" font-size=\"10\" fill=\"" << lp.color << "\">"
        << lp.label << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

void SvgPlot::save(const std::string& path) const { write_text_file(path, render()); }

}  // namespace decaykit
