#pragma once

#include <string>
#include <utility>
#include <vector>

namespace decaykit {

// Minimal SVG scatter/line/band plotter for decay-curve figures. No
// dependency, deterministic output.
class SvgPlot {
 public:
  using Points = std::vector<std::pair<double, double>>;

  SvgPlot(std::string title, std::string x_label, std::string y_label, int width = 760,
          int height = 520);

  void add_scatter(const Points& pts, const std::string& color, double radius = 3.0,
                   bool open = false);
  void add_line(const Points& pts, const std::string& color, bool dashed = false,
                double stroke_width = 1.5);
  /// Shaded region between two curves sharing x coordinates.
  void add_band(const std::vector<double>& x, const std::vector<double>& lo,
                const std::vector<double>& hi, const std::string& color, double opacity = 0.2);
  /// Square marker with a text label beside it.
  void add_labelled_point(double x, double y, const std::string& label, const std::string& color);

  std::string render() const;
  void save(const std::string& path) const;

 private:
  struct Scatter {
    Points pts;
    std::string color;
    double radius;
    bool open;
  };
  struct Line {
    Points pts;
    std::string color;
    bool dashed;
    double stroke_width;
  };
  struct Band {
    std::vector<double> x, lo, hi;
    std::string color;
    double opacity;
  };
  struct Labelled {
    double x, y;
    std::string label;
    std::string color;
  };

  void grow_bounds(double x, double y);

  std::string title_, x_label_, y_label_;
  int width_, height_;
  double x_min_, x_max_, y_min_, y_max_;
  bool has_data_ = false;
  std::vector<Scatter> scatters_;
  std::vector<Line> lines_;
  std::vector<Band> bands_;
  std::vector<Labelled> labelled_;
};

}  // namespace decaykit
