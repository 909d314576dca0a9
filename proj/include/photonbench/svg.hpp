#pragma once

// Minimal standalone SVG charts for convergence curves and final-fitness
// box plots.

#include <filesystem>
#include <string>
#include <vector>

namespace photonbench {

struct ChartOptions {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_y = false;
  int width = 760;
  int height = 480;
};

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct BoxData {
  std::string label;
  std::vector<double> values;
};

/// Tukey box: quartiles by linear interpolation, whiskers at the most
/// extreme points within 1.5 IQR.
struct BoxStats {
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double whisker_low = 0.0;
  double whisker_high = 0.0;
  std::vector<double> outliers;
};

BoxStats box_stats(std::vector<double> values);
double quantile(std::vector<double> values, double q);

std::string render_line_chart(const std::vector<Series>& series, const ChartOptions& options);
std::string render_box_plot(const std::vector<BoxData>& boxes, const ChartOptions& options);

/// Reads <dir>/<instance>/<algorithm>/run_*.csv and writes, per instance,
/// convergence_<instance>.svg/.csv and boxplot_<instance>.svg/.csv into dir.
/// Returns the SVG paths; throws std::runtime_error when no runs are found.
std::vector<std::filesystem::path> plot_results(const std::filesystem::path& dir, bool log_y);

}  // namespace photonbench
