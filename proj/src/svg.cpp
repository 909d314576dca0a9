#include "photonbench/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <stdexcept>

#include <fmt/format.h>

#include "photonbench/metrics.hpp"

namespace photonbench {

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Frame {
  double left = 80, right = 170, top = 40, bottom = 60;
  double width, height;
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  bool log_y = false;

  double px(double x) const { return left + (x - x0) / (x1 - x0) * (width - left - right); }
  double py(double y) const {
    const double v = log_y ? std::log10(y) : y;
    return height - bottom - (v - y0) / (y1 - y0) * (height - top - bottom);
  }
};

void widen(double& lo, double& hi) {
  if (!(hi > lo)) {
    const double pad = lo == 0.0 ? 1.0 : std::abs(lo) * 0.1;
    lo -= pad;
    hi += pad;
  }
}

std::string header(const ChartOptions& o) {
  return fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\" "
      "font-family=\"sans-serif\" font-size=\"12\">\n"
      "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      "<text x=\"{2}\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">{3}</text>\n",
      o.width, o.height, o.width / 2, escape(o.title));
}

std::string axes(const Frame& f, const ChartOptions& o, bool numeric_x) {
  std::string s;
  const double xa = f.left, xb = f.width - f.right, ya = f.top, yb = f.height - f.bottom;
  s += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n", xa, ya,
                   xb - xa, yb - ya);
  for (int t = 0; t <= 5; ++t) {
    const double v = f.y0 + (f.y1 - f.y0) * t / 5.0;
    const double y = yb - (yb - ya) * t / 5.0;
    const double label = f.log_y ? std::pow(10.0, v) : v;
    s += fmt::format("<line x1=\"{}\" y1=\"{:.2f}\" x2=\"{}\" y2=\"{:.2f}\" stroke=\"#ddd\"/>\n", xa, y, xb, y);
    s += fmt::format("<text x=\"{}\" y=\"{:.2f}\" text-anchor=\"end\">{:.3g}</text>\n", xa - 6, y + 4, label);
  }
  if (numeric_x)
    for (int t = 0; t <= 5; ++t) {
      const double v = f.x0 + (f.x1 - f.x0) * t / 5.0;
      s += fmt::format("<text x=\"{:.2f}\" y=\"{}\" text-anchor=\"middle\">{:.4g}</text>\n", f.px(v), yb + 18, v);
    }
  s += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", (xa + xb) / 2, f.height - 15,
                   escape(o.x_label));
  s += fmt::format("<text transform=\"translate(18 {}) rotate(-90)\" text-anchor=\"middle\">{}</text>\n", (ya + yb) / 2,
                   escape(o.y_label + (o.log_y ? " (log)" : "")));
  return s;
}

}  // namespace

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

BoxStats box_stats(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("box plot of an empty sample");
  std::sort(values.begin(), values.end());
  BoxStats b;
  b.q1 = quantile(values, 0.25);
  b.median = quantile(values, 0.5);
  b.q3 = quantile(values, 0.75);
  const double iqr = b.q3 - b.q1;
  const double lo_fence = b.q1 - 1.5 * iqr, hi_fence = b.q3 + 1.5 * iqr;
  b.whisker_low = b.q1;
  b.whisker_high = b.q3;
  for (double v : values) {
    if (v < lo_fence || v > hi_fence) {
      b.outliers.push_back(v);
      continue;
    }
    b.whisker_low = std::min(b.whisker_low, v);
    b.whisker_high = std::max(b.whisker_high, v);
  }
  return b;
}

std::string render_line_chart(const std::vector<Series>& series, const ChartOptions& options) {
  Frame f;
  f.width = options.width;
  f.height = options.height;
  f.log_y = options.log_y;
  double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo, ylo = xlo, yhi = -xlo;
  for (const auto& s : series)
    for (std::size_t k = 0; k < s.x.size(); ++k) {
      if (options.log_y && !(s.y[k] > 0.0)) continue;
      const double y = options.log_y ? std::log10(s.y[k]) : s.y[k];
      xlo = std::min(xlo, s.x[k]);
      xhi = std::max(xhi, s.x[k]);
      ylo = std::min(ylo, y);
      yhi = std::max(yhi, y);
    }
  if (!std::isfinite(xlo)) xlo = 0, xhi = 1, ylo = 0, yhi = 1;
  widen(xlo, xhi);
  widen(ylo, yhi);
  f.x0 = xlo, f.x1 = xhi, f.y0 = ylo, f.y1 = yhi;

  std::string svg = header(options) + axes(f, options, true);
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    const char* color = kPalette[i % std::size(kPalette)];
    std::string points;
    for (std::size_t k = 0; k < s.x.size(); ++k) {
      if (options.log_y && !(s.y[k] > 0.0)) continue;
      points += fmt::format("{:.2f},{:.2f} ", f.px(s.x[k]), f.py(s.y[k]));
    }
    svg += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>\n", color, points);
    const double ly = f.top + 16.0 * static_cast<double>(i) + 10.0;
    const double lx = f.width - f.right + 10.0;
    svg += fmt::format("<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{}\" stroke-width=\"2\"/>\n", lx, ly,
                       lx + 18, ly, color);
    svg += fmt::format("<text x=\"{}\" y=\"{}\">{}</text>\n", lx + 24, ly + 4, escape(s.label));
  }
  return svg + "</svg>\n";
}

std::string render_box_plot(const std::vector<BoxData>& boxes, const ChartOptions& options) {
  Frame f;
  f.width = options.width;
  f.height = options.height;
  f.log_y = options.log_y;
  double ylo = std::numeric_limits<double>::infinity(), yhi = -ylo;
  for (const auto& b : boxes)
    for (double v : b.values) {
      if (options.log_y && !(v > 0.0)) continue;
      const double y = options.log_y ? std::log10(v) : v;
      ylo = std::min(ylo, y);
      yhi = std::max(yhi, y);
    }
  if (!std::isfinite(ylo)) ylo = 0, yhi = 1;
  widen(ylo, yhi);
  f.x0 = 0.0;
  f.x1 = static_cast<double>(std::max<std::size_t>(boxes.size(), 1));
  f.y0 = ylo, f.y1 = yhi;

  auto py = [&](double v) { return f.py(options.log_y ? std::max(v, std::pow(10.0, ylo)) : v); };
  std::string svg = header(options) + axes(f, options, false);
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    if (boxes[i].values.empty()) continue;
    const auto b = box_stats(boxes[i].values);
    const char* color = kPalette[i % std::size(kPalette)];
    const double cx = f.px(static_cast<double>(i) + 0.5);
    const double half = 0.3 * (f.px(1.0) - f.px(0.0));
    svg += fmt::format("<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{0:.2f}\" y2=\"{2:.2f}\" stroke=\"black\"/>\n", cx,
                       py(b.whisker_low), py(b.q1));
    svg += fmt::format("<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{0:.2f}\" y2=\"{2:.2f}\" stroke=\"black\"/>\n", cx,
                       py(b.q3), py(b.whisker_high));
    svg += fmt::format(
        "<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"{}\" fill-opacity=\"0.35\" "
        "stroke=\"{}\"/>\n",
        cx - half, py(b.q3), 2 * half, std::max(0.5, py(b.q1) - py(b.q3)), color, color);
    svg += fmt::format("<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"black\" "
                       "stroke-width=\"2\"/>\n",
                       cx - half, py(b.median), cx + half, py(b.median));
    for (double v : b.outliers)
      svg += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"3\" fill=\"none\" stroke=\"{}\"/>\n", cx, py(v), color);
    svg += fmt::format("<text x=\"{:.2f}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", cx, f.height - f.bottom + 18,
                       escape(boxes[i].label));
  }
  return svg + "</svg>\n";
}

std::vector<std::filesystem::path> plot_results(const std::filesystem::path& dir, bool log_y) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw std::runtime_error(fmt::format("results directory {} not found", dir.string()));

  // instance -> algorithm -> runs
  std::map<std::string, std::map<std::string, std::vector<RunRecord>>> runs;
  for (const auto& inst : fs::directory_iterator(dir)) {
    if (!inst.is_directory()) continue;
    for (const auto& algo : fs::directory_iterator(inst.path())) {
      if (!algo.is_directory()) continue;
      std::vector<fs::path> files;
      for (const auto& f : fs::directory_iterator(algo.path()))
        if (f.is_regular_file() && f.path().filename().string().starts_with("run_") && f.path().extension() == ".csv")
          files.push_back(f.path());
      std::sort(files.begin(), files.end());
      for (const auto& file : files)
        runs[inst.path().filename().string()][algo.path().filename().string()].push_back(read_run_csv(file));
    }
  }
  if (runs.empty()) throw std::runtime_error(fmt::format("no run files under {}", dir.string()));

  std::vector<fs::path> written;
  for (const auto& [instance, algos] : runs) {
    std::vector<Series> series;
    std::vector<BoxData> boxes;
    std::ofstream conv_csv(dir / fmt::format("convergence_{}.csv", instance), std::ios::binary | std::ios::trunc);
    std::ofstream box_csv(dir / fmt::format("boxplot_{}.csv", instance), std::ios::binary | std::ios::trunc);
    conv_csv << "algorithm,evaluation,mean_best_so_far\n";
    box_csv << "algorithm,run,final_best\n";
    for (const auto& [algorithm, records] : algos) {
      std::size_t length = 0;
      for (const auto& r : records) length = std::max(length, r.trajectory.size());
      Series s;
      s.label = algorithm;
      // Shorter runs hold their last best value.
      for (std::size_t k = 0; k < length; ++k) {
        double sum = 0.0;
        for (const auto& r : records) {
          const auto& ev = r.trajectory.evals;
          sum += ev[std::min(k, ev.size() - 1)].best_so_far;
        }
        s.x.push_back(static_cast<double>(k + 1));
        s.y.push_back(sum / static_cast<double>(records.size()));
        conv_csv << algorithm << ',' << k + 1 << ',' << format_double(s.y.back()) << '\n';
      }
      series.push_back(std::move(s));
      BoxData b;
      b.label = algorithm;
      for (const auto& r : records) {
        b.values.push_back(r.trajectory.final_best());
        box_csv << algorithm << ',' << r.meta.run_id << ',' << format_double(b.values.back()) << '\n';
      }
      boxes.push_back(std::move(b));
    }

    ChartOptions conv{fmt::format("Convergence on {}", instance), "evaluations", "mean best-so-far fitness", log_y};
    const auto conv_path = dir / fmt::format("convergence_{}.svg", instance);
    std::ofstream(conv_path, std::ios::binary | std::ios::trunc) << render_line_chart(series, conv);
    written.push_back(conv_path);

    ChartOptions box{fmt::format("Final fitness on {}", instance), "algorithm", "best fitness", log_y};
    const auto box_path = dir / fmt::format("boxplot_{}.svg", instance);
    std::ofstream(box_path, std::ios::binary | std::ios::trunc) << render_box_plot(boxes, box);
    written.push_back(box_path);
  }
  return written;
}

}  // namespace photonbench
