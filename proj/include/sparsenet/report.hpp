#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sparsenet/errors.hpp"
#include "sparsenet/experiment.hpp"
#include "sparsenet/metrics.hpp"
#include "sparsenet/records.hpp"

namespace sparsenet {

enum class ReportKind { histogram, jointplot, table2 };

inline ReportKind parse_report_kind(std::string_view s) {
  if (s == "histogram") return ReportKind::histogram;
  if (s == "jointplot") return ReportKind::jointplot;
  if (s == "table2") return ReportKind::table2;
  throw ArgumentError("unknown report kind '" + std::string(s) + "' (expected histogram, jointplot or table2)");
}

inline std::string valid_column_names() {
  std::string out;
  for (auto n : kFeatureNames) out += std::string(n) + ", ";
  return out + "val_accuracy, test_accuracy";
}

inline bool is_accuracy_column(std::string_view name) { return name == "val_accuracy" || name == "test_accuracy"; }

inline void require_column(std::string_view name) {
  if (!feature_index(name) && !is_accuracy_column(name)) {
    throw SchemaError("unknown feature '" + std::string(name) + "'; valid names: " + valid_column_names());
  }
}

inline double column_value(const ExperimentRecord& r, std::string_view name) {
  if (name == "val_accuracy") return *r.val_accuracy;
  if (name == "test_accuracy") return *r.test_accuracy;
  return r.features.get(name);
}

// Values of one column; records lacking an accuracy are skipped when an
// accuracy column is involved.
inline std::vector<std::pair<double, double>> column_pairs(const std::vector<ExperimentRecord>& records,
                                                           std::string_view x, std::string_view y) {
  require_column(x);
  require_column(y);
  const bool needs_acc = is_accuracy_column(x) || is_accuracy_column(y);
  std::vector<std::pair<double, double>> out;
  for (const auto& r : records) {
    if (needs_acc && !r.usable()) continue;
    out.emplace_back(column_value(r, x), column_value(r, y));
  }
  return out;
}

inline std::vector<double> column_values(const std::vector<ExperimentRecord>& records, std::string_view name) {
  std::vector<double> out;
  for (const auto& [x, y] : column_pairs(records, name, name)) out.push_back(x);
  return out;
}

struct Histogram {
  std::vector<double> edges;  // bins + 1 boundaries
  std::vector<std::size_t> counts;
};

// Equal-width bins over [min, max]; the last bin is closed on the right.
inline Histogram histogram(const std::vector<double>& values, std::size_t bins) {
  if (bins < 1) throw ArgumentError("histogram: bins must be >= 1");
  Histogram h;
  h.counts.assign(bins, 0);
  double lo = 0.0, hi = 1.0;
  if (!values.empty()) {
    lo = *std::min_element(values.begin(), values.end());
    hi = *std::max_element(values.begin(), values.end());
  }
  if (hi <= lo) hi = lo + 1.0;
  const double width = (hi - lo) / static_cast<double>(bins);
  for (std::size_t b = 0; b <= bins; ++b) h.edges.push_back(b == bins ? hi : lo + width * static_cast<double>(b));
  for (double v : values) {
    auto b = static_cast<std::size_t>((v - lo) / width);
    h.counts[std::min(b, bins - 1)]++;
  }
  return h;
}

inline void write_histogram_csv(const Histogram& h, std::ostream& out) {
  out << "bin_low,bin_high,count\n";
  for (std::size_t b = 0; b < h.counts.size(); ++b) {
    out << format_double(h.edges[b]) << ',' << format_double(h.edges[b + 1]) << ',' << h.counts[b] << '\n';
  }
}

inline void write_points_csv(const std::vector<std::pair<double, double>>& pts, std::string_view x, std::string_view y,
                             std::ostream& out) {
  out << x << ',' << y << '\n';
  for (const auto& [a, b] : pts) out << format_double(a) << ',' << format_double(b) << '\n';
}

namespace svg {

inline constexpr double kWidth = 480, kHeight = 360, kMargin = 48;

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

inline void open(std::ostream& out, std::string_view title) {
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << kWidth / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"13\">" << title << "</text>\n";
}

inline void axes(std::ostream& out, double x0, double x1, double y0, double y1, std::string_view xl,
                 std::string_view yl) {
  const double l = kMargin, r = kWidth - kMargin / 2, t = kMargin / 1.5, b = kHeight - kMargin;
  out << "<line x1=\"" << l << "\" y1=\"" << b << "\" x2=\"" << r << "\" y2=\"" << b << "\" stroke=\"black\"/>\n"
      << "<line x1=\"" << l << "\" y1=\"" << b << "\" x2=\"" << l << "\" y2=\"" << t << "\" stroke=\"black\"/>\n"
      << "<text x=\"" << l << "\" y=\"" << b + 14 << "\" font-size=\"10\">" << label(x0) << "</text>\n"
      << "<text x=\"" << r << "\" y=\"" << b + 14 << "\" font-size=\"10\" text-anchor=\"end\">" << label(x1)
      << "</text>\n"
      << "<text x=\"" << l - 4 << "\" y=\"" << b << "\" font-size=\"10\" text-anchor=\"end\">" << label(y0)
      << "</text>\n"
      << "<text x=\"" << l - 4 << "\" y=\"" << t + 8 << "\" font-size=\"10\" text-anchor=\"end\">" << label(y1)
      << "</text>\n"
      << "<text x=\"" << (l + r) / 2 << "\" y=\"" << kHeight - 8 << "\" font-size=\"11\" text-anchor=\"middle\">" << xl
      << "</text>\n"
      << "<text x=\"12\" y=\"" << (t + b) / 2 << "\" font-size=\"11\" text-anchor=\"middle\" transform=\"rotate(-90 12 "
      << (t + b) / 2 << ")\">" << yl << "</text>\n";
}

}  // namespace svg

inline void write_histogram_svg(const Histogram& h, std::string_view name, std::ostream& out) {
  svg::open(out, name);
  const std::size_t peak = h.counts.empty() ? 1 : std::max<std::size_t>(1, *std::max_element(h.counts.begin(), h.counts.end()));
  svg::axes(out, h.edges.front(), h.edges.back(), 0, static_cast<double>(peak), name, "count");
  const double l = svg::kMargin, r = svg::kWidth - svg::kMargin / 2, t = svg::kMargin / 1.5, b = svg::kHeight - svg::kMargin;
  const double bw = (r - l) / static_cast<double>(h.counts.size());
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    const double height = (b - t) * static_cast<double>(h.counts[i]) / static_cast<double>(peak);
    out << "<rect x=\"" << svg::num(l + bw * static_cast<double>(i)) << "\" y=\"" << svg::num(b - height)
        << "\" width=\"" << svg::num(bw) << "\" height=\"" << svg::num(height)
        << "\" fill=\"steelblue\" stroke=\"white\"/>\n";
  }
  out << "</svg>\n";
}

inline void write_scatter_svg(const std::vector<std::pair<double, double>>& pts, std::string_view x, std::string_view y,
                              std::ostream& out) {
  svg::open(out, std::string(y) + " vs " + std::string(x));
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (!pts.empty()) {
    x0 = x1 = pts.front().first;
    y0 = y1 = pts.front().second;
    for (const auto& [a, b] : pts) {
      x0 = std::min(x0, a);
      x1 = std::max(x1, a);
      y0 = std::min(y0, b);
      y1 = std::max(y1, b);
    }
  }
  if (x1 <= x0) x1 = x0 + 1;
  if (y1 <= y0) y1 = y0 + 1;
  svg::axes(out, x0, x1, y0, y1, x, y);
  const double l = svg::kMargin, r = svg::kWidth - svg::kMargin / 2, t = svg::kMargin / 1.5, b = svg::kHeight - svg::kMargin;
  for (const auto& [a, c] : pts) {
    out << "<circle cx=\"" << svg::num(l + (r - l) * (a - x0) / (x1 - x0)) << "\" cy=\""
        << svg::num(b - (b - t) * (c - y0) / (y1 - y0)) << "\" r=\"2\" fill=\"steelblue\" fill-opacity=\"0.6\"/>\n";
  }
  out << "</svg>\n";
}

}  // namespace sparsenet
