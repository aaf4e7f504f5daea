#include "topobar/svg.hpp"

#include <algorithm>
#include <cstdio>
#include <map>

namespace topobar {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

}  // namespace

std::string barcode_svg(const Barcode& barcode, const std::string& title, double axis_max) {
  std::vector<Interval> bars = barcode.intervals;
  std::stable_sort(bars.begin(), bars.end(), [](const Interval& a, const Interval& b) {
    if (a.length() != b.length()) return a.length() > b.length();
    return a.birth < b.birth;
  });
  const double left = 40, right = 20, top = 40, row = 12, plot_w = 520;
  const double height = top + row * static_cast<double>(std::max<std::size_t>(bars.size(), 1)) + 50;
  const double width = left + plot_w + right;
  const auto x = [&](double v) { return left + plot_w * std::clamp(v / axis_max, 0.0, 1.0); };
  const double axis_y = height - 30;

  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width) + "\" height=\"" +
                    num(height) + "\" viewBox=\"0 0 " + num(width) + " " + num(height) + "\">\n";
  svg += "<title>" + escape(title) + "</title>\n";
  svg += "<text x=\"" + num(left) + "\" y=\"20\" font-family=\"sans-serif\" font-size=\"13\">" + escape(title) +
         "</text>\n";
  svg += "<line class=\"axis\" x1=\"" + num(x(0)) + "\" y1=\"" + num(axis_y) + "\" x2=\"" + num(x(axis_max)) +
         "\" y2=\"" + num(axis_y) + "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 11; ++t) {
    const double v = axis_max * t / 11.0;
    svg += "<text x=\"" + num(x(v)) + "\" y=\"" + num(axis_y + 15) +
           "\" font-family=\"sans-serif\" font-size=\"9\" text-anchor=\"middle\">" + num(v) + "</text>\n";
  }
  for (std::size_t i = 0; i < bars.size(); ++i) {
    const double y = top + row * static_cast<double>(i);
    svg += "<rect class=\"bar\" x=\"" + num(x(bars[i].birth)) + "\" y=\"" + num(y) + "\" width=\"" +
           num(x(bars[i].death) - x(bars[i].birth)) + "\" height=\"" + num(row - 3) +
           "\" fill=\"#1f77b4\" data-birth=\"" + num(bars[i].birth) + "\" data-death=\"" + num(bars[i].death) +
           "\"/>\n";
  }
  svg += "</svg>\n";
  return svg;
}

std::string scatter_svg(const Eigen::MatrixXd& coords, const std::vector<std::string>& ids,
                        const std::vector<std::string>& labels, const std::string& title) {
  const double size = 520, margin = 40;
  const Eigen::Index n = coords.rows();
  const auto coord = [&](Eigen::Index i, Eigen::Index axis) { return axis < coords.cols() ? coords(i, axis) : 0.0; };
  double lo = 0, hi = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index a = 0; a < 2; ++a) {
      lo = std::min(lo, coord(i, a));
      hi = std::max(hi, coord(i, a));
    }
  }
  const double span = hi > lo ? hi - lo : 1.0;
  const auto px = [&](double v) { return margin + (size - 2 * margin) * (v - lo) / span; };
  const auto py = [&](double v) { return size - margin - (size - 2 * margin) * (v - lo) / span; };

  std::map<std::string, std::size_t> colour;
  for (const auto& l : labels) colour.emplace(l, 0);
  std::size_t next = 0;
  for (auto& [label, c] : colour) c = next++ % std::size(kPalette);

  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(size) + "\" height=\"" +
                    num(size + 20 * static_cast<double>(colour.size())) + "\">\n";
  svg += "<title>" + escape(title) + "</title>\n";
  svg += "<text x=\"" + num(margin) + "\" y=\"20\" font-family=\"sans-serif\" font-size=\"13\">" + escape(title) +
         "</text>\n";
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::string& label = labels.empty() ? std::string() : labels[static_cast<std::size_t>(i)];
    const auto c = colour.count(label) ? colour[label] : 0;
    svg += "<circle class=\"point\" cx=\"" + num(px(coord(i, 0))) + "\" cy=\"" + num(py(coord(i, 1))) +
           "\" r=\"4\" fill=\"" + kPalette[c] + "\"><title>" + escape(ids[static_cast<std::size_t>(i)]) + " " +
           escape(label) + "</title></circle>\n";
  }
  double ly = size;
  for (const auto& [label, c] : colour) {
    svg += "<circle cx=\"" + num(margin) + "\" cy=\"" + num(ly) + "\" r=\"4\" fill=\"" + kPalette[c] + "\"/>";
    svg += "<text x=\"" + num(margin + 10) + "\" y=\"" + num(ly + 4) +
           "\" font-family=\"sans-serif\" font-size=\"11\">" + escape(label) + "</text>\n";
    ly += 20;
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace topobar
