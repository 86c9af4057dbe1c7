#include "fringeslam/pipeline/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include "fringeslam/core/errors.hpp"

namespace fringeslam::pipeline {
namespace {

struct Bounds {
  double min_x = 0, max_x = 0, min_z = 0, max_z = 0;
  bool any = false;

  void include(const localization::Trajectory& t) {
    for (const auto& pose : t.poses) {
      if (!any) {
        min_x = max_x = pose.center.x();
        min_z = max_z = pose.center.z();
        any = true;
        continue;
      }
      min_x = std::min(min_x, pose.center.x());
      max_x = std::max(max_x, pose.center.x());
      min_z = std::min(min_z, pose.center.z());
      max_z = std::max(max_z, pose.center.z());
    }
  }
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

}  // namespace

void write_trajectory_svg(const std::filesystem::path& path,
                          const localization::Trajectory& estimated,
                          const localization::Trajectory* truth) {
  Bounds bounds;
  bounds.include(estimated);
  if (truth) bounds.include(*truth);
  if (!bounds.any) throw DataError("write_trajectory_svg: nothing to plot");

  const double span_x = std::max(bounds.max_x - bounds.min_x, 1.0);
  const double span_z = std::max(bounds.max_z - bounds.min_z, 1.0);
  const double plot = 560.0, margin = 60.0;
  const double scale = plot / std::max(span_x, span_z);
  // SVG y grows downward; put +z up so the view reads as a floor plan.
  const auto sx = [&](double x) { return margin + (x - bounds.min_x) * scale; };
  const auto sz = [&](double z) { return margin + (bounds.max_z - z) * scale; };
  const double width = 2 * margin + span_x * scale;
  const double height = 2 * margin + span_z * scale + 30;

  std::ofstream out(path);
  if (!out) throw DataError("write_trajectory_svg: cannot write " + path.string());
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\""
      << num(height) << "\" viewBox=\"0 0 " << num(width) << " " << num(height) << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  const auto polyline = [&](const localization::Trajectory& t, const char* stroke,
                            const char* dash) {
    out << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"1.5\"";
    if (dash[0]) out << " stroke-dasharray=\"" << dash << "\"";
    out << " points=\"";
    for (const auto& pose : t.poses)
      out << num(sx(pose.center.x())) << "," << num(sz(pose.center.z())) << " ";
    out << "\"/>\n";
  };
  if (truth && !truth->poses.empty()) polyline(*truth, "#999999", "6,4");
  polyline(estimated, "#1f5fbf", "");
  for (const auto& pose : estimated.poses)
    out << "<circle cx=\"" << num(sx(pose.center.x())) << "\" cy=\"" << num(sz(pose.center.z()))
        << "\" r=\"2.5\" fill=\"#1f5fbf\"/>\n";
  const auto& first = estimated.poses.front();
  out << "<circle cx=\"" << num(sx(first.center.x())) << "\" cy=\"" << num(sz(first.center.z()))
      << "\" r=\"5\" fill=\"none\" stroke=\"#c0392b\" stroke-width=\"1.5\"/>\n";

  // Scale bar: the largest power of ten under a third of the span.
  const double bar = std::pow(10.0, std::floor(std::log10(std::max(span_x, span_z) / 3.0)));
  const double bar_y = height - 18;
  out << "<line x1=\"" << num(margin) << "\" y1=\"" << num(bar_y) << "\" x2=\""
      << num(margin + bar * scale) << "\" y2=\"" << num(bar_y)
      << "\" stroke=\"black\" stroke-width=\"2\"/>\n";
  out << "<text x=\"" << num(margin + bar * scale + 6) << "\" y=\"" << num(bar_y + 4)
      << "\" font-family=\"sans-serif\" font-size=\"12\">" << num(bar) << " mm</text>\n";

  out << "<text x=\"" << num(margin) << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"13\">"
      << "estimated (solid)" << (truth ? " vs ground truth (dashed)" : "")
      << ", top-down x/z</text>\n";
  out << "</svg>\n";
  if (!out) throw DataError("write_trajectory_svg: write failed for " + path.string());
}

}  // namespace fringeslam::pipeline
