#include "gtsec/svgplot.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "gtsec/report.hpp"

namespace gtsec {
namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                          "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '&')
      out += "&amp;";
    else if (c == '<')
      out += "&lt;";
    else if (c == '>')
      out += "&gt;";
    else
      out += c;
  }
  return out;
}

}  // namespace

std::string line_chart_svg(const std::string& title,
                           const std::vector<std::string>& names,
                           const Eigen::MatrixXd& series) {
  if (series.rows() == 0 || series.cols() < 2)
    throw std::invalid_argument("chart needs at least one series of two points");
  if (names.size() != static_cast<std::size_t>(series.rows()))
    throw std::invalid_argument("one name per series required");

  const double w = 720, h = 420;
  const double ml = 64, mr = 150, mt = 40, mb = 44;
  const double pw = w - ml - mr, ph = h - mt - mb;

  double lo = series.minCoeff(), hi = series.maxCoeff();
  if (!std::isfinite(lo) || !std::isfinite(hi))
    throw std::invalid_argument("chart values must be finite");
  if (hi - lo < 1e-300) {
    hi += 1.0;
    lo -= 1.0;
  }
  const double pad = 0.05 * (hi - lo);
  lo -= pad;
  hi += pad;

  const int steps = static_cast<int>(series.cols()) - 1;
  auto px = [&](double k) { return ml + pw * k / steps; };
  auto py = [&](double v) { return mt + ph * (1.0 - (v - lo) / (hi - lo)); };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w
      << "\" height=\"" << h << "\" viewBox=\"0 0 " << w << " " << h << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << ml << "\" y=\"24\" font-family=\"sans-serif\" "
         "font-size=\"15\" fill=\"#222\">"
      << escape(title) << "</text>\n";

  out << "<g stroke=\"#ccc\" stroke-width=\"1\">\n";
  for (int g = 0; g <= 4; ++g) {
    const double y = mt + ph * g / 4.0;
    out << "<line x1=\"" << ml << "\" y1=\"" << y << "\" x2=\"" << ml + pw
        << "\" y2=\"" << y << "\"/>\n";
  }
  out << "</g>\n<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#444\">\n";
  for (int g = 0; g <= 4; ++g) {
    const double v = hi - (hi - lo) * g / 4.0;
    out << "<text x=\"" << ml - 6 << "\" y=\"" << mt + ph * g / 4.0 + 4
        << "\" text-anchor=\"end\">" << format_double(v) << "</text>\n";
  }
  for (int g = 0; g <= 4; ++g) {
    const int k = steps * g / 4;
    out << "<text x=\"" << px(k) << "\" y=\"" << mt + ph + 18
        << "\" text-anchor=\"middle\">" << k << "</text>\n";
  }
  out << "</g>\n";

  for (int s = 0; s < series.rows(); ++s) {
    const char* color = kPalette[s % 8];
    out << "<polyline fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1.5\" points=\"";
    for (int k = 0; k <= steps; ++k)
      out << px(k) << ',' << py(series(s, k)) << (k == steps ? "" : " ");
    out << "\"/>\n";
    const double ly = mt + 14 + 18 * s;
    out << "<line x1=\"" << ml + pw + 10 << "\" y1=\"" << ly << "\" x2=\""
        << ml + pw + 30 << "\" y2=\"" << ly << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n"
        << "<text x=\"" << ml + pw + 36 << "\" y=\"" << ly + 4
        << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#222\">"
        << escape(names[static_cast<std::size_t>(s)]) << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

void write_line_chart(const std::string& path, const std::string& title,
                      const std::vector<std::string>& names,
                      const Eigen::MatrixXd& series) {
  write_text_atomic(path, line_chart_svg(title, names, series));
}

}  // namespace gtsec
