#include "edmdlab/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace edmdlab::cli {

namespace {

constexpr double kWidth = 760.0, kHeight = 520.0;
constexpr double kLeft = 72.0, kRight = 24.0, kTop = 40.0, kBottom = 56.0;

const char* kPalette[8] = {"#1f6fb4", "#d64e3c", "#3a9a58", "#8a51a5",
                           "#c58a1f", "#4fb3c6", "#b14f86", "#6b6b6b"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

struct Axis {
  double lo = 0.0, hi = 1.0;
  bool log = false;

  double place(double v, double a, double b) const {
    double t = log ? (std::log10(v) - lo) / (hi - lo) : (v - lo) / (hi - lo);
    return a + t * (b - a);
  }

  std::vector<double> ticks() const {
    std::vector<double> out;
    if (log) {
      for (int d = static_cast<int>(std::ceil(lo - 1e-9));
           d <= static_cast<int>(std::floor(hi + 1e-9)); ++d)
        out.push_back(std::pow(10.0, d));
      if (out.size() < 2) {
        out = {std::pow(10.0, lo), std::pow(10.0, hi)};
      }
      return out;
    }
    const double range = hi - lo;
    if (range <= 0.0) return {lo};
    double step = std::pow(10.0, std::floor(std::log10(range)));
    if (range / step > 5.0) step *= 2.0;
    if (range / step < 2.5) step /= 2.0;
    for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * range; v += step)
      out.push_back(v);
    return out;
  }
};

}  // namespace

SvgChart::SvgChart(std::string title, std::string x_label, std::string y_label)
    : title_(std::move(title)), x_label_(std::move(x_label)),
      y_label_(std::move(y_label)) {}

void SvgChart::add_series(SvgSeries series) {
  if (series.x.size() != series.y.size())
    throw std::invalid_argument("SvgChart: series length mismatch");
  series_.push_back(std::move(series));
}

std::string SvgChart::str() const {
  Axis ax, ay;
  ax.log = log_x_;
  ay.log = log_y_;
  double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo;
  double ylo = xlo, yhi = -xlo;
  for (const auto& s : series_)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      const double xv = s.x[i], yv = s.y[i];
      if (!std::isfinite(xv) || !std::isfinite(yv)) continue;
      if (log_x_ && xv <= 0.0) continue;
      if (log_y_ && yv <= 0.0) continue;
      xlo = std::min(xlo, xv);
      xhi = std::max(xhi, xv);
      ylo = std::min(ylo, yv);
      yhi = std::max(yhi, yv);
    }
  if (!(xlo <= xhi)) {  // nothing plottable
    xlo = log_x_ ? 1.0 : 0.0;
    xhi = log_x_ ? 10.0 : 1.0;
    ylo = log_y_ ? 1.0 : 0.0;
    yhi = log_y_ ? 10.0 : 1.0;
  }
  auto pad = [](double lo, double hi) {
    const double p = (hi - lo) * 0.05;
    return std::pair<double, double>(lo - p, hi + (p == 0.0 ? 0.5 : p));
  };
  if (log_x_) {
    ax.lo = std::log10(xlo) - 0.05;
    ax.hi = std::log10(xhi) + 0.05;
  } else {
    std::tie(ax.lo, ax.hi) = pad(xlo, xhi);
  }
  if (log_y_) {
    ay.lo = std::log10(ylo) - 0.1;
    ay.hi = std::log10(yhi) + 0.1;
  } else {
    std::tie(ay.lo, ay.hi) = pad(ylo, yhi);
  }

  const double x0 = kLeft, x1 = kWidth - kRight;
  const double y0 = kHeight - kBottom, y1 = kTop;  // y grows upward

  std::string s;
  s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" +
       num(kWidth) + "\" height=\"" + num(kHeight) + "\" viewBox=\"0 0 " +
       num(kWidth) + " " + num(kHeight) + "\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<text x=\"" + num(kWidth / 2) + "\" y=\"22\" text-anchor=\"middle\" "
       "font-family=\"sans-serif\" font-size=\"15\">" + title_ + "</text>\n";

  // axes box and ticks
  s += "<rect x=\"" + num(x0) + "\" y=\"" + num(y1) + "\" width=\"" +
       num(x1 - x0) + "\" height=\"" + num(y0 - y1) +
       "\" fill=\"none\" stroke=\"#333\" stroke-width=\"1\"/>\n";
  for (double tv : ax.ticks()) {
    const double px = ax.place(tv, x0, x1);
    if (px < x0 - 0.5 || px > x1 + 0.5) continue;
    s += "<line x1=\"" + num(px) + "\" y1=\"" + num(y0) + "\" x2=\"" + num(px) +
         "\" y2=\"" + num(y0 + 5) + "\" stroke=\"#333\"/>\n";
    s += "<text x=\"" + num(px) + "\" y=\"" + num(y0 + 18) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" +
         num(tv) + "</text>\n";
  }
  for (double tv : ay.ticks()) {
    const double py = ay.place(tv, y0, y1);
    if (py < y1 - 0.5 || py > y0 + 0.5) continue;
    s += "<line x1=\"" + num(x0 - 5) + "\" y1=\"" + num(py) + "\" x2=\"" +
         num(x0) + "\" y2=\"" + num(py) + "\" stroke=\"#333\"/>\n";
    s += "<text x=\"" + num(x0 - 8) + "\" y=\"" + num(py + 4) +
         "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" +
         num(tv) + "</text>\n";
  }
  s += "<text x=\"" + num((x0 + x1) / 2) + "\" y=\"" + num(kHeight - 14) +
       "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" +
       x_label_ + "</text>\n";
  s += "<text x=\"18\" y=\"" + num((y0 + y1) / 2) +
       "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
       "transform=\"rotate(-90 18 " + num((y0 + y1) / 2) + ")\">" + y_label_ +
       "</text>\n";

  // series
  for (std::size_t si = 0; si < series_.size(); ++si) {
    const auto& sr = series_[si];
    const char* color = kPalette[si % 8];
    std::string pts;
    for (std::size_t i = 0; i < sr.x.size(); ++i) {
      const double xv = sr.x[i], yv = sr.y[i];
      if (!std::isfinite(xv) || !std::isfinite(yv)) continue;
      if ((log_x_ && xv <= 0.0) || (log_y_ && yv <= 0.0)) continue;
      const double px = ax.place(xv, x0, x1);
      const double py = ay.place(yv, y0, y1);
      if (!sr.markers_only) {
        pts += (pts.empty() ? "" : " ") + num(px) + "," + num(py);
      }
      if (sr.markers_only) {
        s += "<circle cx=\"" + num(px) + "\" cy=\"" + num(py) +
             "\" r=\"3\" fill=\"" + color + "\" fill-opacity=\"0.8\"/>\n";
      }
    }
    if (!sr.markers_only && !pts.empty()) {
      s += "<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"" + color +
           "\" stroke-width=\"1.6\"/>\n";
    }
    if (!sr.label.empty()) {
      const double ly = y1 + 16 + 16 * static_cast<double>(si);
      s += "<line x1=\"" + num(x1 - 140) + "\" y1=\"" + num(ly - 4) +
           "\" x2=\"" + num(x1 - 118) + "\" y2=\"" + num(ly - 4) +
           "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
      s += "<text x=\"" + num(x1 - 112) + "\" y=\"" + num(ly) +
           "\" font-family=\"sans-serif\" font-size=\"11\">" + sr.label +
           "</text>\n";
    }
  }
  s += "</svg>\n";
  return s;
}

void SvgChart::write_file(const std::string& path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("SvgChart: cannot open " + path);
  const std::string body = str();
  f.write(body.data(), static_cast<std::streamsize>(body.size()));
  if (!f) throw std::runtime_error("SvgChart: write failed for " + path);
}

}  // namespace edmdlab::cli
