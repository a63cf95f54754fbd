#include "ulab/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ulab/errors.hpp"

namespace ulab::report {

Csv::Csv(std::string fingerprint, std::vector<std::string> columns) : columns_(columns.size()) {
  body_ = "# " + fingerprint + "\n";
  for (size_t i = 0; i < columns.size(); ++i) {
    body_ += columns[i];
    body_ += i + 1 == columns.size() ? "\n" : ",";
  }
}

void Csv::row(const std::vector<std::string>& cells) {
  if (cells.size() != columns_) throw invalid_argument("Csv: cell count != column count");
  for (size_t i = 0; i < cells.size(); ++i) {
    body_ += cells[i];
    body_ += i + 1 == cells.size() ? "\n" : ",";
  }
}

std::string Csv::str() const { return body_; }

void Csv::write(const std::string& path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw io_error("Csv::write: cannot open " + path);
  f << body_;
  if (!f) throw io_error("Csv::write: write failed for " + path);
}

std::string Csv::num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string Csv::num(uint64_t v) { return std::to_string(v); }
std::string Csv::num(int64_t v) { return std::to_string(v); }

std::string render_svg_chart(const std::string& title, const std::string& x_label,
                             const std::string& y_label, const std::vector<Series>& series,
                             bool log_x) {
  const double W = 720, H = 480, ML = 70, MR = 20, MT = 40, MB = 50;
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& s : series) {
    for (auto [x, y] : s.points) {
      const double xv = log_x ? std::log2(x) : x;
      xmin = std::min(xmin, xv);
      xmax = std::max(xmax, xv);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  }
  if (xmin > xmax) {
    xmin = 0;
    xmax = 1;
  }
  if (ymin > ymax) {
    ymin = 0;
    ymax = 1;
  }
  if (ymin == ymax) {
    ymin -= 0.5;
    ymax += 0.5;
  }
  if (xmin == xmax) {
    xmin -= 0.5;
    xmax += 0.5;
  }
  const auto px = [&](double x) {
    const double xv = log_x ? std::log2(x) : x;
    return ML + (xv - xmin) / (xmax - xmin) * (W - ML - MR);
  };
  const auto py = [&](double y) { return H - MB - (y - ymin) / (ymax - ymin) * (H - MT - MB); };

  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" << title
      << "</text>\n";
  out << "<line x1=\"" << ML << "\" y1=\"" << H - MB << "\" x2=\"" << W - MR << "\" y2=\""
      << H - MB << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << ML << "\" y1=\"" << MT << "\" x2=\"" << ML << "\" y2=\"" << H - MB
      << "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double fy = ymin + (ymax - ymin) * t / 4.0;
    out << "<text x=\"" << ML - 8 << "\" y=\"" << py(fy) + 4
        << "\" text-anchor=\"end\" font-size=\"11\">" << Csv::num(fy).substr(0, 9) << "</text>\n";
    out << "<line x1=\"" << ML - 4 << "\" y1=\"" << py(fy) << "\" x2=\"" << ML << "\" y2=\""
        << py(fy) << "\" stroke=\"black\"/>\n";
    const double fx = xmin + (xmax - xmin) * t / 4.0;
    const double fx_val = log_x ? std::exp2(fx) : fx;
    out << "<text x=\"" << ML + (W - ML - MR) * t / 4.0 << "\" y=\"" << H - MB + 18
        << "\" text-anchor=\"middle\" font-size=\"11\">" << Csv::num(fx_val).substr(0, 9)
        << "</text>\n";
  }
  out << "<text x=\"" << (ML + W - MR) / 2 << "\" y=\"" << H - 12
      << "\" text-anchor=\"middle\" font-size=\"12\">" << x_label << "</text>\n";
  out << "<text x=\"16\" y=\"" << (MT + H - MB) / 2
      << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 16 "
      << (MT + H - MB) / 2 << ")\">" << y_label << "</text>\n";
  for (size_t s = 0; s < series.size(); ++s) {
    const char* color = colors[s % 6];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (auto [x, y] : series[s].points) out << px(x) << "," << py(y) << " ";
    out << "\"/>\n";
    out << "<text x=\"" << W - MR - 6 << "\" y=\"" << MT + 16 + 16 * static_cast<double>(s)
        << "\" text-anchor=\"end\" font-size=\"12\" fill=\"" << color << "\">" << series[s].name
        << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

uint64_t fnv1a_bytes(const std::string& bytes) {
  uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

uint64_t fnv1a_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw io_error("fnv1a_file: cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return fnv1a_bytes(ss.str());
}

void ensure_directory(const std::string& path) {
  std::error_code ec;
  std::filesystem::create_directories(path, ec);
  if (ec) throw io_error("cannot create directory " + path + ": " + ec.message());
}

}  // namespace ulab::report
