#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ulab::report {

// CSV writer with a one-line "# key=value ..." fingerprint header. Numeric
// formatting is fixed ("%.17g") so identical runs produce identical bytes.
class Csv {
 public:
  Csv(std::string fingerprint, std::vector<std::string> columns);

  void row(const std::vector<std::string>& cells);
  std::string str() const;
  void write(const std::string& path) const;

  static std::string num(double v);
  static std::string num(uint64_t v);
  static std::string num(int64_t v);

 private:
  std::string body_;
  size_t columns_ = 0;
};

// Minimal line chart: one polyline per series, log-x when requested.
struct Series {
  std::string name;
  std::vector<std::pair<double, double>> points;
};
std::string render_svg_chart(const std::string& title, const std::string& x_label,
                             const std::string& y_label, const std::vector<Series>& series,
                             bool log_x);

uint64_t fnv1a_file(const std::string& path);
uint64_t fnv1a_bytes(const std::string& bytes);

void ensure_directory(const std::string& path);

}  // namespace ulab::report
