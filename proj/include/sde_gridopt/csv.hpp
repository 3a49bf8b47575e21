#pragma once

#include <cstdio>
#include <ostream>
#include <string>
#include <string_view>

namespace sde_gridopt::csv {

/// 17 significant digits, enough to round-trip any double.
inline std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class Writer {
 public:
  explicit Writer(std::ostream& os) : os_(os) {}

  Writer& cell(std::string_view text) {
    if (!first_) os_ << ',';
    os_ << text;
    first_ = false;
    return *this;
  }
  Writer& cell(double v) { return cell(num(v)); }
  Writer& cell(long long v) { return cell(std::to_string(v)); }
  Writer& cell(int v) { return cell(std::to_string(v)); }
  Writer& cell(std::size_t v) { return cell(std::to_string(v)); }

  void end_row() {
    os_ << '\n';
    first_ = true;
  }

 private:
  std::ostream& os_;
  bool first_ = true;
};

}  // namespace sde_gridopt::csv
