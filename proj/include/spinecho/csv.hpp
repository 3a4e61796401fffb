// Plot-ready CSV output: 17 significant digits (round-trip exact for
// doubles), UTF-8, Unix newlines.
#ifndef SPINECHO_CSV_HPP
#define SPINECHO_CSV_HPP

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "spinecho/types.hpp"

namespace spinecho {

inline std::string csv_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header) : out_(path, std::ios::binary) {
    if (!out_) throw ConfigError("cannot open output file: " + path);
    write_row(header);
  }

  void write_row(const std::vector<std::string>& cells) {
    for (size_t i = 0; i < cells.size(); ++i) {
      if (i > 0) out_ << ',';
      out_ << cells[i];
    }
    out_ << '\n';
  }

  template <typename... Ts>
  void row(Ts... values) {
    write_row({to_cell(values)...});
  }

 private:
  static std::string to_cell(double v) { return csv_number(v); }
  static std::string to_cell(int v) { return std::to_string(v); }
  static std::string to_cell(long v) { return std::to_string(v); }
  static std::string to_cell(size_t v) { return std::to_string(v); }
  static std::string to_cell(const char* v) { return v; }
  static std::string to_cell(const std::string& v) { return v; }

  std::ofstream out_;
};

}  // namespace spinecho

#endif  // SPINECHO_CSV_HPP
