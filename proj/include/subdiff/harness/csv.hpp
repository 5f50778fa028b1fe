#pragma once

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <vector>

#include "subdiff/core/errors.hpp"
#include "subdiff/harness/config.hpp"

namespace subdiff {

/// Comma-separated output with shortest round-trip number formatting, so reruns are byte-identical.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header) : path_(path), out_(path) {
    if (!out_) throw std::runtime_error("cannot write " + path.string());
    row_strings(header);
  }

  CsvWriter& row(std::initializer_list<double> values) { return row(std::vector<double>(values)); }

  CsvWriter& row(const std::vector<double>& values) {
    std::string line;
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (i) line += ',';
      line += format_double(values[i]);
    }
    out_ << line << '\n';
    return *this;
  }

  CsvWriter& row_strings(const std::vector<std::string>& cells) {
    std::string line;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) line += ',';
      line += escape(cells[i]);
    }
    out_ << line << '\n';
    return *this;
  }

  const std::filesystem::path& path() const { return path_; }

  static std::string escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
      if (c == '"') q += '"';
      q += c;
    }
    return q + "\"";
  }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

}  // namespace subdiff
