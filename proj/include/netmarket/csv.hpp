#pragma once

#include <charconv>
#include <cstdio>
#include <ostream>
#include <string>
#include <system_error>
#include <vector>

#include "netmarket/errors.hpp"

namespace netmarket {

/// Formats a double with 17 significant digits, '.' decimal separator,
/// no locale involvement: enough digits to round-trip any double, and
/// byte-stable across runs and platforms for the determinism contract.
inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v,
                           std::chars_format::general, 17);
  if (res.ec != std::errc()) {
    throw error("format_double: conversion failed");
  }
  return std::string(buf, res.ptr);
}

/// Streams CSV with '\n' line endings and no quoting (fields here are
/// numbers and simple identifiers; writers must not pass commas).
class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}

  void row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i > 0) out_ << ',';
      out_ << fields[i];
    }
    out_ << '\n';
  }

  void numeric_row(const std::vector<double>& values) {
    std::vector<std::string> fields;
    fields.reserve(values.size());
    for (double v : values) fields.push_back(format_double(v));
    row(fields);
  }

  /// A '#'-prefixed comment line (used for footers like the located
  /// transition point).
  void comment(const std::string& text) { out_ << "# " << text << '\n'; }

 private:
  std::ostream& out_;
};

}  // namespace netmarket
