#pragma once

#include <cstddef>
#include <istream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace pfsensor {

/// Malformed input file. `line()` is 1-based, 0 when not tied to a line.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Shortest decimal that round-trips to the same double; locale independent.
std::string format_double(double v);

/// Reads a text file line by line, tracking line numbers for diagnostics.
class LineReader {
 public:
  LineReader(std::istream& in, std::string source);

  /// False at end of input.
  bool next(std::string& line);
  std::size_t line_number() const { return line_no_; }
  const std::string& source() const { return source_; }

  /// Splits the current line on whitespace, requiring exactly `count` tokens.
  std::vector<std::string_view> tokens(std::string_view line, std::size_t count) const;
  double to_double(std::string_view token) const;
  std::size_t to_size(std::string_view token) const;

  [[noreturn]] void fail(const std::string& what) const;

 private:
  std::istream& in_;
  std::string source_;
  std::size_t line_no_ = 0;
};

}  // namespace pfsensor
