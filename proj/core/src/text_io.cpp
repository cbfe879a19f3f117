#include "pfsensor/text_io.hpp"

#include <charconv>
#include <cmath>

namespace pfsensor {

ParseError::ParseError(const std::string& source, std::size_t line, const std::string& what)
    : std::runtime_error(line > 0 ? source + ":" + std::to_string(line) + ": " + what
                                  : source + ": " + what),
      line_(line) {}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

LineReader::LineReader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

bool LineReader::next(std::string& line) {
  if (!std::getline(in_, line)) return false;
  ++line_no_;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

std::vector<std::string_view> LineReader::tokens(std::string_view line, std::size_t count) const {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos < line.size()) {
    while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
    if (pos >= line.size()) break;
    std::size_t end = pos;
    while (end < line.size() && line[end] != ' ' && line[end] != '\t') ++end;
    out.push_back(line.substr(pos, end - pos));
    pos = end;
  }
  if (out.size() != count) {
    fail("expected " + std::to_string(count) + " fields, found " + std::to_string(out.size()));
  }
  return out;
}

double LineReader::to_double(std::string_view token) const {
  double v = 0.0;
  const char* first = token.data();
  if (!token.empty() && token.front() == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, token.data() + token.size(), v);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    fail("invalid number '" + std::string(token) + "'");
  }
  if (!std::isfinite(v)) fail("non-finite value '" + std::string(token) + "'");
  return v;
}

std::size_t LineReader::to_size(std::string_view token) const {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    fail("invalid integer '" + std::string(token) + "'");
  }
  return v;
}

void LineReader::fail(const std::string& what) const { throw ParseError(source_, line_no_, what); }

}  // namespace pfsensor
