#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace gdp {

/// Input could not be parsed. Carries the 1-based line number when known.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what), detail_(what), line_(line) {}
  std::size_t line() const { return line_; }
  /// Message without the line prefix.
  const std::string& detail() const { return detail_; }

 private:
  std::string detail_;
  std::size_t line_;
};

/// Parsed input violates a domain invariant.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Direction : std::uint8_t { arrival = 0, departure = 1 };

inline constexpr Direction kDirections[] = {Direction::arrival, Direction::departure};

inline const char* to_string(Direction d) { return d == Direction::arrival ? "arrival" : "departure"; }

inline Direction parse_direction(std::string_view s) {
  if (s == "arrival" || s == "arr" || s == "a") return Direction::arrival;
  if (s == "departure" || s == "dep" || s == "g" || s == "d") return Direction::departure;
  throw ParseError("unknown direction '" + std::string(s) + "'");
}

/// Deterministic uniform draw in [0,1) from a 64-bit generator.
template <class Rng>
double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace gdp
