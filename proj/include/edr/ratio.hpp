#pragma once

#include <compare>
#include <cstdint>
#include <string>

namespace edr {

/// Non-negative rational numerator/denominator compared exactly by
/// cross-multiplication. 0/0 is "undefined" and orders below every defined
/// value; x/0 with x > 0 orders above every finite value.
class Ratio {
 public:
  constexpr Ratio() = default;
  constexpr Ratio(std::uint64_t numerator, std::uint64_t denominator)
      : numerator_(numerator), denominator_(denominator) {}

  static constexpr Ratio undefined() { return {0, 0}; }

  constexpr std::uint64_t numerator() const { return numerator_; }
  constexpr std::uint64_t denominator() const { return denominator_; }
  constexpr bool is_undefined() const { return numerator_ == 0 && denominator_ == 0; }
  constexpr bool is_infinite() const { return numerator_ != 0 && denominator_ == 0; }

  /// Value as a double; undefined maps to 0.
  double to_double() const;
  Ratio reduced() const;
  /// "p/q" in lowest terms; "0/0" for undefined.
  std::string to_string() const;
  /// Parses "p/q" as written by to_string().
  static Ratio parse(const std::string& text);

  /// Exact value order (1/2 == 2/4).
  friend std::strong_ordering operator<=>(const Ratio& a, const Ratio& b);
  friend bool operator==(const Ratio& a, const Ratio& b) { return (a <=> b) == 0; }

  /// Exact product with a non-negative integer, e.g. 2 * objective.
  Ratio scaled(std::uint64_t factor) const { return {numerator_ * factor, denominator_}; }

 private:
  std::uint64_t numerator_ = 0;
  std::uint64_t denominator_ = 0;
};

}  // namespace edr
