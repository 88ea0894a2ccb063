#include "edr/ratio.hpp"

#include <numeric>
#include <stdexcept>

namespace edr {

double Ratio::to_double() const {
  if (is_undefined()) return 0.0;
  return static_cast<double>(numerator_) / static_cast<double>(denominator_);
}

Ratio Ratio::reduced() const {
  if (is_undefined()) return *this;
  const std::uint64_t g = std::gcd(numerator_, denominator_);
  return {numerator_ / g, denominator_ / g};
}

std::string Ratio::to_string() const {
  const Ratio r = reduced();
  return std::to_string(r.numerator_) + "/" + std::to_string(r.denominator_);
}

Ratio Ratio::parse(const std::string& text) {
  const auto slash = text.find('/');
  if (slash == std::string::npos || slash == 0 || slash + 1 == text.size()) {
    throw std::invalid_argument("bad ratio '" + text + "'");
  }
  std::size_t used_num = 0;
  std::size_t used_den = 0;
  const std::string num = text.substr(0, slash);
  const std::string den = text.substr(slash + 1);
  if (num.find_first_not_of("0123456789") != std::string::npos ||
      den.find_first_not_of("0123456789") != std::string::npos) {
    throw std::invalid_argument("bad ratio '" + text + "'");
  }
  const auto p = std::stoull(num, &used_num);
  const auto q = std::stoull(den, &used_den);
  return {p, q};
}

std::strong_ordering operator<=>(const Ratio& a, const Ratio& b) {
  if (a.is_undefined() || b.is_undefined()) {
    return static_cast<int>(!a.is_undefined()) <=> static_cast<int>(!b.is_undefined());
  }
  __extension__ using Wide = unsigned __int128;
  const Wide lhs = static_cast<Wide>(a.numerator_) * b.denominator_;
  const Wide rhs = static_cast<Wide>(b.numerator_) * a.denominator_;
  if (a.is_infinite() || b.is_infinite()) {
    return static_cast<int>(a.is_infinite()) <=> static_cast<int>(b.is_infinite());
  }
  return lhs <=> rhs;
}

}  // namespace edr
