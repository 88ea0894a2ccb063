#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace edr {

/// Word-packed boolean vector over the samples of a table. Bits past size()
/// in the last word are always zero, so popcounts need no tail masking.
class SampleMask {
 public:
  using Word = std::uint64_t;
  static constexpr std::size_t kWordBits = 64;

  SampleMask() = default;
  explicit SampleMask(std::size_t size) : size_(size), words_(word_count(size), 0) {}

  static SampleMask from_predicate(std::size_t size, const std::function<bool(std::size_t)>& pred);
  static SampleMask from_indices(std::size_t size, std::span<const std::size_t> indices);
  static SampleMask all(std::size_t size);

  static constexpr std::size_t word_count(std::size_t size) { return (size + kWordBits - 1) / kWordBits; }

  std::size_t size() const { return size_; }
  std::span<const Word> words() const { return words_; }

  bool test(std::size_t i) const { return (words_[i / kWordBits] >> (i % kWordBits)) & 1u; }
  void set(std::size_t i) { words_[i / kWordBits] |= Word{1} << (i % kWordBits); }

  std::size_t count() const;
  bool none() const { return count() == 0; }
  std::vector<std::size_t> indices() const;

  SampleMask& operator|=(const SampleMask& other);
  SampleMask& operator&=(const SampleMask& other);
  friend SampleMask operator|(SampleMask a, const SampleMask& b) { return a |= b; }
  friend SampleMask operator&(SampleMask a, const SampleMask& b) { return a &= b; }

  /// True when every set bit of *this is also set in other.
  bool subset_of(const SampleMask& other) const;

  bool operator==(const SampleMask&) const = default;

 private:
  std::size_t size_ = 0;
  std::vector<Word> words_;
};

/// popcount(a & b)
std::size_t and_count(std::span<const SampleMask::Word> a, std::span<const SampleMask::Word> b);

/// popcount((a | b) & target) and popcount((a | b) & target2) in one pass.
/// This is the inner kernel of every marginal POS/BOD evaluation.
struct UnionCounts {
  std::size_t first = 0;
  std::size_t second = 0;
};
UnionCounts union_and_counts(std::span<const SampleMask::Word> a, std::span<const SampleMask::Word> b,
                             std::span<const SampleMask::Word> target, std::span<const SampleMask::Word> target2);

}  // namespace edr
