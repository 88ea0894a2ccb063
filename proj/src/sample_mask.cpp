#include "edr/sample_mask.hpp"

#include <cassert>
#include <stdexcept>

namespace edr {

SampleMask SampleMask::from_predicate(std::size_t size, const std::function<bool(std::size_t)>& pred) {
  SampleMask m(size);
  for (std::size_t i = 0; i < size; ++i) {
    if (pred(i)) m.set(i);
  }
  return m;
}

SampleMask SampleMask::from_indices(std::size_t size, std::span<const std::size_t> indices) {
  SampleMask m(size);
  for (std::size_t i : indices) {
    if (i >= size) throw std::out_of_range("mask index out of range");
    m.set(i);
  }
  return m;
}

SampleMask SampleMask::all(std::size_t size) {
  SampleMask m(size);
  for (auto& w : m.words_) w = ~Word{0};
  if (const std::size_t tail = size % kWordBits; tail != 0) {
    m.words_.back() = (Word{1} << tail) - 1;
  }
  return m;
}

std::size_t SampleMask::count() const {
  std::size_t c = 0;
  for (Word w : words_) c += static_cast<std::size_t>(std::popcount(w));
  return c;
}

std::vector<std::size_t> SampleMask::indices() const {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < words_.size(); ++k) {
    Word w = words_[k];
    while (w != 0) {
      out.push_back(k * kWordBits + static_cast<std::size_t>(std::countr_zero(w)));
      w &= w - 1;
    }
  }
  return out;
}

SampleMask& SampleMask::operator|=(const SampleMask& other) {
  if (other.size_ != size_) throw std::invalid_argument("mask size mismatch");
  for (std::size_t k = 0; k < words_.size(); ++k) words_[k] |= other.words_[k];
  return *this;
}

SampleMask& SampleMask::operator&=(const SampleMask& other) {
  if (other.size_ != size_) throw std::invalid_argument("mask size mismatch");
  for (std::size_t k = 0; k < words_.size(); ++k) words_[k] &= other.words_[k];
  return *this;
}

bool SampleMask::subset_of(const SampleMask& other) const {
  if (other.size_ != size_) throw std::invalid_argument("mask size mismatch");
  for (std::size_t k = 0; k < words_.size(); ++k) {
    if ((words_[k] & ~other.words_[k]) != 0) return false;
  }
  return true;
}

std::size_t and_count(std::span<const SampleMask::Word> a, std::span<const SampleMask::Word> b) {
  assert(a.size() == b.size());
  std::size_t c = 0;
  for (std::size_t k = 0; k < a.size(); ++k) c += static_cast<std::size_t>(std::popcount(a[k] & b[k]));
  return c;
}

UnionCounts union_and_counts(std::span<const SampleMask::Word> a, std::span<const SampleMask::Word> b,
                             std::span<const SampleMask::Word> target,
                             std::span<const SampleMask::Word> target2) {
  assert(a.size() == b.size() && a.size() == target.size() && a.size() == target2.size());
  UnionCounts out;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const SampleMask::Word u = a[k] | b[k];
    out.first += static_cast<std::size_t>(std::popcount(u & target[k]));
    out.second += static_cast<std::size_t>(std::popcount(u & target2[k]));
  }
  return out;
}

}  // namespace edr
