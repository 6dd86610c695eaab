#pragma once

#include <bit>
#include <cstdint>
#include <vector>

namespace ccf {

/// Fixed-size bit array backed by 64-bit words. Used for per-entry Bloom
/// sketches and converted-group payloads.
class BitVector {
 public:
  BitVector() = default;
  explicit BitVector(uint32_t num_bits)
      : num_bits_(num_bits), words_((num_bits + 63) / 64, 0) {}

  uint32_t size() const { return num_bits_; }

  bool test(uint32_t i) const {
    return (words_[i >> 6] >> (i & 63)) & 1;
  }

  void set(uint32_t i) { words_[i >> 6] |= 1ull << (i & 63); }

  /// Sets bit i; returns true if the bit was previously clear.
  bool set_changed(uint32_t i) {
    uint64_t& w = words_[i >> 6];
    uint64_t m = 1ull << (i & 63);
    bool changed = (w & m) == 0;
    w |= m;
    return changed;
  }

  uint32_t popcount() const {
    uint32_t n = 0;
    for (uint64_t w : words_) n += uint32_t(std::popcount(w));
    return n;
  }

  /// Copy of bits [begin, begin + len).
  BitVector slice(uint32_t begin, uint32_t len) const {
    BitVector out(len);
    for (uint32_t i = 0; i < len; ++i)
      if (test(begin + i)) out.set(i);
    return out;
  }

  /// Appends all of other's bits after this vector's current end.
  void append(const BitVector& other) {
    uint32_t base = num_bits_;
    num_bits_ += other.num_bits_;
    words_.resize((num_bits_ + 63) / 64, 0);
    for (uint32_t i = 0; i < other.num_bits_; ++i)
      if (other.test(i)) set(base + i);
  }

  friend bool operator==(const BitVector& a, const BitVector& b) {
    return a.num_bits_ == b.num_bits_ && a.words_ == b.words_;
  }

  const std::vector<uint64_t>& words() const { return words_; }
  std::vector<uint64_t>& words() { return words_; }

 private:
  uint32_t num_bits_ = 0;
  std::vector<uint64_t> words_;
};

}  // namespace ccf
