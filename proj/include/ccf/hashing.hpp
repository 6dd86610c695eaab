#pragma once

#include <cstdint>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

// Seeded hashing primitives: key digests, alternate/chain bucket derivation,
// attribute fingerprints and Bloom bit positions. Everything here is a pure
// function of (input, seed) and produces identical results on every platform.

namespace ccf {

// ===========================================================================
// xxh64 core
// ===========================================================================

namespace detail {

inline constexpr uint64_t kXxhPrime1 = 0x9E3779B185EBCA87ull;
inline constexpr uint64_t kXxhPrime2 = 0xC2B2AE3D27D4EB4Full;
inline constexpr uint64_t kXxhPrime3 = 0x165667B19E3779F9ull;
inline constexpr uint64_t kXxhPrime4 = 0x85EBCA77C2B2AE63ull;
inline constexpr uint64_t kXxhPrime5 = 0x27D4EB2F165667C5ull;

inline constexpr uint64_t rotl64(uint64_t x, int r) {
  return (x << r) | (x >> (64 - r));
}

// Explicit little-endian loads keep digests byte-order independent.
inline uint64_t load64(const unsigned char* p) {
  return uint64_t(p[0]) | uint64_t(p[1]) << 8 | uint64_t(p[2]) << 16 |
         uint64_t(p[3]) << 24 | uint64_t(p[4]) << 32 | uint64_t(p[5]) << 40 |
         uint64_t(p[6]) << 48 | uint64_t(p[7]) << 56;
}

inline uint32_t load32(const unsigned char* p) {
  return uint32_t(p[0]) | uint32_t(p[1]) << 8 | uint32_t(p[2]) << 16 |
         uint32_t(p[3]) << 24;
}

inline uint64_t xxh_round(uint64_t acc, uint64_t input) {
  acc += input * kXxhPrime2;
  acc = rotl64(acc, 31);
  acc *= kXxhPrime1;
  return acc;
}

inline uint64_t xxh_merge_round(uint64_t acc, uint64_t val) {
  acc ^= xxh_round(0, val);
  return acc * kXxhPrime1 + kXxhPrime4;
}

}  // namespace detail

/// 64-bit xxHash (XXH64) of a byte buffer. Matches the reference digests for
/// every (input, seed); known-answer vectors are pinned in the test suite.
inline uint64_t xxh64(const void* data, size_t len, uint64_t seed) {
  using namespace detail;
  const auto* p = static_cast<const unsigned char*>(data);
  const unsigned char* end = p + len;
  uint64_t h;

  if (len >= 32) {
    uint64_t v1 = seed + kXxhPrime1 + kXxhPrime2;
    uint64_t v2 = seed + kXxhPrime2;
    uint64_t v3 = seed;
    uint64_t v4 = seed - kXxhPrime1;
    const unsigned char* limit = end - 32;
    do {
      v1 = xxh_round(v1, load64(p));
      v2 = xxh_round(v2, load64(p + 8));
      v3 = xxh_round(v3, load64(p + 16));
      v4 = xxh_round(v4, load64(p + 24));
      p += 32;
    } while (p <= limit);
    h = rotl64(v1, 1) + rotl64(v2, 7) + rotl64(v3, 12) + rotl64(v4, 18);
    h = xxh_merge_round(h, v1);
    h = xxh_merge_round(h, v2);
    h = xxh_merge_round(h, v3);
    h = xxh_merge_round(h, v4);
  } else {
    h = seed + kXxhPrime5;
  }

  h += uint64_t(len);

  while (p + 8 <= end) {
    h ^= xxh_round(0, load64(p));
    h = rotl64(h, 27) * kXxhPrime1 + kXxhPrime4;
    p += 8;
  }
  if (p + 4 <= end) {
    h ^= uint64_t(load32(p)) * kXxhPrime1;
    h = rotl64(h, 23) * kXxhPrime2 + kXxhPrime3;
    p += 4;
  }
  while (p < end) {
    h ^= uint64_t(*p) * kXxhPrime5;
    h = rotl64(h, 11) * kXxhPrime1;
    ++p;
  }

  h ^= h >> 33;
  h *= kXxhPrime2;
  h ^= h >> 29;
  h *= kXxhPrime3;
  h ^= h >> 32;
  return h;
}

inline uint64_t hash_bytes(std::span<const std::byte> data, uint64_t seed) {
  return xxh64(data.data(), data.size(), seed);
}

inline uint64_t hash_string(std::string_view s, uint64_t seed) {
  return xxh64(s.data(), s.size(), seed);
}

/// Hash of a 64-bit value through its little-endian byte representation.
inline uint64_t hash_u64(uint64_t v, uint64_t seed) {
  unsigned char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
  return xxh64(buf, 8, seed);
}

// ===========================================================================
// Key digests and bucket derivation
// ===========================================================================

namespace detail {
// Fixed domain-separation salts. The alternate-bucket hash is intentionally
// unseeded so the pair structure depends only on the fingerprint.
inline constexpr uint64_t kAltBucketSalt = 0x5B4C6F9D2E8A1735ull;
inline constexpr uint64_t kChainSalt = 0xA3F058B67D1E92C4ull;
inline constexpr uint64_t kAttrSalt = 0x1D8E4C29B5F7A630ull;
inline constexpr uint64_t kBloomSaltA = 0x7C92E15A38D0B4F6ull;
inline constexpr uint64_t kBloomSaltB = 0xE60B93D74A2C518Full;
inline constexpr uint64_t kColumnMix = 0x9E3779B97F4A7C15ull;

inline uint64_t column_seed(uint64_t seed, uint32_t column, uint64_t salt) {
  return seed ^ salt ^ (kColumnMix * (uint64_t(column) + 1));
}
}  // namespace detail

inline constexpr bool is_power_of_two(uint64_t v) {
  return v != 0 && (v & (v - 1)) == 0;
}

/// Key fingerprint plus home bucket. fingerprint is never 0 (empty-slot
/// sentinel); bucket is always < the table's bucket count.
struct KeyDigest {
  uint16_t fingerprint = 0;
  uint32_t bucket = 0;
};

/// Derives (fingerprint, bucket) from one 64-bit digest of the key. The
/// fingerprint takes the top 16 bits masked to kappa_bits (with 0 remapped
/// to 1); the bucket takes the low bits, so the two slices are disjoint for
/// any power-of-two m <= 2^32.
inline KeyDigest digest_key(std::span<const std::byte> key, uint32_t kappa_bits,
                            uint32_t num_buckets, uint64_t seed) {
  uint64_t h = hash_bytes(key, seed);
  auto fp = uint16_t((h >> 48) & ((1u << kappa_bits) - 1));
  if (fp == 0) fp = 1;
  return KeyDigest{fp, uint32_t(h & (num_buckets - 1))};
}

inline KeyDigest digest_key(uint64_t key, uint32_t kappa_bits,
                            uint32_t num_buckets, uint64_t seed) {
  unsigned char buf[8];
  for (int i = 0; i < 8; ++i)
    buf[i] = static_cast<unsigned char>(key >> (8 * i));
  return digest_key(std::as_bytes(std::span(buf)), kappa_bits, num_buckets,
                    seed);
}

/// Partial-key alternate bucket: l ^ h(fingerprint), masked to [0, m).
/// Involutive for a fixed fingerprint.
inline uint32_t alternate_bucket(uint32_t bucket, uint16_t fingerprint,
                                 uint32_t num_buckets) {
  uint64_t h = hash_u64(fingerprint, detail::kAltBucketSalt);
  return (bucket ^ uint32_t(h)) & (num_buckets - 1);
}

/// Next bucket in a fingerprint's chain: a one-way hash of the current pair.
/// Symmetric in (bucket, alt_bucket). The hop counter selects an alternative
/// continuation when a cycle has been detected; 0 is the normal chain.
inline uint32_t chain_hop(uint32_t bucket, uint32_t alt_bucket,
                          uint16_t fingerprint, uint32_t hop,
                          uint32_t num_buckets, uint64_t seed) {
  uint32_t lo = bucket < alt_bucket ? bucket : alt_bucket;
  unsigned char buf[12];
  for (int i = 0; i < 4; ++i) buf[i] = static_cast<unsigned char>(lo >> (8 * i));
  buf[4] = static_cast<unsigned char>(fingerprint);
  buf[5] = static_cast<unsigned char>(fingerprint >> 8);
  buf[6] = 0;
  buf[7] = 0;
  for (int i = 0; i < 4; ++i)
    buf[8 + i] = static_cast<unsigned char>(hop >> (8 * i));
  uint64_t h = xxh64(buf, sizeof buf, seed ^ detail::kChainSalt);
  return uint32_t(h & (num_buckets - 1));
}

// ===========================================================================
// Attribute fingerprints
// ===========================================================================

/// Fingerprint of one attribute value in alpha_bits bits, salted by column.
/// Integer values that already fit in alpha_bits pass through verbatim, so
/// small attribute domains are represented exactly.
inline uint8_t digest_attribute(uint32_t column, uint64_t value,
                                uint32_t alpha_bits, uint64_t seed) {
  uint64_t mask = (1ull << alpha_bits) - 1;
  if (value <= mask) return uint8_t(value);
  uint64_t h = hash_u64(value, detail::column_seed(seed, column, detail::kAttrSalt));
  return uint8_t(h & mask);
}

inline uint8_t digest_attribute(uint32_t column, std::string_view value,
                                uint32_t alpha_bits, uint64_t seed) {
  uint64_t mask = (1ull << alpha_bits) - 1;
  uint64_t h = hash_string(value, detail::column_seed(seed, column, detail::kAttrSalt));
  return uint8_t(h & mask);
}

// ===========================================================================
// Bloom bit positions
// ===========================================================================

/// Double-hashed bit positions for a (column, value) pair: h1 + i*h2 mod s
/// with h2 forced odd. Writes num_hashes = out.size() indices.
inline void bloom_positions(uint32_t column, uint64_t value, uint32_t num_bits,
                            uint64_t seed, std::span<uint32_t> out) {
  uint64_t h1 = hash_u64(value, detail::column_seed(seed, column, detail::kBloomSaltA));
  uint64_t h2 = hash_u64(value, detail::column_seed(seed, column, detail::kBloomSaltB)) | 1;
  for (size_t i = 0; i < out.size(); ++i)
    out[i] = uint32_t((h1 + i * h2) % num_bits);
}

inline std::vector<uint32_t> bloom_positions(uint32_t column, uint64_t value,
                                             uint32_t num_hashes,
                                             uint32_t num_bits, uint64_t seed) {
  std::vector<uint32_t> out(num_hashes);
  bloom_positions(column, value, num_bits, seed, out);
  return out;
}

}  // namespace ccf
