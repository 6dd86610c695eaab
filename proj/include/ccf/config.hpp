#pragma once

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "ccf/hashing.hpp"

namespace ccf {

enum class Variant : uint8_t { Plain = 0, Bloom = 1, Mixed = 2, Chained = 3 };

inline const char* variant_name(Variant v) {
  switch (v) {
    case Variant::Plain: return "plain";
    case Variant::Bloom: return "bloom";
    case Variant::Mixed: return "mixed";
    case Variant::Chained: return "chained";
  }
  return "?";
}

inline Variant parse_variant(const std::string& s) {
  if (s == "plain") return Variant::Plain;
  if (s == "bloom") return Variant::Bloom;
  if (s == "mixed") return Variant::Mixed;
  if (s == "chained") return Variant::Chained;
  throw std::invalid_argument("unknown variant: " + s);
}

/// Unbounded chain length sentinel.
inline constexpr uint32_t kUnboundedChain = 0xFFFFFFFFu;

inline uint64_t next_power_of_two(uint64_t v) {
  if (v <= 1) return 1;
  return std::bit_ceil(v);
}

struct FilterConfig {
  Variant variant = Variant::Chained;
  uint32_t num_buckets = 1024;  // m, power of two
  uint32_t bucket_size = 6;     // b entries per bucket
  uint32_t max_dupes = 3;       // d, duplicate fingerprints per bucket pair
  uint32_t max_chain = kUnboundedChain;  // L_max bucket pairs per fingerprint
  uint32_t kappa_bits = 12;     // key fingerprint width
  uint32_t alpha_bits = 8;      // attribute fingerprint width
  uint32_t num_attrs = 1;       // attribute columns (0 = bare key multiset)
  uint32_t bloom_bits = 16;     // per-entry Bloom sketch width (Bloom variant)
  uint32_t bloom_hashes = 2;
  uint32_t max_kicks = 500;
  uint64_t seed = 0;
  bool cycle_detection = true;

  friend bool operator==(const FilterConfig&, const FilterConfig&) = default;

  bool chain_unbounded() const { return max_chain == kUnboundedChain; }

  /// Analytic payload width of one entry in bits (storage is not bit-packed;
  /// these figures drive the size and efficiency accounting).
  uint32_t payload_bits() const {
    if (variant == Variant::Bloom) return bloom_bits;
    return num_attrs * alpha_bits;
  }

  uint32_t flag_bits() const { return variant == Variant::Mixed ? 1 : 0; }

  /// Bits of one entry: fingerprint + attribute payload + converted flag.
  uint32_t entry_bits() const {
    return kappa_bits + payload_bits() + flag_bits();
  }

  void validate() const {
    if (!is_power_of_two(num_buckets))
      throw std::invalid_argument("num_buckets must be a power of two");
    if (kappa_bits < 4 || kappa_bits > 16)
      throw std::invalid_argument("kappa_bits must be in [4, 16]");
    if (alpha_bits != 4 && alpha_bits != 8)
      throw std::invalid_argument("alpha_bits must be 4 or 8");
    if (bucket_size == 0) throw std::invalid_argument("bucket_size must be >= 1");
    if (max_dupes == 0) throw std::invalid_argument("max_dupes must be >= 1");
    if (max_dupes > 2 * bucket_size)
      throw std::invalid_argument("max_dupes cannot exceed a bucket pair");
    if (max_chain == 0) throw std::invalid_argument("max_chain must be >= 1");
    if (variant == Variant::Bloom && (bloom_bits == 0 || bloom_hashes == 0))
      throw std::invalid_argument("Bloom variant needs bloom_bits/bloom_hashes");
    if (bloom_hashes > 64)
      throw std::invalid_argument("bloom_hashes cannot exceed 64");
    if (variant == Variant::Mixed) {
      // A converted group must have room for its two headers.
      uint32_t header = 2 * (kappa_bits + group_header_count_bits());
      if (max_dupes * entry_bits() <= header)
        throw std::invalid_argument("group payload would be empty; "
                                    "increase alpha_bits or max_dupes");
    }
  }

  uint32_t group_header_count_bits() const {
    return uint32_t(std::bit_width(max_dupes - 1));  // ceil(log2 d), 0 for d=1
  }
};

/// Total analytic size of the table in bits: m * b * entry_bits.
inline uint64_t size_bits(const FilterConfig& cfg) {
  return uint64_t(cfg.num_buckets) * cfg.bucket_size * cfg.entry_bits();
}

}  // namespace ccf
