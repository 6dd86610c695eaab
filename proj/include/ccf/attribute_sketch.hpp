#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <vector>

#include "ccf/bitvector.hpp"
#include "ccf/config.hpp"
#include "ccf/hashing.hpp"

// The three attribute summaries stored next to a key fingerprint: a vector of
// per-column attribute fingerprints, a per-entry Bloom sketch over raw
// (column, value) pairs, and the converted-group Bloom filter that replaces d
// fingerprint vectors once a bucket pair saturates.

namespace ccf {

/// One attribute fingerprint per column; width = number of attribute columns.
using FingerprintVector = std::vector<uint8_t>;

/// Per-entry Bloom sketch bits.
using BloomBits = BitVector;

/// Conjunction of equality clauses, one per column. A clause holds the set of
/// accepted values: a singleton for plain equality, several after a range
/// predicate has been binned into an in-list. An empty predicate is the
/// key-only query.
struct Predicate {
  std::map<uint32_t, std::vector<uint64_t>> clauses;

  bool empty() const { return clauses.empty(); }

  Predicate& add(uint32_t column, uint64_t value) {
    clauses[column].push_back(value);
    return *this;
  }

  Predicate& add_in_list(uint32_t column, std::vector<uint64_t> values) {
    auto& c = clauses[column];
    c.insert(c.end(), values.begin(), values.end());
    return *this;
  }

  static Predicate equals(uint32_t column, uint64_t value) {
    return Predicate{}.add(column, value);
  }

  /// The row's own attributes as an all-columns equality predicate.
  static Predicate exact_row(std::span<const uint64_t> attrs) {
    Predicate p;
    for (uint32_t j = 0; j < attrs.size(); ++j) p.add(j, attrs[j]);
    return p;
  }
};

// ===========================================================================
// Fingerprint vectors
// ===========================================================================

inline FingerprintVector make_fingerprint_vector(std::span<const uint64_t> attrs,
                                                 uint32_t alpha_bits,
                                                 uint64_t seed) {
  FingerprintVector out(attrs.size());
  for (uint32_t j = 0; j < attrs.size(); ++j)
    out[j] = digest_attribute(j, attrs[j], alpha_bits, seed);
  return out;
}

/// True iff every clause has some accepted value whose attribute fingerprint
/// equals the stored one. Vacuously true for the empty predicate.
inline bool vector_matches(const FingerprintVector& stored, const Predicate& pred,
                           uint32_t alpha_bits, uint64_t seed) {
  for (const auto& [column, values] : pred.clauses) {
    if (column >= stored.size())
      throw std::invalid_argument("predicate column out of range");
    bool any = false;
    for (uint64_t v : values) {
      if (digest_attribute(column, v, alpha_bits, seed) == stored[column]) {
        any = true;
        break;
      }
    }
    if (!any) return false;
  }
  return true;
}

// ===========================================================================
// Per-entry Bloom sketches (raw attribute values)
// ===========================================================================

inline void bloom_insert(BloomBits& bits, uint32_t column, uint64_t value,
                         uint32_t num_hashes, uint64_t seed) {
  uint32_t pos[64];
  bloom_positions(column, value, bits.size(), seed,
                  std::span(pos, num_hashes));
  for (uint32_t i = 0; i < num_hashes; ++i) bits.set(pos[i]);
}

inline bool bloom_contains(const BloomBits& bits, uint32_t column,
                           uint64_t value, uint32_t num_hashes, uint64_t seed) {
  uint32_t pos[64];
  bloom_positions(column, value, bits.size(), seed,
                  std::span(pos, num_hashes));
  for (uint32_t i = 0; i < num_hashes; ++i)
    if (!bits.test(pos[i])) return false;
  return true;
}

inline bool bloom_matches(const BloomBits& bits, const Predicate& pred,
                          uint32_t num_hashes, uint64_t seed) {
  for (const auto& [column, values] : pred.clauses) {
    bool any = false;
    for (uint64_t v : values) {
      if (bloom_contains(bits, column, v, num_hashes, seed)) {
        any = true;
        break;
      }
    }
    if (!any) return false;
  }
  return true;
}

// ===========================================================================
// Converted groups: one Bloom filter packed across d saturated entries
// ===========================================================================

/// Bloom filter built over the (column, attribute fingerprint) pairs of the
/// d+1 rows that saturated a bucket pair. Physically it spans the d entries
/// those rows occupied; entry_count_low/high record the split across the
/// lower- and higher-indexed bucket.
struct BloomGroup {
  uint16_t fingerprint = 0;
  uint8_t entry_count_low = 0;
  uint8_t entry_count_high = 0;
  uint8_t num_hashes = 1;
  BitVector bits;
};

/// d*s - 2*(|kappa| + ceil(log2 d)): the payload left in d entries of s bits
/// after each bucket keeps one fingerprint copy and an entry count.
inline uint32_t group_total_bits(const FilterConfig& cfg) {
  uint32_t header = cfg.kappa_bits + cfg.group_header_count_bits();
  return cfg.max_dupes * cfg.entry_bits() - 2 * header;
}

/// Optimal-occupancy hash count assuming (d+1) rows contribute num_attrs
/// pairs each: floor(alpha_bits * d/(d+1) * ln 2), at least 1.
inline uint32_t group_num_hashes(const FilterConfig& cfg) {
  double d = double(cfg.max_dupes);
  double h = double(cfg.alpha_bits) * (d / (d + 1.0)) * std::log(2.0);
  auto n = uint32_t(h);
  return n < 1 ? 1 : n;
}

/// Share of the group's bits held by a bucket with r of the d entries:
/// r*s - (|kappa| + ceil(log2 d)), clamped to [0, totalBits]. A bucket with
/// no group entries holds no bits.
inline uint32_t group_side_bits(uint32_t r, const FilterConfig& cfg) {
  if (r == 0) return 0;
  uint32_t total = group_total_bits(cfg);
  uint32_t header = cfg.kappa_bits + cfg.group_header_count_bits();
  uint64_t capacity = uint64_t(r) * cfg.entry_bits();
  uint32_t side = capacity > header ? uint32_t(capacity - header) : 0;
  return side < total ? side : total;
}

inline void group_insert_positions(const BloomGroup& g, uint32_t column,
                                   uint8_t attr_fp, uint64_t seed,
                                   std::span<uint32_t> out) {
  bloom_positions(column, attr_fp, g.bits.size(), seed, out);
}

/// Adds one row's fingerprint vector to the group. Returns true if any bit
/// changed (false means the row was already indistinguishable from content).
inline bool group_insert_row(BloomGroup& g, const FingerprintVector& fps,
                             uint64_t seed) {
  bool changed = false;
  uint32_t pos[64];
  for (uint32_t j = 0; j < fps.size(); ++j) {
    group_insert_positions(g, j, fps[j], seed, std::span(pos, g.num_hashes));
    for (uint32_t i = 0; i < g.num_hashes; ++i)
      changed |= g.bits.set_changed(pos[i]);
  }
  return changed;
}

/// Builds the group from the d resident fingerprint vectors plus the incoming
/// row that triggered conversion. All participants must share the key
/// fingerprint.
inline BloomGroup convert_to_group(
    uint16_t fingerprint, std::span<const uint16_t> participant_fps,
    std::span<const FingerprintVector* const> participant_vectors,
    const FingerprintVector& incoming, const FilterConfig& cfg) {
  for (uint16_t fp : participant_fps)
    if (fp != fingerprint)
      throw std::invalid_argument("group participants disagree on fingerprint");
  BloomGroup g;
  g.fingerprint = fingerprint;
  g.num_hashes = uint8_t(group_num_hashes(cfg));
  g.bits = BitVector(group_total_bits(cfg));
  for (const FingerprintVector* v : participant_vectors)
    group_insert_row(g, *v, cfg.seed);
  group_insert_row(g, incoming, cfg.seed);
  return g;
}

/// Bloom membership test over the reassembled group, clause semantics as
/// bloom_matches but on attribute fingerprints (the double-hash path).
inline bool group_matches(const BloomGroup& g, const Predicate& pred,
                          uint32_t alpha_bits, uint64_t seed) {
  uint32_t pos[64];
  for (const auto& [column, values] : pred.clauses) {
    bool any = false;
    for (uint64_t v : values) {
      uint8_t fp = digest_attribute(column, v, alpha_bits, seed);
      group_insert_positions(g, column, fp, seed, std::span(pos, g.num_hashes));
      bool all = true;
      for (uint32_t i = 0; i < g.num_hashes; ++i)
        if (!g.bits.test(pos[i])) {
          all = false;
          break;
        }
      if (all) {
        any = true;
        break;
      }
    }
    if (!any) return false;
  }
  return true;
}

}  // namespace ccf
