#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "ccf/attribute_sketch.hpp"
#include "ccf/config.hpp"
#include "ccf/hashing.hpp"
#include "ccf/rng.hpp"
#include "ccf/table.hpp"

namespace ccf {

struct Row {
  uint64_t key = 0;
  std::vector<uint64_t> attrs;
  friend bool operator==(const Row&, const Row&) = default;
};

enum class InsertStatus : uint8_t {
  Stored,          // row occupies a new entry (or extended a group)
  Deduplicated,    // row already represented; nothing new stored
  SaturatedChain,  // chained variant ran out of bucket pairs; row dropped but
                   // queries for it still return true
  Failed,          // kick loop terminated; caller should rebuild larger
};

struct InsertResult {
  InsertStatus status = InsertStatus::Stored;
  uint32_t chain_depth = 0;  // bucket-pair hops consumed

  bool handled() const { return status != InsertStatus::Failed; }
};

struct FilterStats {
  uint64_t stored = 0;
  uint64_t deduplicated = 0;
  uint64_t saturated = 0;
  uint64_t failed = 0;
  uint64_t kicks = 0;
  uint64_t conversions = 0;
  uint64_t group_kicks = 0;
};

// ===========================================================================
// Chain walking
// ===========================================================================

/// Deterministic sequence of bucket pairs for one fingerprint. The walk is a
/// pure function of (first bucket, fingerprint, m, seed), so insertion and
/// query always traverse the same pairs. With cycle detection enabled a
/// revisited pair (found by tortoise/hare meeting) bumps the hop counter,
/// extending the chain instead of looping.
class ChainWalker {
 public:
  ChainWalker(uint32_t first_bucket, uint16_t fingerprint, uint32_t num_buckets,
              uint64_t seed, bool detect_cycles)
      : fp_(fingerprint),
        m_(num_buckets),
        seed_(seed),
        detect_(detect_cycles),
        cur_(first_bucket),
        cur_alt_(alternate_bucket(first_bucket, fingerprint, num_buckets)),
        tort_(cur_),
        tort_alt_(cur_alt_) {}

  uint32_t bucket() const { return cur_; }
  uint32_t alt() const { return cur_alt_; }
  uint32_t generation() const { return gen_; }

  void advance() {
    ++steps_;
    uint32_t next = chain_hop(cur_, cur_alt_, fp_, gen_, m_, seed_);
    uint32_t next_alt = alternate_bucket(next, fp_, m_);
    if (detect_) {
      if ((steps_ & 1) == 0) {
        tort_ = chain_hop(tort_, tort_alt_, fp_, gen_, m_, seed_);
        tort_alt_ = alternate_bucket(tort_, fp_, m_);
      }
      if (same_pair(next, next_alt, tort_, tort_alt_)) {
        ++gen_;
        next = chain_hop(cur_, cur_alt_, fp_, gen_, m_, seed_);
        next_alt = alternate_bucket(next, fp_, m_);
        tort_ = next;
        tort_alt_ = next_alt;
        steps_ = 0;
      }
    }
    cur_ = next;
    cur_alt_ = next_alt;
  }

 private:
  static bool same_pair(uint32_t a, uint32_t a2, uint32_t b, uint32_t b2) {
    return std::minmax(a, a2) == std::minmax(b, b2);
  }

  uint16_t fp_;
  uint32_t m_;
  uint64_t seed_;
  bool detect_;
  uint32_t cur_, cur_alt_;
  uint32_t tort_, tort_alt_;
  uint32_t gen_ = 0;
  uint64_t steps_ = 0;
};

// ===========================================================================
// Key-fingerprint filter (output of predicate-only queries)
// ===========================================================================

/// Plain array of key fingerprints with the same geometry and seed as the
/// filter that produced it. Answers key-only membership.
struct KeyFilter {
  uint32_t num_buckets = 0;
  uint32_t bucket_size = 0;
  uint32_t kappa_bits = 12;
  uint64_t seed = 0;
  std::vector<uint16_t> slots;

  bool query_digest(const KeyDigest& kd) const {
    uint32_t alt = alternate_bucket(kd.bucket, kd.fingerprint, num_buckets);
    return bucket_has(kd.bucket, kd.fingerprint) ||
           (alt != kd.bucket && bucket_has(alt, kd.fingerprint));
  }

  bool query(uint64_t key) const {
    return query_digest(digest_key(key, kappa_bits, num_buckets, seed));
  }

  bool query(std::span<const std::byte> key) const {
    return query_digest(digest_key(key, kappa_bits, num_buckets, seed));
  }

  uint64_t occupied() const {
    uint64_t n = 0;
    for (uint16_t fp : slots)
      if (fp != 0) ++n;
    return n;
  }

 private:
  bool bucket_has(uint32_t l, uint16_t fp) const {
    for (uint32_t s = 0; s < bucket_size; ++s)
      if (slots[size_t(l) * bucket_size + s] == fp) return true;
    return false;
  }
};

// ===========================================================================
// The conditional cuckoo filter
// ===========================================================================

class ConditionalCuckooFilter {
 public:
  explicit ConditionalCuckooFilter(FilterConfig cfg)
      : cfg_(cfg),
        table_(cfg.num_buckets, cfg.bucket_size),
        rng_(cfg.seed ^ 0xC3D2E1F005588443ull) {
    cfg_.validate();
  }

  const FilterConfig& config() const { return cfg_; }
  const Table& table() const { return table_; }
  const FilterStats& stats() const { return stats_; }
  double load_factor() const { return table_.load_factor(); }
  uint64_t occupied_entries() const { return table_.occupied(); }

  KeyDigest digest(uint64_t key) const {
    return digest_key(key, cfg_.kappa_bits, cfg_.num_buckets, cfg_.seed);
  }
  KeyDigest digest(std::span<const std::byte> key) const {
    return digest_key(key, cfg_.kappa_bits, cfg_.num_buckets, cfg_.seed);
  }

  // --- insertion -----------------------------------------------------------

  InsertResult insert(uint64_t key, std::span<const uint64_t> attrs) {
    return insert_digested(digest(key), attrs);
  }
  InsertResult insert(std::span<const std::byte> key,
                      std::span<const uint64_t> attrs) {
    return insert_digested(digest(key), attrs);
  }
  InsertResult insert(uint64_t key, std::initializer_list<uint64_t> attrs) {
    return insert(key, std::span(attrs.begin(), attrs.size()));
  }
  InsertResult insert(const Row& row) { return insert(row.key, row.attrs); }

  // --- queries -------------------------------------------------------------

  /// Key-only membership. Every variant inspects exactly the first bucket
  /// pair; chains never extend the probe.
  bool query(uint64_t key) const { return query_digested(digest(key)); }
  bool query(std::span<const std::byte> key) const {
    return query_digested(digest(key));
  }

  bool query_pred(uint64_t key, const Predicate& pred) const {
    return query_pred_digested(digest(key), pred);
  }
  bool query_pred(std::span<const std::byte> key, const Predicate& pred) const {
    return query_pred_digested(digest(key), pred);
  }

  /// Predicate-only query: project the filter down to the key fingerprints
  /// whose attribute sketch matches. Bloom and Mixed variants only.
  KeyFilter predicate_query(const Predicate& pred) const {
    if (cfg_.variant != Variant::Bloom && cfg_.variant != Variant::Mixed)
      throw std::invalid_argument(
          "predicate-only queries need the Bloom or Mixed variant");
    check_pred(pred);
    KeyFilter kf{cfg_.num_buckets, cfg_.bucket_size, cfg_.kappa_bits, cfg_.seed,
                 std::vector<uint16_t>(table_.capacity(), 0)};
    std::map<std::pair<uint32_t, uint16_t>, bool> group_verdicts;
    for (uint32_t l = 0; l < cfg_.num_buckets; ++l) {
      auto entries = table_.bucket(l);
      for (uint32_t s = 0; s < cfg_.bucket_size; ++s) {
        const Entry& e = entries[s];
        if (e.empty()) continue;
        bool keep;
        if (e.converted) {
          uint32_t alt = alternate_bucket(l, e.fingerprint, cfg_.num_buckets);
          auto key = std::make_pair(std::min(l, alt), e.fingerprint);
          auto it = group_verdicts.find(key);
          if (it == group_verdicts.end()) {
            BloomGroup g = table_.read_group(l, alt, e.fingerprint, cfg_);
            it = group_verdicts
                     .emplace(key, group_matches(g, pred, cfg_.alpha_bits,
                                                 cfg_.seed))
                     .first;
          }
          keep = it->second;
        } else if (cfg_.variant == Variant::Bloom) {
          keep = bloom_matches(std::get<BloomBits>(e.payload), pred,
                               cfg_.bloom_hashes, cfg_.seed);
        } else {
          keep = vector_matches(std::get<FingerprintVector>(e.payload), pred,
                                cfg_.alpha_bits, cfg_.seed);
        }
        if (keep) kf.slots[size_t(l) * cfg_.bucket_size + s] = e.fingerprint;
      }
    }
    return kf;
  }

  friend bool operator==(const ConditionalCuckooFilter& a,
                         const ConditionalCuckooFilter& b) {
    return a.cfg_ == b.cfg_ && a.table_ == b.table_;
  }

  /// Restores a filter from deserialized parts.
  static ConditionalCuckooFilter adopt(FilterConfig cfg, Table table) {
    ConditionalCuckooFilter f(cfg);
    f.table_ = std::move(table);
    return f;
  }

 private:
  bool multiset_mode() const { return cfg_.num_attrs == 0; }

  /// Bucket pairs an insert or query may examine. Unbounded chains get a
  /// generous hard cap so degenerate all-saturated walks terminate; insert
  /// and query share the constant, which preserves the no-false-negative
  /// guarantee.
  uint32_t chain_budget() const {
    if (!cfg_.chain_unbounded()) return cfg_.max_chain;
    uint64_t cap = uint64_t(4) * cfg_.num_buckets + 64;
    return uint32_t(std::min<uint64_t>(cap, 0xFFFFFFFEull));
  }

  void check_pred(const Predicate& pred) const {
    for (const auto& [column, values] : pred.clauses) {
      if (column >= cfg_.num_attrs)
        throw std::invalid_argument("predicate column out of range");
      if (values.empty())
        throw std::invalid_argument("predicate clause has no accepted values");
    }
  }

  struct Loc {
    uint32_t bucket;
    uint32_t slot;
  };

  std::optional<Loc> find_fingerprint(uint32_t l, uint32_t alt,
                                      uint16_t fp) const {
    for (uint32_t s = 0; s < cfg_.bucket_size; ++s)
      if (table_.at(l, s).fingerprint == fp) return Loc{l, s};
    if (alt != l)
      for (uint32_t s = 0; s < cfg_.bucket_size; ++s)
        if (table_.at(alt, s).fingerprint == fp) return Loc{alt, s};
    return std::nullopt;
  }

  bool vector_dup_present(uint32_t l, uint32_t alt, uint16_t fp,
                          const FingerprintVector& fps) const {
    auto scan = [&](uint32_t bucket) {
      for (const Entry& e : table_.bucket(bucket)) {
        if (e.fingerprint != fp || e.converted) continue;
        const auto* v = std::get_if<FingerprintVector>(&e.payload);
        if (v && *v == fps) return true;
      }
      return false;
    };
    return scan(l) || (alt != l && scan(alt));
  }

  InsertResult place_or_kick(uint32_t l, uint32_t alt, Entry e,
                             uint32_t depth) {
    if (int s = table_.free_slot(l); s >= 0) {
      table_.place(l, uint32_t(s), std::move(e));
      return {InsertStatus::Stored, depth};
    }
    KickOutcome k =
        table_.kick_insert(alt, std::move(e), cfg_, rng_, &stats_.group_kicks);
    stats_.kicks += k.kicks_used;
    return {k.ok() ? InsertStatus::Stored : InsertStatus::Failed, depth};
  }

  InsertResult insert_digested(KeyDigest kd, std::span<const uint64_t> attrs) {
    if (attrs.size() != cfg_.num_attrs)
      throw std::invalid_argument("attribute vector width mismatch");
    InsertResult r;
    switch (cfg_.variant) {
      case Variant::Plain:
        r = insert_plain(kd, make_fingerprint_vector(attrs, cfg_.alpha_bits,
                                                     cfg_.seed));
        break;
      case Variant::Bloom:
        r = insert_bloom(kd, attrs);
        break;
      case Variant::Mixed:
        r = insert_mixed(kd, make_fingerprint_vector(attrs, cfg_.alpha_bits,
                                                     cfg_.seed));
        break;
      case Variant::Chained:
        r = insert_chained(kd, make_fingerprint_vector(attrs, cfg_.alpha_bits,
                                                       cfg_.seed));
        break;
    }
    switch (r.status) {
      case InsertStatus::Stored: ++stats_.stored; break;
      case InsertStatus::Deduplicated: ++stats_.deduplicated; break;
      case InsertStatus::SaturatedChain: ++stats_.saturated; break;
      case InsertStatus::Failed: ++stats_.failed; break;
    }
    return r;
  }

  InsertResult insert_plain(KeyDigest kd, FingerprintVector fps) {
    uint32_t l = kd.bucket;
    uint32_t alt = alternate_bucket(l, kd.fingerprint, cfg_.num_buckets);
    if (!multiset_mode() && vector_dup_present(l, alt, kd.fingerprint, fps))
      return {InsertStatus::Deduplicated, 0};
    return place_or_kick(l, alt, Entry{kd.fingerprint, false, std::move(fps)},
                         0);
  }

  InsertResult insert_bloom(KeyDigest kd, std::span<const uint64_t> attrs) {
    uint32_t l = kd.bucket;
    uint32_t alt = alternate_bucket(l, kd.fingerprint, cfg_.num_buckets);
    if (auto loc = find_fingerprint(l, alt, kd.fingerprint)) {
      // Fingerprint already present: union this row's attributes into its
      // sketch. Distinct keys that collide on (pair, fingerprint) share the
      // sketch, which only ever adds false positives.
      auto& bits = std::get<BloomBits>(table_.at(loc->bucket, loc->slot).payload);
      for (uint32_t j = 0; j < attrs.size(); ++j)
        bloom_insert(bits, j, attrs[j], cfg_.bloom_hashes, cfg_.seed);
      return {InsertStatus::Deduplicated, 0};
    }
    BloomBits bits(cfg_.bloom_bits);
    for (uint32_t j = 0; j < attrs.size(); ++j)
      bloom_insert(bits, j, attrs[j], cfg_.bloom_hashes, cfg_.seed);
    return place_or_kick(l, alt, Entry{kd.fingerprint, false, std::move(bits)},
                         0);
  }

  InsertResult insert_mixed(KeyDigest kd, FingerprintVector fps) {
    uint32_t l = kd.bucket;
    uint32_t alt = alternate_bucket(l, kd.fingerprint, cfg_.num_buckets);
    if (table_.has_group(l, alt, kd.fingerprint)) {
      BloomGroup g = table_.read_group(l, alt, kd.fingerprint, cfg_);
      if (!group_insert_row(g, fps, cfg_.seed))
        return {InsertStatus::Deduplicated, 0};
      table_.write_group(l, alt, g, cfg_);
      return {InsertStatus::Stored, 0};
    }
    if (!multiset_mode() && vector_dup_present(l, alt, kd.fingerprint, fps))
      return {InsertStatus::Deduplicated, 0};
    if (table_.count_fingerprint(l, alt, kd.fingerprint) >= cfg_.max_dupes) {
      convert_pair(l, alt, kd.fingerprint, fps);
      return {InsertStatus::Stored, 0};
    }
    return place_or_kick(l, alt, Entry{kd.fingerprint, false, std::move(fps)},
                         0);
  }

  /// Replaces the d resident fingerprint vectors with one Bloom group that
  /// also absorbs the incoming row (the d+1-th distinct one).
  void convert_pair(uint32_t l, uint32_t alt, uint16_t fp,
                    const FingerprintVector& incoming) {
    std::vector<Loc> locs;
    std::vector<FingerprintVector> vectors;
    std::vector<uint16_t> prints;
    auto gather = [&](uint32_t bucket) {
      for (uint32_t s = 0; s < cfg_.bucket_size; ++s) {
        const Entry& e = table_.at(bucket, s);
        if (e.fingerprint != fp) continue;
        locs.push_back({bucket, s});
        vectors.push_back(std::get<FingerprintVector>(e.payload));
        prints.push_back(e.fingerprint);
      }
    };
    gather(l);
    if (alt != l) gather(alt);
    assert(locs.size() == cfg_.max_dupes);  // the cap held before conversion

    std::vector<const FingerprintVector*> ptrs;
    for (const auto& v : vectors) ptrs.push_back(&v);
    BloomGroup g = convert_to_group(fp, prints, ptrs, incoming, cfg_);

    for (const Loc& loc : locs) {
      Entry& e = table_.at(loc.bucket, loc.slot);
      e.converted = true;
      e.payload = GroupSegment{};
    }
    table_.write_group(l, alt, g, cfg_);
    ++stats_.conversions;
  }

  InsertResult insert_chained(KeyDigest kd, FingerprintVector fps) {
    ChainWalker walker(kd.bucket, kd.fingerprint, cfg_.num_buckets, cfg_.seed,
                       cfg_.cycle_detection);
    uint32_t budget = chain_budget();
    uint32_t depth = 0;
    for (;;) {
      uint32_t l = walker.bucket();
      uint32_t alt = walker.alt();
      if (!multiset_mode() && vector_dup_present(l, alt, kd.fingerprint, fps))
        return {InsertStatus::Deduplicated, depth};
      if (table_.count_fingerprint(l, alt, kd.fingerprint) >= cfg_.max_dupes) {
        if (--budget == 0) return {InsertStatus::SaturatedChain, depth};
        walker.advance();
        ++depth;
        continue;
      }
      return place_or_kick(l, alt, Entry{kd.fingerprint, false, std::move(fps)},
                           depth);
    }
  }

  bool query_digested(KeyDigest kd) const {
    uint32_t l = kd.bucket;
    uint32_t alt = alternate_bucket(l, kd.fingerprint, cfg_.num_buckets);
    return find_fingerprint(l, alt, kd.fingerprint).has_value();
  }

  bool pair_has_vector_match(uint32_t l, uint32_t alt, uint16_t fp,
                             const Predicate& pred) const {
    auto scan = [&](uint32_t bucket) {
      for (const Entry& e : table_.bucket(bucket)) {
        if (e.fingerprint != fp || e.converted) continue;
        const auto* v = std::get_if<FingerprintVector>(&e.payload);
        if (v && vector_matches(*v, pred, cfg_.alpha_bits, cfg_.seed))
          return true;
      }
      return false;
    };
    return scan(l) || (alt != l && scan(alt));
  }

  bool query_pred_digested(KeyDigest kd, const Predicate& pred) const {
    check_pred(pred);
    uint32_t l = kd.bucket;
    uint32_t alt = alternate_bucket(l, kd.fingerprint, cfg_.num_buckets);
    switch (cfg_.variant) {
      case Variant::Plain:
        return pair_has_vector_match(l, alt, kd.fingerprint, pred);
      case Variant::Bloom: {
        auto scan = [&](uint32_t bucket) {
          for (const Entry& e : table_.bucket(bucket)) {
            if (e.fingerprint != kd.fingerprint) continue;
            if (bloom_matches(std::get<BloomBits>(e.payload), pred,
                              cfg_.bloom_hashes, cfg_.seed))
              return true;
          }
          return false;
        };
        return scan(l) || (alt != l && scan(alt));
      }
      case Variant::Mixed: {
        if (table_.has_group(l, alt, kd.fingerprint)) {
          BloomGroup g = table_.read_group(l, alt, kd.fingerprint, cfg_);
          return group_matches(g, pred, cfg_.alpha_bits, cfg_.seed);
        }
        return pair_has_vector_match(l, alt, kd.fingerprint, pred);
      }
      case Variant::Chained: {
        ChainWalker walker(kd.bucket, kd.fingerprint, cfg_.num_buckets,
                           cfg_.seed, cfg_.cycle_detection);
        uint32_t budget = chain_budget();
        for (;;) {
          uint32_t cl = walker.bucket();
          uint32_t calt = walker.alt();
          if (pair_has_vector_match(cl, calt, kd.fingerprint, pred))
            return true;
          if (table_.count_fingerprint(cl, calt, kd.fingerprint) <
              cfg_.max_dupes)
            return false;
          // Pair is saturated: the row may live further down the chain. An
          // exhausted budget must answer true, since insertion would have
          // dropped the row at the same point.
          if (--budget == 0) return true;
          walker.advance();
        }
      }
    }
    return false;
  }

  FilterConfig cfg_;
  Table table_;
  FilterStats stats_;
  Rng rng_;
};

/// Resized copy: grows the bucket count by `growth` (rounded to a power of
/// two) and reinserts every row. A build that still fails leaves nonzero
/// stats().failed on the result.
inline ConditionalCuckooFilter rebuild(const ConditionalCuckooFilter& old,
                                       std::span<const Row> rows,
                                       double growth = 2.0) {
  FilterConfig cfg = old.config();
  cfg.num_buckets = uint32_t(
      next_power_of_two(uint64_t(std::ceil(double(cfg.num_buckets) * growth))));
  ConditionalCuckooFilter fresh(cfg);
  for (const Row& row : rows) fresh.insert(row);
  return fresh;
}

}  // namespace ccf
