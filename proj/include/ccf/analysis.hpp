#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <vector>

#include "ccf/config.hpp"
#include "ccf/filter.hpp"

// Closed-form predictors for FPR and sizing. The FPR formulas are upper
// bounds, not estimates; the entry predictor is an upper bound that is tight
// when per-key duplicate counts stay under the variant's cap.

namespace ccf {

/// Duplicate structure of an input: distinct key count and the distribution
/// of A = number of distinct attribute vectors per key.
struct DataProfile {
  uint64_t distinct_keys = 0;
  std::map<uint64_t, double> dup_dist;  // A -> fraction of keys
  uint32_t num_attrs = 0;

  static DataProfile from_rows(std::span<const Row> rows) {
    DataProfile p;
    std::map<uint64_t, std::map<std::vector<uint64_t>, bool>> per_key;
    for (const Row& r : rows) {
      per_key[r.key][r.attrs] = true;
      p.num_attrs = uint32_t(r.attrs.size());
    }
    p.distinct_keys = per_key.size();
    std::map<uint64_t, uint64_t> hist;
    for (const auto& [key, set] : per_key) ++hist[set.size()];
    for (const auto& [a, n] : hist)
      p.dup_dist[a] = double(n) / double(p.distinct_keys);
    return p;
  }

  double mean_dupes() const {
    double m = 0;
    for (const auto& [a, pr] : dup_dist) m += double(a) * pr;
    return m;
  }

  uint64_t max_dupes() const {
    return dup_dist.empty() ? 0 : dup_dist.rbegin()->first;
  }

  /// E[min(A, cap)].
  double expected_capped(double cap) const {
    double m = 0;
    for (const auto& [a, pr] : dup_dist) m += std::min(double(a), cap) * pr;
    return m;
  }
};

/// Key-only FPR bound: E[D] * 2^-kappa, with D the occupied entries in the
/// probed bucket pair.
inline double predict_fpr_key(double mean_pair_occupancy, uint32_t kappa_bits) {
  return mean_pair_occupancy * std::pow(2.0, -double(kappa_bits));
}

/// Key+predicate FPR bound for fingerprint-vector sketches:
/// d * L_max * E[2^(-alpha * V)], V = clauses not matching the probed row.
/// Clamped to 1 (it is a bound on a probability). `mismatch_dist` maps V to
/// its probability over queries; V >= 1 for false-positive-eligible queries.
inline double predict_fpr_chained(
    uint32_t max_dupes, double max_chain, uint32_t alpha_bits,
    std::span<const std::pair<uint32_t, double>> mismatch_dist) {
  double e = 0;
  for (const auto& [v, pr] : mismatch_dist)
    e += pr * std::pow(2.0, -double(alpha_bits) * double(v));
  double bound = double(max_dupes) * max_chain * e;
  return std::min(bound, 1.0);
}

inline double predict_fpr_chained(uint32_t max_dupes, double max_chain,
                                  uint32_t alpha_bits,
                                  uint32_t mismatched_clauses) {
  std::pair<uint32_t, double> point{mismatched_clauses, 1.0};
  return predict_fpr_chained(max_dupes, max_chain, alpha_bits,
                             std::span(&point, 1));
}

/// Bloom sketch FPR: ((1 - e^(-h n / s))^h)^v for v never-inserted clauses.
/// This is the standard approximation and underestimates small filters.
inline double predict_fpr_bloom(uint32_t bits, uint32_t hashes,
                                double inserted_pairs,
                                uint32_t absent_clauses) {
  if (bits < 1 || hashes < 1 || inserted_pairs < 1)
    throw std::invalid_argument("bits, hashes and inserted pairs must be >= 1");
  double fill = 1.0 - std::exp(-double(hashes) * inserted_pairs / double(bits));
  return std::pow(std::pow(fill, double(hashes)), double(absent_clauses));
}

/// Upper bound on occupied entries: per key min(A, cap) with the variant's
/// cap (Bloom stores one entry per key regardless of A).
inline double predict_entries(const DataProfile& profile, Variant variant,
                              uint32_t max_dupes, uint32_t max_chain,
                              uint32_t bucket_size) {
  double n_k = double(profile.distinct_keys);
  switch (variant) {
    case Variant::Bloom:
      return n_k;
    case Variant::Mixed:
      return n_k * profile.expected_capped(double(max_dupes));
    case Variant::Chained: {
      double cap = max_chain == kUnboundedChain
                       ? double(profile.max_dupes())
                       : double(max_dupes) * double(max_chain);
      return n_k * profile.expected_capped(cap);
    }
    case Variant::Plain:
      return n_k * profile.expected_capped(2.0 * double(bucket_size));
  }
  return n_k;
}

/// Rule-of-thumb geometry: b = 2d and m the next power of two holding the
/// predicted entries at the target load factor.
inline FilterConfig suggest_config(const DataProfile& profile, Variant variant,
                                   double target_load, uint32_t max_dupes = 3,
                                   uint32_t max_chain = kUnboundedChain) {
  if (target_load <= 0.0 || target_load >= 1.0)
    throw std::invalid_argument("target load factor must be in (0, 1)");
  FilterConfig cfg;
  cfg.variant = variant;
  cfg.max_dupes = max_dupes;
  cfg.max_chain = max_chain;
  cfg.bucket_size = 2 * max_dupes;
  cfg.num_attrs = profile.num_attrs;
  double entries = predict_entries(profile, variant, max_dupes, max_chain,
                                   cfg.bucket_size);
  uint64_t needed =
      uint64_t(std::ceil(entries / (target_load * cfg.bucket_size)));
  cfg.num_buckets = uint32_t(next_power_of_two(needed));
  return cfg;
}

/// Sketch bits per information-theoretic minimum: bits / (n log2 1/fpr).
inline double bit_efficiency(double total_bits, double n_inserted,
                             double fpr) {
  if (fpr <= 0.0 || fpr >= 1.0)
    throw std::invalid_argument("fpr must be in (0, 1)");
  if (n_inserted < 1) throw std::invalid_argument("n must be >= 1");
  return total_bits / (n_inserted * std::log2(1.0 / fpr));
}

/// An optimally sized Bloom filter spends 1/ln 2 ~ 1.44 of the minimum.
inline double bloom_reference_efficiency() { return 1.0 / std::log(2.0); }

/// Expected scan output: true matches plus the false-positive share of the
/// rest.
inline double expected_output(double m_true, double m_original, double fpr) {
  return m_true + fpr * (m_original - m_true);
}

/// Predicted FPR split by cause for a configuration and workload shape.
struct FprPrediction {
  double key_only = 0;   // absent-key queries
  double key_pred = 0;   // present-key, absent-attribute queries
  double key_component = 0;
  double attr_component = 0;

  static FprPrediction clamped(double key_only, double key_pred) {
    FprPrediction p;
    p.key_only = std::clamp(key_only, 0.0, 1.0);
    p.key_pred = std::clamp(key_pred, 0.0, 1.0);
    p.key_component = p.key_only;
    p.attr_component = p.key_pred;
    return p;
  }
};

}  // namespace ccf
