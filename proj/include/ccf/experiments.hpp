#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ccf/analysis.hpp"
#include "ccf/filter.hpp"
#include "ccf/workload.hpp"

// Experiment drivers behind the command-line front end. Each run_* function
// is deterministic given its parameter struct, so reports are reproducible
// byte for byte from (params, seed).

namespace ccf {

// ===========================================================================
// Multiset experiments: items before first failed insertion, load factor at
// that point, key-only FPR and bit efficiency.
// ===========================================================================

struct MultisetParams {
  Variant variant = Variant::Chained;
  uint32_t num_buckets = 1024;
  uint32_t bucket_size = 6;
  uint32_t max_dupes = 3;
  uint32_t max_chain = kUnboundedChain;
  uint32_t kappa_bits = 12;
  uint32_t num_attrs = 0;  // 0 = bare key multiset (no dedup guard)
  bool cycle_detection = true;
  bool uniform = false;  // uniform duplicate counts instead of Zipf-Mandelbrot
  double zipf_c = 2.7;
  uint64_t zipf_lo = 1, zipf_hi = 500;
  double capacity_slack = 1.2;  // dataset size = slack * m * b
  uint32_t fpr_queries = 10000;
  std::vector<double> mean_dupes{1, 4, 12};
  std::vector<uint64_t> seeds{0,  1,  2,  3,  4,  5,  6,  7,  8,  9,
                              10, 11, 12, 13, 14, 15, 16, 17, 18, 19};
};

struct MultisetRow {
  Variant variant;
  double mean_dupes = 0;
  uint64_t seed = 0;
  uint64_t rows_offered = 0;
  uint64_t items_before_failure = 0;
  bool failed = false;  // false when the whole stream fit
  double load_at_failure = 0;
  double fpr = 0;
  double mean_pair_occupancy = 0;
  double efficiency = 0;        // from the measured FPR
  double efficiency_bound = 0;  // from the occupancy bound E[D] * 2^-kappa
};

inline MultisetRow run_multiset_once(const MultisetParams& p, double mean,
                                     uint64_t seed) {
  FilterConfig cfg;
  cfg.variant = p.variant;
  cfg.num_buckets = p.num_buckets;
  cfg.bucket_size = p.bucket_size;
  cfg.max_dupes = p.max_dupes;
  cfg.max_chain = p.max_chain;
  cfg.kappa_bits = p.kappa_bits;
  cfg.num_attrs = p.num_attrs;
  cfg.cycle_detection = p.cycle_detection;
  cfg.seed = seed * 0x9E3779B97F4A7C15ull + 0xD1B54A32D192ED03ull;
  ConditionalCuckooFilter f(cfg);

  uint64_t n = uint64_t(p.capacity_slack * double(cfg.num_buckets) *
                        cfg.bucket_size);
  std::vector<Row> rows =
      p.uniform
          ? gen_uniform_dupes(n, std::max<uint64_t>(1, uint64_t(mean + 0.5)),
                              p.num_attrs, 0, seed)
          : gen_zipf_mandelbrot(
                n, p.zipf_c, fit_zipf_alpha(mean, p.zipf_c, p.zipf_lo, p.zipf_hi),
                p.zipf_lo, p.zipf_hi, p.num_attrs, 0, seed);

  MultisetRow out;
  out.variant = p.variant;
  out.mean_dupes = mean;
  out.seed = seed;
  out.rows_offered = rows.size();
  out.items_before_failure = rows.size();
  // A failed insertion is a unique row that generates no new entry: a kick
  // termination, or a chain that ran out of pairs.
  for (uint64_t i = 0; i < rows.size(); ++i) {
    InsertResult r = f.insert(rows[i]);
    if (r.status == InsertStatus::Failed ||
        r.status == InsertStatus::SaturatedChain) {
      out.items_before_failure = i;
      out.failed = true;
      break;
    }
  }
  out.load_at_failure = f.load_factor();

  uint64_t hits = 0;
  double occupancy = 0;
  for (uint32_t i = 0; i < p.fpr_queries; ++i) {
    uint64_t key = (1ull << 42) + i;  // generated keys are small integers
    KeyDigest kd = f.digest(key);
    uint32_t alt = alternate_bucket(kd.bucket, kd.fingerprint, cfg.num_buckets);
    occupancy += double(f.table().bucket_scan(kd.bucket).size());
    if (alt != kd.bucket)
      occupancy += double(f.table().bucket_scan(alt).size());
    if (f.query(key)) ++hits;
  }
  if (p.fpr_queries > 0) {
    out.fpr = double(hits) / p.fpr_queries;
    out.mean_pair_occupancy = occupancy / p.fpr_queries;
  }
  if (out.fpr > 0 && out.fpr < 1 && out.items_before_failure > 0)
    out.efficiency = bit_efficiency(double(size_bits(cfg)),
                                    double(out.items_before_failure), out.fpr);
  // Duplicate fingerprints make the measured rate beat the occupancy bound;
  // the bound-consistent rate is the one the efficiency constants quote.
  double fpr_bound = predict_fpr_key(out.mean_pair_occupancy, cfg.kappa_bits);
  if (fpr_bound > 0 && fpr_bound < 1 && out.items_before_failure > 0)
    out.efficiency_bound = bit_efficiency(
        double(size_bits(cfg)), double(out.items_before_failure), fpr_bound);
  return out;
}

inline std::vector<MultisetRow> run_multiset(const MultisetParams& p) {
  std::vector<MultisetRow> rows;
  for (double mean : p.mean_dupes)
    for (uint64_t seed : p.seeds) rows.push_back(run_multiset_once(p, mean, seed));
  return rows;
}

// ===========================================================================
// FPR experiments: measured versus predicted, split by cause.
// ===========================================================================

struct FprParams {
  Variant variant = Variant::Chained;
  uint32_t kappa_bits = 12;
  uint32_t alpha_bits = 8;
  uint32_t num_attrs = 1;
  uint32_t bloom_bits = 16;
  uint32_t bloom_hashes = 2;
  uint32_t max_dupes = 3;
  uint32_t max_chain = 2;
  uint64_t num_keys = 20000;
  uint64_t uniform_dupes = 4;  // distinct attribute vectors per key
  uint32_t queries = 100000;
  uint32_t mismatched_clauses = 1;  // predicate clauses with absent values
  std::vector<uint64_t> seeds{0, 1, 2, 3};
};

struct FprRow {
  Variant variant;
  uint32_t kappa_bits = 0, alpha_bits = 0;
  uint64_t seed = 0;
  double measured_key = 0, predicted_key = 0;
  double measured_pred = 0, predicted_pred = 0;
  uint64_t fp_key_cause = 0, fp_attr_cause = 0;
  double mean_pair_occupancy = 0;
  uint64_t queries = 0;
};

inline FprRow run_fpr_once(const FprParams& p, uint64_t seed) {
  FilterConfig cfg;
  cfg.variant = p.variant;
  cfg.max_dupes = p.max_dupes;
  cfg.max_chain = p.max_chain;
  cfg.kappa_bits = p.kappa_bits;
  cfg.alpha_bits = p.alpha_bits;
  cfg.num_attrs = p.num_attrs;
  cfg.bloom_bits = p.bloom_bits;
  cfg.bloom_hashes = p.bloom_hashes;
  cfg.bucket_size = 2 * p.max_dupes;
  cfg.seed = seed * 0xA24BAED4963EE407ull + 1;

  // Attribute values start at 2^alpha so they are hashed, not stored
  // verbatim; queries then probe genuinely collidable fingerprints. Values
  // are additionally spread per key (stride 2^21, above the query range) so
  // sketch contents differ across keys while query values stay absent from
  // every row of the probed key.
  uint64_t attr_offset = 1ull << p.alpha_bits;
  uint64_t n = p.num_keys * p.uniform_dupes;
  std::vector<Row> rows =
      gen_uniform_dupes(n, p.uniform_dupes, p.num_attrs, attr_offset, seed);
  for (Row& r : rows)
    for (uint64_t& a : r.attrs) a += r.key << 21;
  DataProfile profile = DataProfile::from_rows(rows);
  cfg.num_buckets = uint32_t(next_power_of_two(uint64_t(std::ceil(
      predict_entries(profile, p.variant, p.max_dupes, p.max_chain,
                      cfg.bucket_size) /
      (0.65 * cfg.bucket_size)))));
  ConditionalCuckooFilter f(cfg);
  for (const Row& r : rows) f.insert(r);

  FprRow out;
  out.variant = p.variant;
  out.kappa_bits = p.kappa_bits;
  out.alpha_bits = p.alpha_bits;
  out.seed = seed;
  out.queries = p.queries;
  if (p.queries == 0) return out;

  Rng rng(seed ^ 0x5851F42D4C957F2Dull);
  uint64_t key_hits = 0, key_probes = 0, pred_hits = 0, pred_probes = 0;
  double occupancy = 0;
  for (uint32_t i = 0; i < p.queries; ++i) {
    if (rng.below(2) == 0) {
      // Absent key: any hit is attributed to the key fingerprint.
      uint64_t key = (1ull << 42) + i;
      KeyDigest kd = f.digest(key);
      uint32_t alt =
          alternate_bucket(kd.bucket, kd.fingerprint, cfg.num_buckets);
      occupancy += double(f.table().bucket_scan(kd.bucket).size());
      if (alt != kd.bucket)
        occupancy += double(f.table().bucket_scan(alt).size());
      ++key_probes;
      if (f.query(key)) {
        ++key_hits;
        ++out.fp_key_cause;
      }
    } else {
      // Present key, absent attribute values: attributed to the attributes.
      uint64_t key = 1 + rng.below(uint32_t(p.num_keys));
      Predicate pred;
      for (uint32_t c = 0; c < p.mismatched_clauses && c < p.num_attrs; ++c)
        pred.add(c, attr_offset + p.uniform_dupes + 1 + rng.below(1u << 20));
      ++pred_probes;
      if (f.query_pred(key, pred)) {
        ++pred_hits;
        ++out.fp_attr_cause;
      }
    }
  }
  if (key_probes > 0) {
    out.measured_key = double(key_hits) / double(key_probes);
    out.mean_pair_occupancy = occupancy / double(key_probes);
  }
  if (pred_probes > 0) out.measured_pred = double(pred_hits) / double(pred_probes);

  out.predicted_key = predict_fpr_key(out.mean_pair_occupancy, p.kappa_bits);
  switch (p.variant) {
    case Variant::Plain:
    case Variant::Chained: {
      double l_max = p.variant == Variant::Plain
                         ? 1.0
                         : double(cfg.chain_unbounded()
                                      ? (p.uniform_dupes + p.max_dupes - 1) /
                                            p.max_dupes
                                      : cfg.max_chain);
      out.predicted_pred = predict_fpr_chained(p.max_dupes, l_max, p.alpha_bits,
                                               p.mismatched_clauses);
      break;
    }
    case Variant::Bloom:
      out.predicted_pred =
          predict_fpr_bloom(p.bloom_bits, p.bloom_hashes,
                            double(p.uniform_dupes) * p.num_attrs,
                            p.mismatched_clauses);
      break;
    case Variant::Mixed: {
      // Converted keys answer through the group Bloom filter; the
      // fingerprint-collision path adds roughly d+1 candidates per clause.
      FilterConfig gcfg = cfg;
      double pairs = double(p.uniform_dupes) * p.num_attrs;
      double bloom = predict_fpr_bloom(group_total_bits(gcfg),
                                       group_num_hashes(gcfg), pairs, 1);
      double fp_path = pairs / std::pow(2.0, double(p.alpha_bits));
      out.predicted_pred =
          std::min(1.0, std::pow(bloom + fp_path, double(std::min(
                                                      p.mismatched_clauses,
                                                      p.num_attrs))));
      break;
    }
  }
  return out;
}

inline std::vector<FprRow> run_fpr(const FprParams& p) {
  std::vector<FprRow> rows;
  for (uint64_t seed : p.seeds) rows.push_back(run_fpr_once(p, seed));
  return rows;
}

// ===========================================================================
// Sizing experiments: predicted versus actual occupied entries.
// ===========================================================================

struct SizingParams {
  Variant variant = Variant::Chained;
  uint32_t max_dupes = 3;
  uint32_t max_chain = kUnboundedChain;
  double target_load = 0.75;
  uint64_t rows = 20000;
  double zipf_c = 2.7;
  uint64_t zipf_lo = 1, zipf_hi = 500;
  std::vector<double> mean_dupes{1, 4, 12};
  std::vector<uint64_t> seeds{0, 1, 2, 3, 4};
};

struct SizingRow {
  Variant variant;
  double mean_dupes = 0;
  uint64_t seed = 0;
  double predicted_entries = 0;
  uint64_t actual_entries = 0;
  uint32_t suggested_buckets = 0;
  uint32_t suggested_bucket_size = 0;
  double load_factor = 0;
  bool all_inserted = false;
};

inline std::vector<SizingRow> run_sizing(const SizingParams& p) {
  std::vector<SizingRow> out;
  for (double mean : p.mean_dupes) {
    double alpha = fit_zipf_alpha(mean, p.zipf_c, p.zipf_lo, p.zipf_hi);
    for (uint64_t seed : p.seeds) {
      auto rows = gen_zipf_mandelbrot(p.rows, p.zipf_c, alpha, p.zipf_lo,
                                      p.zipf_hi, 1, 0, seed);
      DataProfile profile = DataProfile::from_rows(rows);
      FilterConfig cfg = suggest_config(profile, p.variant, p.target_load,
                                        p.max_dupes, p.max_chain);
      cfg.seed = seed + 1;
      ConditionalCuckooFilter f(cfg);
      bool ok = true;
      for (const Row& r : rows) ok &= f.insert(r).handled();
      SizingRow row;
      row.variant = p.variant;
      row.mean_dupes = mean;
      row.seed = seed;
      row.predicted_entries = predict_entries(profile, p.variant, p.max_dupes,
                                              p.max_chain, cfg.bucket_size);
      row.actual_entries = f.occupied_entries();
      row.suggested_buckets = cfg.num_buckets;
      row.suggested_bucket_size = cfg.bucket_size;
      row.load_factor = f.load_factor();
      row.all_inserted = ok;
      out.push_back(row);
    }
  }
  return out;
}

// ===========================================================================
// Join benchmark: reduction factors against the exact semijoin and the
// key-only cuckoo filter baseline.
// ===========================================================================

struct JoinbenchParams {
  Variant variant = Variant::Chained;
  uint32_t kappa_bits = 12;
  uint32_t alpha_bits = 8;
  uint32_t bloom_bits = 16;
  uint32_t bloom_hashes = 2;
  uint32_t max_dupes = 3;
  uint32_t max_chain = kUnboundedChain;
  double target_load = 0.65;
  bool perfect_filters = false;  // probe the exact oracle instead of filters
  uint64_t seed = 1;
};

struct JoinbenchQueryRow {
  uint32_t query = 0;
  std::string base_table;
  uint32_t num_joined = 0;
  RfReport rf;
  uint64_t m_semijoin_binned = 0;  // exact oracle on binned predicates
  double fpr_vs_binned_oracle = 0;  // filter's excess over the binned oracle
  double fpr_bound = 0;  // bound over the joined tables' filters
};

struct JoinbenchResult {
  std::vector<JoinbenchQueryRow> rows;  // sorted by ascending rf_exact
  double aggregate_rf_exact = 0;
  double aggregate_rf_exact_binned = 0;
  double aggregate_rf_filter = 0;
  double aggregate_rf_keyonly = 0;
  uint64_t total_filter_bits = 0;
};

inline JoinbenchResult run_joinbench(std::span<const TableData> tables,
                                     std::span<const QuerySpec> queries,
                                     const JoinbenchParams& p) {
  std::vector<ConditionalCuckooFilter> filters;
  std::vector<double> attr_bounds(tables.size(), 0.0);
  std::map<uint32_t, const ConditionalCuckooFilter*> by_table;
  JoinbenchResult result;

  if (!p.perfect_filters) {
    filters.reserve(tables.size());
    for (uint32_t t = 0; t < tables.size(); ++t) {
      DataProfile profile = DataProfile::from_rows(tables[t].rows);
      FilterConfig cfg = suggest_config(profile, p.variant, p.target_load,
                                        p.max_dupes, p.max_chain);
      cfg.kappa_bits = p.kappa_bits;
      cfg.alpha_bits = p.alpha_bits;
      cfg.bloom_bits = p.bloom_bits;
      cfg.bloom_hashes = p.bloom_hashes;
      cfg.seed = p.seed * 131 + t;
      ConditionalCuckooFilter f(cfg);
      std::vector<Row> pending;
      for (const Row& r : tables[t].rows)
        pending.push_back(Row{r.key, tables[t].filter_attrs(r)});
      for (const Row& r : pending) f.insert(r);
      // A build that terminated is retried at double the size; experiments
      // need clean filters so the reduction factors reflect FPR alone.
      for (int attempt = 0; attempt < 3 && f.stats().failed > 0; ++attempt)
        f = rebuild(f, pending, 2.0);
      result.total_filter_bits += size_bits(f.config());

      // Attribute-path bound per probe of this filter, one mismatched
      // clause: d * L_eff * 2^-alpha with L_eff covering the deepest chain.
      double l_eff =
          cfg.chain_unbounded()
              ? std::ceil(double(profile.max_dupes()) / p.max_dupes)
              : double(cfg.max_chain);
      switch (p.variant) {
        case Variant::Plain:
        case Variant::Chained:
          attr_bounds[t] =
              predict_fpr_chained(p.max_dupes, l_eff, p.alpha_bits, 1);
          break;
        case Variant::Bloom:
          attr_bounds[t] = predict_fpr_bloom(
              p.bloom_bits, p.bloom_hashes,
              std::max(1.0, profile.mean_dupes() * profile.num_attrs), 1);
          break;
        case Variant::Mixed:
          attr_bounds[t] = std::min(
              1.0, predict_fpr_bloom(
                       group_total_bits(cfg), group_num_hashes(cfg),
                       std::max(1.0, profile.mean_dupes() * profile.num_attrs),
                       1) +
                       profile.mean_dupes() /
                           std::pow(2.0, double(p.alpha_bits)));
          break;
      }
      filters.push_back(std::move(f));
    }
    for (uint32_t t = 0; t < tables.size(); ++t) by_table[t] = &filters[t];
  }

  std::map<uint32_t, std::set<uint64_t>> perfect_keys;
  for (uint32_t qi = 0; qi < queries.size(); ++qi) {
    const QuerySpec& q = queries[qi];
    uint64_t m_pred = predicate_only_count(q, tables);
    if (m_pred == 0) continue;  // degenerate query, no reduction to measure
    uint64_t m_semi = exact_semijoin(q, tables).size();
    uint64_t m_semi_binned = exact_semijoin(q, tables, true).size();
    uint64_t m_filtered, m_keyonly;
    if (p.perfect_filters) {
      perfect_keys.clear();
      std::map<uint32_t, std::set<uint64_t>> all_keys;
      for (uint32_t t : q.joined) {
        auto preds = q.preds_for(t);
        for (const Row& row : tables[t].rows) {
          if (row_matches_raw(row, preds)) perfect_keys[t].insert(row.key);
          all_keys[t].insert(row.key);
        }
      }
      m_filtered = filtered_scan_with(q, tables, [&](uint32_t t, uint64_t key) {
        return perfect_keys[t].count(key) > 0;
      });
      m_keyonly = filtered_scan_with(q, tables, [&](uint32_t t, uint64_t key) {
        return all_keys[t].count(key) > 0;
      });
    } else {
      m_filtered = filtered_scan(q, tables, by_table, false);
      m_keyonly = filtered_scan(q, tables, by_table, true);
    }

    JoinbenchQueryRow row;
    row.query = qi;
    row.base_table = tables[q.base_table].name;
    row.num_joined = uint32_t(q.joined.size());
    row.rf = make_rf_report(m_pred, m_semi, m_filtered, m_keyonly);
    row.m_semijoin_binned = m_semi_binned;
    // Binning coarsens predicates deterministically; only the excess over
    // the binned oracle is attributable to fingerprint collisions. The
    // filter can never return fewer rows than that oracle.
    if (m_pred > m_semi_binned)
      row.fpr_vs_binned_oracle =
          (double(m_filtered) - double(m_semi_binned)) /
          double(m_pred - m_semi_binned);
    if (!p.perfect_filters) {
      double bound = 0;
      for (uint32_t t : q.joined) {
        double key_bound = predict_fpr_key(
            2.0 * filters[t].config().bucket_size * filters[t].load_factor(),
            p.kappa_bits);
        bound = std::max(bound, std::min(1.0, key_bound + attr_bounds[t]));
      }
      row.fpr_bound = bound;
    }
    result.rows.push_back(std::move(row));
  }

  std::sort(result.rows.begin(), result.rows.end(),
            [](const JoinbenchQueryRow& a, const JoinbenchQueryRow& b) {
              return a.rf.rf_exact < b.rf.rf_exact ||
                     (a.rf.rf_exact == b.rf.rf_exact && a.query < b.query);
            });

  uint64_t sum_pred = 0, sum_semi = 0, sum_semi_binned = 0, sum_filtered = 0,
           sum_keyonly = 0;
  for (const JoinbenchQueryRow& row : result.rows) {
    sum_pred += row.rf.m_predicate;
    sum_semi += row.rf.m_semijoin;
    sum_semi_binned += row.m_semijoin_binned;
    sum_filtered += row.rf.m_filtered;
    sum_keyonly += row.rf.m_keyonly;
  }
  if (sum_pred > 0) {
    result.aggregate_rf_exact = double(sum_semi) / double(sum_pred);
    result.aggregate_rf_exact_binned = double(sum_semi_binned) / double(sum_pred);
    result.aggregate_rf_filter = double(sum_filtered) / double(sum_pred);
    result.aggregate_rf_keyonly = double(sum_keyonly) / double(sum_pred);
  }
  return result;
}

}  // namespace ccf
