#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ccf/analysis.hpp"
#include "ccf/filter.hpp"
#include "ccf/rng.hpp"

// Data generation and ingestion, range binning, the exact semijoin oracle and
// reduction-factor evaluation for star-join workloads.

namespace ccf {

// ===========================================================================
// Zipf-Mandelbrot duplicate-count generation
// ===========================================================================

/// Truncated Zipf-Mandelbrot distribution p(x) proportional to (c + x)^-alpha
/// over [lo, hi]. Models per-key duplicate counts.
class ZipfMandelbrot {
 public:
  ZipfMandelbrot(double c, double alpha, uint64_t lo, uint64_t hi)
      : lo_(lo), cdf_(hi - lo + 1) {
    double total = 0;
    for (uint64_t x = lo; x <= hi; ++x)
      total += std::pow(c + double(x), -alpha);
    double acc = 0;
    for (uint64_t x = lo; x <= hi; ++x) {
      acc += std::pow(c + double(x), -alpha) / total;
      cdf_[x - lo] = acc;
    }
    cdf_.back() = 1.0;
  }

  uint64_t sample(Rng& rng) const {
    double u = rng.real();
    auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
    return lo_ + uint64_t(it - cdf_.begin());
  }

  static double mean(double c, double alpha, uint64_t lo, uint64_t hi) {
    double total = 0, weighted = 0;
    for (uint64_t x = lo; x <= hi; ++x) {
      double p = std::pow(c + double(x), -alpha);
      total += p;
      weighted += double(x) * p;
    }
    return weighted / total;
  }

 private:
  uint64_t lo_;
  std::vector<double> cdf_;
};

/// Solves for the alpha whose truncated mean equals target_mean (bisection;
/// the mean is strictly decreasing in alpha). Targets outside the attainable
/// range clamp to the nearest endpoint.
inline double fit_zipf_alpha(double target_mean, double c, uint64_t lo,
                             uint64_t hi) {
  double a_lo = 0.0, a_hi = 64.0;
  if (target_mean >= ZipfMandelbrot::mean(c, a_lo, lo, hi)) return a_lo;
  if (target_mean <= ZipfMandelbrot::mean(c, a_hi, lo, hi)) return a_hi;
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (a_lo + a_hi);
    if (ZipfMandelbrot::mean(c, mid, lo, hi) > target_mean)
      a_lo = mid;
    else
      a_hi = mid;
  }
  return 0.5 * (a_lo + a_hi);
}

inline void shuffle_rows(std::vector<Row>& rows, Rng& rng) {
  for (size_t i = rows.size(); i > 1; --i)
    std::swap(rows[i - 1], rows[rng.below(uint32_t(i))]);
}

/// Key stream with Zipf-Mandelbrot duplicate counts: keys 1, 2, ... each
/// repeated r ~ ZM(c, alpha, [lo, hi]) times with distinct attribute vectors
/// (attrs[j] = attr_offset + duplicate index), truncated to n rows and
/// randomly permuted.
inline std::vector<Row> gen_zipf_mandelbrot(uint64_t n, double c, double alpha,
                                            uint64_t lo, uint64_t hi,
                                            uint32_t num_attrs,
                                            uint64_t attr_offset,
                                            uint64_t seed) {
  ZipfMandelbrot dist(c, alpha, lo, hi);
  Rng rng(seed);
  std::vector<Row> rows;
  rows.reserve(n);
  for (uint64_t key = 1; rows.size() < n; ++key) {
    uint64_t r = dist.sample(rng);
    for (uint64_t i = 0; i < r && rows.size() < n; ++i)
      rows.push_back(
          Row{key, std::vector<uint64_t>(num_attrs, attr_offset + i)});
  }
  shuffle_rows(rows, rng);
  return rows;
}

/// Uniform-duplicates mode: every key exactly r times.
inline std::vector<Row> gen_uniform_dupes(uint64_t n, uint64_t r,
                                          uint32_t num_attrs,
                                          uint64_t attr_offset, uint64_t seed) {
  Rng rng(seed);
  std::vector<Row> rows;
  rows.reserve(n);
  for (uint64_t key = 1; rows.size() < n; ++key)
    for (uint64_t i = 0; i < r && rows.size() < n; ++i)
      rows.push_back(
          Row{key, std::vector<uint64_t>(num_attrs, attr_offset + i)});
  shuffle_rows(rows, rng);
  return rows;
}

// ===========================================================================
// Range binning
// ===========================================================================

/// Equal-frequency binning over a column's distinct values: num_bins
/// contiguous intervals whose distinct-value counts differ by at most one.
/// Range predicates become in-lists of covered bin ids.
class BinningMap {
 public:
  static BinningMap build(std::span<const uint64_t> values,
                          uint32_t num_bins) {
    if (num_bins == 0) throw std::invalid_argument("num_bins must be >= 1");
    std::vector<uint64_t> distinct(values.begin(), values.end());
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()),
                   distinct.end());
    if (distinct.empty())
      throw std::invalid_argument("cannot bin an empty column");
    BinningMap map;
    uint32_t nb = std::min<uint32_t>(num_bins, uint32_t(distinct.size()));
    uint64_t base = distinct.size() / nb;
    uint64_t extra = distinct.size() % nb;
    size_t offset = 0;
    for (uint32_t i = 0; i < nb; ++i) {
      uint64_t width = base + (i < extra ? 1 : 0);
      map.lower_bounds_.push_back(distinct[offset]);
      map.sizes_.push_back(uint32_t(width));
      offset += width;
    }
    map.max_value_ = distinct.back();
    return map;
  }

  /// Rebuilds a map from persisted boundaries (sizes are not retained).
  static BinningMap from_bounds(std::vector<uint64_t> lower_bounds,
                                uint64_t max_value) {
    if (lower_bounds.empty())
      throw std::invalid_argument("binning needs at least one bound");
    BinningMap map;
    map.lower_bounds_ = std::move(lower_bounds);
    map.max_value_ = max_value;
    return map;
  }

  uint32_t num_bins() const { return uint32_t(lower_bounds_.size()); }
  const std::vector<uint32_t>& sizes() const { return sizes_; }
  const std::vector<uint64_t>& lower_bounds() const { return lower_bounds_; }
  uint64_t min_value() const { return lower_bounds_.front(); }
  uint64_t max_value() const { return max_value_; }

  uint32_t bin_of(uint64_t v) const {
    auto it = std::upper_bound(lower_bounds_.begin(), lower_bounds_.end(), v);
    if (it == lower_bounds_.begin()) return 0;
    return uint32_t(it - lower_bounds_.begin() - 1);
  }

  /// Bin ids whose interval overlaps [lo, hi]; empty when the range misses
  /// the observed domain entirely.
  std::vector<uint64_t> bins_for_range(uint64_t lo, uint64_t hi) const {
    if (hi < lo || hi < min_value() || lo > max_value()) return {};
    uint32_t first = bin_of(std::max(lo, min_value()));
    uint32_t last = bin_of(std::min(hi, max_value()));
    std::vector<uint64_t> out;
    for (uint32_t i = first; i <= last; ++i) out.push_back(i);
    return out;
  }

 private:
  std::vector<uint64_t> lower_bounds_;
  std::vector<uint32_t> sizes_;
  uint64_t max_value_ = 0;
};

// ===========================================================================
// Tables and query specifications
// ===========================================================================

struct ColumnMeta {
  std::string name;
  uint64_t cardinality = 0;
  bool binnable = false;
  std::optional<BinningMap> binning;
};

struct TableData {
  std::string name;
  std::string key_column = "key";
  std::vector<ColumnMeta> columns;
  std::vector<Row> rows;

  /// Computes and stores an equal-frequency binning for one column.
  void enable_binning(uint32_t column, uint32_t num_bins) {
    std::vector<uint64_t> values;
    values.reserve(rows.size());
    for (const Row& r : rows) values.push_back(r.attrs[column]);
    columns[column].binning = BinningMap::build(values, num_bins);
  }

  /// Attribute vector as seen by a filter: binned columns map to bin ids.
  std::vector<uint64_t> filter_attrs(const Row& row) const {
    std::vector<uint64_t> out(row.attrs.size());
    for (uint32_t j = 0; j < row.attrs.size(); ++j)
      out[j] = columns[j].binning ? columns[j].binning->bin_of(row.attrs[j])
                                  : row.attrs[j];
    return out;
  }
};

/// One predicate on one column: an in-list of accepted values or an
/// inclusive integer range.
struct PredSpec {
  uint32_t column = 0;
  std::vector<uint64_t> values;  // in-list; unused for ranges
  bool is_range = false;
  uint64_t lo = 0, hi = 0;

  bool matches_raw(uint64_t v) const {
    if (is_range) return lo <= v && v <= hi;
    return std::find(values.begin(), values.end(), v) != values.end();
  }
};

/// Star query: a base table scan with semijoin reductions against the joined
/// tables, all on the shared key column.
struct QuerySpec {
  uint32_t base_table = 0;
  std::vector<uint32_t> joined;
  std::map<uint32_t, std::vector<PredSpec>> preds;  // table -> predicates

  std::span<const PredSpec> preds_for(uint32_t table) const {
    auto it = preds.find(table);
    if (it == preds.end()) return {};
    return it->second;
  }
};

inline bool row_matches_raw(const Row& row, std::span<const PredSpec> preds) {
  for (const PredSpec& p : preds)
    if (!p.matches_raw(row.attrs[p.column])) return false;
  return true;
}

/// Predicate evaluation after binning: a clause accepts a row when their bin
/// ids agree (coarser than raw evaluation, never misses a raw match).
inline bool row_matches_binned(const Row& row, std::span<const PredSpec> preds,
                               const TableData& table) {
  for (const PredSpec& p : preds) {
    const auto& binning = table.columns[p.column].binning;
    if (!binning) {
      if (!p.matches_raw(row.attrs[p.column])) return false;
      continue;
    }
    uint32_t row_bin = binning->bin_of(row.attrs[p.column]);
    bool any = false;
    if (p.is_range) {
      for (uint64_t b : binning->bins_for_range(p.lo, p.hi))
        if (b == row_bin) {
          any = true;
          break;
        }
    } else {
      for (uint64_t v : p.values)
        if (binning->bin_of(v) == row_bin) {
          any = true;
          break;
        }
    }
    if (!any) return false;
  }
  return true;
}

/// Converts table predicates to the filter's clause form, mapping values
/// through the column binning where one exists. Ranges require a binned
/// column unless they are narrow enough to enumerate.
inline Predicate to_filter_predicate(std::span<const PredSpec> preds,
                                     const TableData& table) {
  Predicate out;
  for (const PredSpec& p : preds) {
    const auto& binning = table.columns[p.column].binning;
    std::set<uint64_t> accepted;
    if (p.is_range) {
      if (p.hi < p.lo)
        throw std::invalid_argument("range predicate bounds are inverted");
      if (binning) {
        for (uint64_t b : binning->bins_for_range(p.lo, p.hi))
          accepted.insert(b);
      } else if (p.hi - p.lo <= 64) {
        for (uint64_t v = p.lo; v <= p.hi; ++v) accepted.insert(v);
      } else {
        throw std::invalid_argument(
            "range predicate on an unbinned column is too wide");
      }
    } else {
      for (uint64_t v : p.values) accepted.insert(binning ? binning->bin_of(v) : v);
    }
    // An empty accepted set means the range missed the binned domain; the
    // clause can match nothing, which we encode as an impossible sentinel
    // list (no row carries a bin id above num_bins).
    if (accepted.empty() && binning)
      accepted.insert(uint64_t(binning->num_bins()) + 1);
    out.add_in_list(p.column,
                    std::vector<uint64_t>(accepted.begin(), accepted.end()));
  }
  return out;
}

// ===========================================================================
// CSV ingestion
// ===========================================================================

struct CsvSchema {
  std::string key_column;
  std::vector<std::string> attr_columns;
  char delimiter = ',';
};

class CsvError : public std::runtime_error {
 public:
  CsvError(uint64_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what),
        line_(line) {}
  uint64_t line() const { return line_; }

 private:
  uint64_t line_;
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line,
                                               char delim, uint64_t lineno) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += ch;
      }
    } else if (ch == '"' && cur.empty()) {
      quoted = true;
    } else if (ch == delim) {
      fields.push_back(std::move(cur));
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  if (quoted) throw CsvError(lineno, "unterminated quote");
  fields.push_back(std::move(cur));
  return fields;
}

inline uint64_t parse_u64_field(const std::string& s, const std::string& column,
                                uint64_t lineno) {
  if (s.empty())
    throw CsvError(lineno, "column '" + column + "' is empty");
  uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw CsvError(lineno, "column '" + column + "' is not an integer: '" + s + "'");
  return v;
}

}  // namespace detail

/// Reads a delimited file with a required header row. Every referenced column
/// must exist; the key and attribute cells must be integers. Malformed input
/// raises CsvError naming the offending line.
inline TableData ingest_csv(std::istream& in, const CsvSchema& schema,
                            std::string table_name = "") {
  TableData table;
  table.name = std::move(table_name);
  table.key_column = schema.key_column;
  for (const std::string& c : schema.attr_columns)
    table.columns.push_back(ColumnMeta{c});

  std::string line;
  uint64_t lineno = 0;
  if (!std::getline(in, line)) throw CsvError(1, "missing header row");
  ++lineno;
  auto header = detail::split_csv_line(line, schema.delimiter, lineno);
  auto col_index = [&](const std::string& name) -> size_t {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end())
      throw CsvError(1, "schema mismatch: no column named '" + name + "'");
    return size_t(it - header.begin());
  };
  size_t key_idx = col_index(schema.key_column);
  std::vector<size_t> attr_idx;
  for (const std::string& c : schema.attr_columns) attr_idx.push_back(col_index(c));

  std::set<std::vector<uint64_t>> seen;  // cardinality bookkeeping
  std::vector<std::set<uint64_t>> distinct(schema.attr_columns.size());
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto fields = detail::split_csv_line(line, schema.delimiter, lineno);
    if (fields.size() != header.size())
      throw CsvError(lineno, "expected " + std::to_string(header.size()) +
                                 " fields, got " + std::to_string(fields.size()));
    Row row;
    row.key = detail::parse_u64_field(fields[key_idx], schema.key_column, lineno);
    for (size_t j = 0; j < attr_idx.size(); ++j) {
      row.attrs.push_back(detail::parse_u64_field(
          fields[attr_idx[j]], schema.attr_columns[j], lineno));
      distinct[j].insert(row.attrs.back());
    }
    table.rows.push_back(std::move(row));
  }
  for (size_t j = 0; j < distinct.size(); ++j)
    table.columns[j].cardinality = distinct[j].size();
  return table;
}

inline TableData ingest_csv(const std::string& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  auto slash = path.find_last_of('/');
  return ingest_csv(in, schema,
                    slash == std::string::npos ? path : path.substr(slash + 1));
}

inline void export_csv(const TableData& table, std::ostream& out,
                       char delimiter = ',') {
  out << table.key_column;
  for (const ColumnMeta& c : table.columns) out << delimiter << c.name;
  out << '\n';
  for (const Row& r : table.rows) {
    out << r.key;
    for (uint64_t a : r.attrs) out << delimiter << a;
    out << '\n';
  }
}

// ===========================================================================
// Exact semijoin oracle and filtered scans
// ===========================================================================

/// Brute-force reference: base rows matching their own predicates whose key,
/// after predicates are applied to every joined table, appears in all of
/// them. Joined-table predicates evaluate raw or binned per `binned`.
inline std::vector<size_t> exact_semijoin(const QuerySpec& q,
                                          std::span<const TableData> tables,
                                          bool binned = false) {
  std::vector<std::set<uint64_t>> key_sets;
  for (uint32_t t : q.joined) {
    std::set<uint64_t> keys;
    auto preds = q.preds_for(t);
    for (const Row& row : tables[t].rows) {
      bool ok = binned ? row_matches_binned(row, preds, tables[t])
                       : row_matches_raw(row, preds);
      if (ok) keys.insert(row.key);
    }
    key_sets.push_back(std::move(keys));
  }
  std::vector<size_t> out;
  const TableData& base = tables[q.base_table];
  auto base_preds = q.preds_for(q.base_table);
  for (size_t i = 0; i < base.rows.size(); ++i) {
    const Row& row = base.rows[i];
    if (!row_matches_raw(row, base_preds)) continue;
    bool all = true;
    for (const auto& keys : key_sets)
      if (!keys.count(row.key)) {
        all = false;
        break;
      }
    if (all) out.push_back(i);
  }
  return out;
}

/// Base rows matching the base predicates alone (the scan with no semijoin
/// information).
inline uint64_t predicate_only_count(const QuerySpec& q,
                                     std::span<const TableData> tables) {
  uint64_t n = 0;
  for (const Row& row : tables[q.base_table].rows)
    if (row_matches_raw(row, q.preds_for(q.base_table))) ++n;
  return n;
}

/// Scan of the base table with a membership probe per joined table:
/// probe(table, key) says whether the key survives that table's reduction.
/// The probe abstracts over real filters and the exact oracle.
template <typename Probe>
uint64_t filtered_scan_with(const QuerySpec& q,
                            std::span<const TableData> tables, Probe&& probe) {
  uint64_t n = 0;
  const TableData& base = tables[q.base_table];
  auto base_preds = q.preds_for(q.base_table);
  for (const Row& row : base.rows) {
    if (!row_matches_raw(row, base_preds)) continue;
    bool all = true;
    for (uint32_t t : q.joined)
      if (!probe(t, row.key)) {
        all = false;
        break;
      }
    if (all) ++n;
  }
  return n;
}

/// Scan of the base table consulting one filter per joined table. With
/// key_only the filters are probed without predicates, which is the regular
/// cuckoo-filter baseline.
inline uint64_t filtered_scan(
    const QuerySpec& q, std::span<const TableData> tables,
    const std::map<uint32_t, const ConditionalCuckooFilter*>& filters,
    bool key_only = false) {
  std::map<uint32_t, std::pair<const ConditionalCuckooFilter*, Predicate>>
      probes;
  for (uint32_t t : q.joined) {
    auto it = filters.find(t);
    if (it == filters.end())
      throw std::invalid_argument("missing filter for joined table");
    Predicate p = key_only ? Predicate{}
                           : to_filter_predicate(q.preds_for(t), tables[t]);
    probes.emplace(t, std::make_pair(it->second, std::move(p)));
  }
  return filtered_scan_with(q, tables, [&](uint32_t t, uint64_t key) {
    const auto& [filter, pred] = probes.at(t);
    return filter->query_pred(key, pred);
  });
}

/// Ratio clamped to [0, 1].
inline double reduction_factor(uint64_t matched, uint64_t m_predicate) {
  if (m_predicate < 1)
    throw std::invalid_argument("m_predicate must be >= 1");
  double rf = double(matched) / double(m_predicate);
  return std::clamp(rf, 0.0, 1.0);
}

struct RfReport {
  uint64_t m_predicate = 0;
  uint64_t m_semijoin = 0;
  uint64_t m_filtered = 0;
  uint64_t m_keyonly = 0;
  double rf_exact = 0;
  double rf_filter = 0;
  double rf_keyonly = 0;
  double fpr_vs_oracle = 0;  // share of non-matching rows the filter passed
};

inline RfReport make_rf_report(uint64_t m_predicate, uint64_t m_semijoin,
                               uint64_t m_filtered, uint64_t m_keyonly) {
  RfReport r;
  r.m_predicate = m_predicate;
  r.m_semijoin = m_semijoin;
  r.m_filtered = m_filtered;
  r.m_keyonly = m_keyonly;
  if (m_predicate >= 1) {
    r.rf_exact = reduction_factor(m_semijoin, m_predicate);
    r.rf_filter = reduction_factor(m_filtered, m_predicate);
    r.rf_keyonly = reduction_factor(m_keyonly, m_predicate);
  }
  uint64_t misses = m_predicate - m_semijoin;
  if (misses > 0)
    r.fpr_vs_oracle = double(m_filtered - m_semijoin) / double(misses);
  return r;
}

// ===========================================================================
// Synthetic star workload
// ===========================================================================

struct StarWorkload {
  std::vector<TableData> tables;
  std::vector<QuerySpec> queries;
  uint64_t key_domain = 0;
};

/// Five tables over a shared key column with duplicate skew shaped like the
/// movie workload (per-key distinct attribute counts from roughly 1 to 539),
/// plus generated star queries with equality and range predicates.
inline StarWorkload make_star_workload(uint64_t seed,
                                       uint64_t key_domain = 15000,
                                       uint32_t num_queries = 20) {
  struct Spec {
    const char* name;
    double coverage;     // fraction of the key domain present
    double avg_dupes;    // target mean distinct attribute vectors per key
    uint64_t max_dupes;  // truncation of the duplicate distribution
    std::vector<std::pair<const char*, uint64_t>> cols;  // name, cardinality
    bool year_column = false;
  };
  const Spec specs[] = {
      {"title_like", 1.00, 1.0, 1, {{"kind", 6}}, true},
      {"cast_like", 0.90, 4.70, 11, {{"role", 11}}, false},
      {"companies_like", 0.80, 2.14, 87, {{"company", 5000}, {"ctype", 2}}, false},
      {"info_like", 0.85, 4.17, 68, {{"info_type", 71}}, false},
      {"keyword_like", 0.75, 9.48, 539, {{"keyword", 3000}}, false},
  };

  StarWorkload w;
  w.key_domain = key_domain;
  Rng rng(seed);
  for (const Spec& spec : specs) {
    TableData t;
    t.name = spec.name;
    t.key_column = "movie_id";
    for (auto& [name, card] : spec.cols)
      t.columns.push_back(ColumnMeta{name, card});
    if (spec.year_column)
      t.columns.push_back(ColumnMeta{"year", 132, true});

    std::optional<ZipfMandelbrot> dist;
    if (spec.max_dupes > 1) {
      double alpha = fit_zipf_alpha(spec.avg_dupes, 2.7, 1, spec.max_dupes);
      dist.emplace(2.7, alpha, 1, spec.max_dupes);
    }
    for (uint64_t key = 1; key <= key_domain; ++key) {
      if (rng.real() >= spec.coverage) continue;
      uint64_t r = dist ? dist->sample(rng) : 1;
      std::set<std::vector<uint64_t>> combos;
      while (combos.size() < r) {
        std::vector<uint64_t> attrs;
        for (auto& [name, card] : spec.cols)
          attrs.push_back(rng.below(uint32_t(card)));
        if (spec.year_column) attrs.push_back(1880 + rng.below(132));
        combos.insert(std::move(attrs));
      }
      for (const auto& attrs : combos) t.rows.push_back(Row{key, attrs});
    }
    shuffle_rows(t.rows, rng);
    w.tables.push_back(std::move(t));
  }

  // Bin the year column the way the workload's range predicates expect.
  for (TableData& t : w.tables)
    for (uint32_t j = 0; j < t.columns.size(); ++j)
      if (t.columns[j].binnable) t.enable_binning(j, 16);

  for (uint32_t qi = 0; qi < num_queries; ++qi) {
    QuerySpec q;
    q.base_table = rng.below(uint32_t(w.tables.size()));
    uint32_t num_joined = 1 + rng.below(4);
    std::vector<uint32_t> others;
    for (uint32_t t = 0; t < w.tables.size(); ++t)
      if (t != q.base_table) others.push_back(t);
    for (uint32_t j = 0; j < num_joined && !others.empty(); ++j) {
      uint32_t pick = rng.below(uint32_t(others.size()));
      q.joined.push_back(others[pick]);
      others.erase(others.begin() + pick);
    }
    std::sort(q.joined.begin(), q.joined.end());

    auto add_preds = [&](uint32_t t) {
      const TableData& table = w.tables[t];
      for (uint32_t j = 0; j < table.columns.size(); ++j) {
        if (rng.real() >= 0.6) continue;
        PredSpec p;
        p.column = j;
        if (table.columns[j].binnable) {
          uint64_t a = 1880 + rng.below(120);
          p.is_range = true;
          p.lo = a;
          p.hi = a + 1 + rng.below(40);
        } else if (!table.rows.empty()) {
          // Sample an actually-present value so selectivity is non-trivial.
          const Row& r = table.rows[rng.below(uint32_t(table.rows.size()))];
          p.values.push_back(r.attrs[j]);
        } else {
          continue;
        }
        q.preds[t].push_back(std::move(p));
      }
    };
    add_preds(q.base_table);
    for (uint32_t t : q.joined) add_preds(t);
    w.queries.push_back(std::move(q));
  }
  return w;
}

}  // namespace ccf
