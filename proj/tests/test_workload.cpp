#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "ccf/workload.hpp"

using namespace ccf;

namespace {
std::string fixture(const std::string& name) {
  return std::string(CCF_TEST_DATA_DIR) + "/" + name;
}
}  // namespace

TEST(ZipfTest, ExtremeAlphaCollapsesToSingleDuplicate) {
  double alpha = fit_zipf_alpha(1.0, 2.7, 1, 500);
  auto rows = gen_zipf_mandelbrot(2000, 2.7, alpha, 1, 500, 1, 0, 7);
  std::map<uint64_t, std::set<std::vector<uint64_t>>> per_key;
  for (const Row& r : rows) per_key[r.key].insert(r.attrs);
  double mean = double(rows.size()) / double(per_key.size());
  EXPECT_LT(mean, 1.05);
}

// Bisection on the analytic mean, then a sample check of the realized
// duplicate counts.
TEST(ZipfTest, FittedAlphaHitsTargetMean) {
  const double target = 8.0;
  double alpha = fit_zipf_alpha(target, 2.7, 1, 500);
  EXPECT_NEAR(ZipfMandelbrot::mean(2.7, alpha, 1, 500), target, 1e-6);

  auto rows = gen_zipf_mandelbrot(60000, 2.7, alpha, 1, 500, 1, 0, 13);
  std::set<uint64_t> keys;
  for (const Row& r : rows) keys.insert(r.key);
  double mean = double(rows.size()) / double(keys.size());
  EXPECT_NEAR(mean, target, 0.05 * target);
}

TEST(ZipfTest, UniformModeGivesExactDuplicates) {
  auto rows = gen_uniform_dupes(600, 6, 1, 0, 3);
  std::map<uint64_t, std::set<std::vector<uint64_t>>> per_key;
  for (const Row& r : rows) per_key[r.key].insert(r.attrs);
  for (const auto& [key, attrs] : per_key) EXPECT_EQ(attrs.size(), 6u);
}

TEST(CsvTest, ThreeRowFixture) {
  TableData t = ingest_csv(fixture("fixture_3rows.csv"),
                           CsvSchema{"id", {"color", "size"}});
  ASSERT_EQ(t.rows.size(), 3u);
  EXPECT_EQ(t.rows[0], (Row{11, {3, 100}}));
  EXPECT_EQ(t.rows[1], (Row{22, {4, 200}}));
  EXPECT_EQ(t.rows[2], (Row{33, {5, 300}}));
  EXPECT_EQ(t.columns[0].cardinality, 3u);
}

TEST(CsvTest, MissingKeyNamesTheLine) {
  try {
    ingest_csv(fixture("fixture_missing_key.csv"), CsvSchema{"id", {"color"}});
    FAIL() << "expected CsvError";
  } catch (const CsvError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
}

TEST(CsvTest, UnknownColumnIsSchemaMismatch) {
  std::istringstream in("id,color\n1,2\n");
  EXPECT_THROW(ingest_csv(in, CsvSchema{"id", {"flavor"}}), CsvError);
}

TEST(CsvTest, QuotedFieldsAndCustomDelimiter) {
  std::istringstream in("id;color\n\"1\";2\n3;\"4\"\n");
  TableData t = ingest_csv(in, CsvSchema{"id", {"color"}, ';'});
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.rows[0], (Row{1, {2}}));
  EXPECT_EQ(t.rows[1], (Row{3, {4}}));

  std::istringstream bad("id,color\n\"1,2\n");
  try {
    ingest_csv(bad, CsvSchema{"id", {"color"}});
    FAIL() << "expected CsvError";
  } catch (const CsvError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(CsvTest, ExportIngestRoundTrip) {
  TableData t;
  t.key_column = "k";
  t.columns = {ColumnMeta{"a"}, ColumnMeta{"b"}};
  t.rows = {{5, {1, 2}}, {6, {3, 4}}, {5, {1, 9}}};
  std::stringstream buf;
  export_csv(t, buf);
  TableData back = ingest_csv(buf, CsvSchema{"k", {"a", "b"}});
  EXPECT_EQ(back.rows, t.rows);
}

TEST(BinningTest, Sizes132Into16) {
  std::vector<uint64_t> years;
  for (uint64_t y = 1880; y < 1880 + 132; ++y) {
    years.push_back(y);
    years.push_back(y);  // duplicates must not affect the distinct split
  }
  BinningMap map = BinningMap::build(years, 16);
  ASSERT_EQ(map.num_bins(), 16u);
  for (uint32_t s : map.sizes()) EXPECT_TRUE(s == 8 || s == 9) << s;
}

TEST(BinningTest, SingleBinMatchesEverything) {
  std::vector<uint64_t> values{10, 20, 30, 40};
  BinningMap map = BinningMap::build(values, 1);
  EXPECT_EQ(map.num_bins(), 1u);
  for (uint64_t v : values) EXPECT_EQ(map.bin_of(v), 0u);
  EXPECT_EQ(map.bins_for_range(15, 35), std::vector<uint64_t>{0});
}

TEST(BinningTest, RangeWithinOneBinIsSingleton) {
  std::vector<uint64_t> values;
  for (uint64_t v = 0; v < 64; ++v) values.push_back(v);
  BinningMap map = BinningMap::build(values, 8);  // bins of 8 values
  auto bins = map.bins_for_range(17, 22);
  EXPECT_EQ(bins, std::vector<uint64_t>{2});
  EXPECT_TRUE(map.bins_for_range(100, 200).empty());
  auto all = map.bins_for_range(0, 63);
  EXPECT_EQ(all.size(), 8u);
}

TEST(SemijoinTest, NoJoinedTablesMeansBasePredicatesOnly) {
  TableData base = ingest_csv(fixture("semijoin_base.csv"),
                              CsvSchema{"movie_id", {"kind"}});
  QuerySpec q;
  q.base_table = 0;
  q.preds[0].push_back(PredSpec{0, {10}, false, 0, 0});
  std::vector<TableData> tables{base};
  auto rows = exact_semijoin(q, tables);
  EXPECT_EQ(rows.size(), 4u);
  EXPECT_EQ(predicate_only_count(q, tables), 4u);
}

TEST(SemijoinTest, DisjointKeysYieldZero) {
  TableData base = ingest_csv(fixture("semijoin_base.csv"),
                              CsvSchema{"movie_id", {"kind"}});
  TableData other;
  other.columns = {ColumnMeta{"x"}};
  other.rows = {{100, {1}}, {200, {2}}};
  QuerySpec q;
  q.base_table = 0;
  q.joined = {1};
  std::vector<TableData> tables{base, other};
  EXPECT_TRUE(exact_semijoin(q, tables).empty());
}

// Hand-enumerated six-row fixture: base predicate kind=10 keeps keys
// {1,2,4,6}; joined predicate company=5 keeps keys {1,4,7}; the semijoin is
// exactly {1,4}.
TEST(SemijoinTest, HandComputedFixture) {
  TableData base = ingest_csv(fixture("semijoin_base.csv"),
                              CsvSchema{"movie_id", {"kind"}});
  TableData joined = ingest_csv(fixture("semijoin_joined.csv"),
                                CsvSchema{"movie_id", {"company"}});
  QuerySpec q;
  q.base_table = 0;
  q.joined = {1};
  q.preds[0].push_back(PredSpec{0, {10}, false, 0, 0});
  q.preds[1].push_back(PredSpec{0, {5}, false, 0, 0});
  std::vector<TableData> tables{base, joined};
  auto rows = exact_semijoin(q, tables);
  ASSERT_EQ(rows.size(), 2u);
  std::set<uint64_t> keys;
  for (size_t i : rows) keys.insert(base.rows[i].key);
  EXPECT_EQ(keys, (std::set<uint64_t>{1, 4}));

  // Nested-loop re-evaluation must agree with the hash-set oracle.
  uint64_t nested = 0;
  for (const Row& b : base.rows) {
    if (b.attrs[0] != 10) continue;
    bool any = false;
    for (const Row& j : joined.rows)
      if (j.key == b.key && j.attrs[0] == 5) any = true;
    if (any) ++nested;
  }
  EXPECT_EQ(nested, rows.size());
}

TEST(FilteredScanTest, PerfectProbeReproducesSemijoin) {
  StarWorkload w = make_star_workload(5, 2000, 8);
  for (const QuerySpec& q : w.queries) {
    // Oracle key sets per joined table, predicates applied raw.
    std::map<uint32_t, std::set<uint64_t>> keysets;
    for (uint32_t t : q.joined) {
      auto preds = q.preds_for(t);
      for (const Row& row : w.tables[t].rows)
        if (row_matches_raw(row, preds)) keysets[t].insert(row.key);
    }
    uint64_t m_perfect =
        filtered_scan_with(q, w.tables, [&](uint32_t t, uint64_t key) {
          return keysets[t].count(key) > 0;
        });
    EXPECT_EQ(m_perfect, exact_semijoin(q, w.tables).size());
  }
}

TEST(FilteredScanTest, OrderingInvariantOnSmallWorkload) {
  StarWorkload w = make_star_workload(11, 1500, 6);
  std::vector<ConditionalCuckooFilter> filters;
  std::map<uint32_t, const ConditionalCuckooFilter*> by_table;
  filters.reserve(w.tables.size());
  for (uint32_t t = 0; t < w.tables.size(); ++t) {
    DataProfile profile = DataProfile::from_rows(w.tables[t].rows);
    FilterConfig cfg = suggest_config(profile, Variant::Chained, 0.7, 3);
    cfg.seed = 100 + t;
    filters.emplace_back(cfg);
    for (const Row& r : w.tables[t].rows)
      filters.back().insert(r.key, w.tables[t].filter_attrs(r));
  }
  for (uint32_t t = 0; t < w.tables.size(); ++t) by_table[t] = &filters[t];

  for (const QuerySpec& q : w.queries) {
    uint64_t m_pred = predicate_only_count(q, w.tables);
    uint64_t m_semi = exact_semijoin(q, w.tables).size();
    uint64_t m_filtered = filtered_scan(q, w.tables, by_table, false);
    uint64_t m_keyonly = filtered_scan(q, w.tables, by_table, true);
    EXPECT_LE(m_semi, m_filtered);
    EXPECT_LE(m_filtered, m_keyonly);
    EXPECT_LE(m_keyonly, m_pred);

    // Binning only coarsens: the binned oracle can only admit more rows.
    uint64_t m_semi_binned = exact_semijoin(q, w.tables, true).size();
    EXPECT_GE(m_semi_binned, m_semi);
  }
}

TEST(ReductionFactorTest, Basics) {
  EXPECT_DOUBLE_EQ(reduction_factor(10, 10), 1.0);
  EXPECT_DOUBLE_EQ(reduction_factor(0, 10), 0.0);
  EXPECT_THROW(reduction_factor(1, 0), std::invalid_argument);
  RfReport r = make_rf_report(100, 20, 30, 60);
  EXPECT_DOUBLE_EQ(r.rf_exact, 0.2);
  EXPECT_DOUBLE_EQ(r.rf_filter, 0.3);
  EXPECT_DOUBLE_EQ(r.rf_keyonly, 0.6);
  EXPECT_DOUBLE_EQ(r.fpr_vs_oracle, 0.125);
}

TEST(StarWorkloadTest, ShapeAndDeterminism) {
  StarWorkload a = make_star_workload(42, 3000, 10);
  StarWorkload b = make_star_workload(42, 3000, 10);
  ASSERT_EQ(a.tables.size(), 5u);
  EXPECT_EQ(a.queries.size(), 10u);
  for (size_t t = 0; t < a.tables.size(); ++t)
    EXPECT_EQ(a.tables[t].rows, b.tables[t].rows);

  // Duplicate skew lands near the configured shape.
  DataProfile keyword = DataProfile::from_rows(a.tables[4].rows);
  EXPECT_NEAR(keyword.mean_dupes(), 9.48, 1.5);
  DataProfile title = DataProfile::from_rows(a.tables[0].rows);
  EXPECT_DOUBLE_EQ(title.mean_dupes(), 1.0);
}
