#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "ccf/attribute_sketch.hpp"
#include "ccf/rng.hpp"

using namespace ccf;

namespace {

FilterConfig mixed_config(uint32_t num_attrs = 2, uint32_t alpha = 8) {
  FilterConfig cfg;
  cfg.variant = Variant::Mixed;
  cfg.num_buckets = 64;
  cfg.bucket_size = 6;
  cfg.max_dupes = 3;
  cfg.kappa_bits = 12;
  cfg.alpha_bits = alpha;
  cfg.num_attrs = num_attrs;
  cfg.seed = 17;
  return cfg;
}

}  // namespace

TEST(VectorMatchesTest, EmptyPredicateIsVacuouslyTrue) {
  std::vector<uint64_t> attrs{4, 900};
  auto fps = make_fingerprint_vector(attrs, 8, 3);
  EXPECT_TRUE(vector_matches(fps, Predicate{}, 8, 3));
}

TEST(VectorMatchesTest, OwnAttributesAlwaysMatch) {
  Rng rng(8);
  for (int i = 0; i < 2000; ++i) {
    std::vector<uint64_t> attrs{rng.next() % 100000, rng.next() % 100000};
    auto fps = make_fingerprint_vector(attrs, 8, 3);
    EXPECT_TRUE(vector_matches(fps, Predicate::exact_row(attrs), 8, 3));
  }
}

TEST(VectorMatchesTest, InListMatchesAnyAcceptedValue) {
  std::vector<uint64_t> attrs{7};
  auto fps = make_fingerprint_vector(attrs, 8, 3);
  Predicate p;
  p.add_in_list(0, {900001, 7, 900002});
  EXPECT_TRUE(vector_matches(fps, p, 8, 3));
}

TEST(VectorMatchesTest, ColumnOutOfRangeThrows) {
  FingerprintVector fps{1};
  EXPECT_THROW(vector_matches(fps, Predicate::equals(3, 1), 8, 3),
               std::invalid_argument);
}

// A random non-matching single-clause predicate hits with rate ~2^-alpha.
// Values are kept above 2^alpha so the small-value passthrough cannot turn
// the test into exact comparison.
TEST(VectorMatchesTest, FalsePositiveRateMatchesAlpha) {
  const uint32_t alpha = 8;
  const int n = 100000;
  Rng rng(21);
  int hits = 0;
  for (int i = 0; i < n; ++i) {
    uint64_t stored = 1000 + rng.next() % 1000000;
    uint64_t probe = 1000 + rng.next() % 1000000;
    if (stored == probe) {
      --i;
      continue;
    }
    auto fps = make_fingerprint_vector(std::vector<uint64_t>{stored}, alpha, 9);
    if (vector_matches(fps, Predicate::equals(0, probe), alpha, 9)) ++hits;
  }
  double expected = std::pow(2.0, -double(alpha));
  double sigma = std::sqrt(expected * (1 - expected) / n);
  EXPECT_NEAR(double(hits) / n, expected, 3 * sigma);
}

TEST(BloomSketchTest, InsertIsIdempotent) {
  BloomBits bits(32);
  bloom_insert(bits, 0, 42, 2, 5);
  BloomBits once = bits;
  bloom_insert(bits, 0, 42, 2, 5);
  EXPECT_TRUE(bits == once);
  EXPECT_LE(once.popcount(), 2u);
  EXPECT_GE(once.popcount(), 1u);
}

TEST(BloomSketchTest, NoFalseNegativesAndZeroBitsReject) {
  BloomBits bits(64);
  bloom_insert(bits, 0, 1234, 2, 5);
  bloom_insert(bits, 1, 77, 2, 5);
  Predicate own;
  own.add(0, 1234).add(1, 77);
  EXPECT_TRUE(bloom_matches(bits, own, 2, 5));

  BloomBits empty(64);
  EXPECT_FALSE(bloom_matches(empty, Predicate::equals(0, 1234), 2, 5));
  EXPECT_TRUE(bloom_matches(empty, Predicate{}, 2, 5));
}

// Rows (a1, a2) and (a1', a2') make the predicate (a1, a2') a guaranteed
// false positive: the sketch has no co-occurrence information.
TEST(BloomSketchTest, CoOccurrenceBlindness) {
  BloomBits bits(128);
  bloom_insert(bits, 0, 10, 2, 5);   // row 1: (10, 20)
  bloom_insert(bits, 1, 20, 2, 5);
  bloom_insert(bits, 0, 11, 2, 5);   // row 2: (11, 21)
  bloom_insert(bits, 1, 21, 2, 5);
  Predicate cross;
  cross.add(0, 10).add(1, 21);
  EXPECT_TRUE(bloom_matches(bits, cross, 2, 5));
}

TEST(GroupTest, BitLengthFormula) {
  FilterConfig cfg = mixed_config(2, 8);
  // s = 12 + 16 + 1 = 29 bits per entry, d = 3, header = 12 + 2.
  EXPECT_EQ(cfg.entry_bits(), 29u);
  EXPECT_EQ(group_total_bits(cfg), 3u * 29 - 2 * (12 + 2));
  EXPECT_EQ(group_total_bits(cfg), 59u);
}

TEST(GroupTest, BitLengthIdentityAcrossConfigs) {
  for (uint32_t d : {1u, 2u, 3u, 4u, 6u}) {
    for (uint32_t kappa : {4u, 8u, 12u, 16u}) {
      for (uint32_t attrs : {1u, 2u, 4u}) {
        FilterConfig cfg = mixed_config(attrs, 8);
        cfg.max_dupes = d;
        cfg.bucket_size = 2 * d;
        cfg.kappa_bits = kappa;
        uint32_t header = kappa + cfg.group_header_count_bits();
        ASSERT_EQ(group_total_bits(cfg) + 2 * header,
                  d * cfg.entry_bits());
        // Side shares always reassemble to the whole.
        for (uint32_t r_low = 0; r_low <= d; ++r_low) {
          uint32_t low = group_side_bits(r_low, cfg);
          ASSERT_LE(low, group_total_bits(cfg));
        }
      }
    }
  }
}

TEST(GroupTest, NumHashesFormula) {
  // alpha vector of 16 bits over 2 columns, d=3: floor(8 * 0.75 * ln 2) = 4.
  FilterConfig cfg = mixed_config(2, 8);
  EXPECT_EQ(group_num_hashes(cfg), 4u);
  // Clamped to at least one hash.
  FilterConfig tiny = mixed_config(1, 4);
  tiny.max_dupes = 1;
  EXPECT_GE(group_num_hashes(tiny), 1u);
}

TEST(GroupTest, ParticipantsMustShareFingerprint) {
  FilterConfig cfg = mixed_config(1, 8);
  FingerprintVector v{1};
  std::vector<const FingerprintVector*> vecs{&v, &v, &v};
  uint16_t bad[] = {5, 5, 6};
  EXPECT_THROW(convert_to_group(5, bad, vecs, v, cfg), std::invalid_argument);
}

TEST(GroupTest, ContributingRowsAlwaysMatch) {
  FilterConfig cfg = mixed_config(2, 8);
  Rng rng(4);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<std::vector<uint64_t>> rows;
    std::vector<FingerprintVector> fps;
    for (int i = 0; i < 4; ++i) {
      rows.push_back({1000 + rng.next() % 100000, 1000 + rng.next() % 100000});
      fps.push_back(make_fingerprint_vector(rows.back(), cfg.alpha_bits, cfg.seed));
    }
    std::vector<const FingerprintVector*> stored{&fps[0], &fps[1], &fps[2]};
    uint16_t prints[] = {9, 9, 9};
    BloomGroup g = convert_to_group(9, prints, stored, fps[3], cfg);
    for (const auto& row : rows)
      ASSERT_TRUE(group_matches(g, Predicate::exact_row(row), cfg.alpha_bits,
                                cfg.seed));
    ASSERT_TRUE(group_matches(g, Predicate{}, cfg.alpha_bits, cfg.seed));
  }
}

TEST(GroupTest, ReinsertingSameRowChangesNothing) {
  FilterConfig cfg = mixed_config(2, 8);
  auto fps = make_fingerprint_vector(std::vector<uint64_t>{5000, 6000},
                                     cfg.alpha_bits, cfg.seed);
  std::vector<const FingerprintVector*> stored{&fps, &fps, &fps};
  uint16_t prints[] = {3, 3, 3};
  BloomGroup g = convert_to_group(3, prints, stored, fps, cfg);
  EXPECT_FALSE(group_insert_row(g, fps, cfg.seed));
  auto other = make_fingerprint_vector(std::vector<uint64_t>{123456, 654321},
                                       cfg.alpha_bits, cfg.seed);
  if (other != fps) {
    EXPECT_TRUE(group_insert_row(g, other, cfg.seed));
  }
}

// Absent-value FPR versus two oracles: the exact per-group enumeration over
// all possible attribute fingerprints, and the standard Bloom formula (which
// underestimates small filters, and ignores the fingerprint-collision path).
TEST(GroupTest, AbsentValueFprConsistentWithFormula) {
  FilterConfig cfg = mixed_config(2, 8);
  const int groups = 10000;
  Rng rng(99);
  double measured = 0, enumerated = 0;
  uint32_t pos[64];
  for (int t = 0; t < groups; ++t) {
    std::vector<std::vector<uint64_t>> rows;
    std::vector<FingerprintVector> fps;
    for (int i = 0; i < 4; ++i) {
      rows.push_back({1000 + rng.next() % (1ull << 40),
                      1000 + rng.next() % (1ull << 40)});
      fps.push_back(make_fingerprint_vector(rows.back(), cfg.alpha_bits, cfg.seed));
    }
    std::vector<const FingerprintVector*> stored{&fps[0], &fps[1], &fps[2]};
    uint16_t prints[] = {7, 7, 7};
    BloomGroup g = convert_to_group(7, prints, stored, fps[3], cfg);

    // Sampled absent-value probe.
    uint64_t probe = 1000 + rng.next() % (1ull << 40);
    if (group_matches(g, Predicate::equals(0, probe), cfg.alpha_bits, cfg.seed))
      measured += 1;

    // Exact FPR for a uniformly random query fingerprint in column 0.
    int match_fps = 0;
    for (uint32_t f = 0; f < 256; ++f) {
      group_insert_positions(g, 0, uint8_t(f), cfg.seed,
                             std::span(pos, g.num_hashes));
      bool all = true;
      for (uint32_t i = 0; i < g.num_hashes; ++i)
        if (!g.bits.test(pos[i])) {
          all = false;
          break;
        }
      if (all) ++match_fps;
    }
    enumerated += double(match_fps) / 256.0;
  }
  measured /= groups;
  enumerated /= groups;

  double sigma = std::sqrt(enumerated * (1 - enumerated) / groups);
  EXPECT_NEAR(measured, enumerated, 3 * sigma + 1e-4);

  // n = 4 rows * 2 columns of distinct pairs at most; the formula sits below
  // the exact rate but within a small factor for these sizes.
  double formula = std::pow(
      1.0 - std::exp(-double(group_num_hashes(cfg)) * 8.0 / group_total_bits(cfg)),
      double(group_num_hashes(cfg)));
  EXPECT_GE(measured, formula - 3 * sigma);
  EXPECT_LT(measured, 3 * formula + 3 * sigma);
}
