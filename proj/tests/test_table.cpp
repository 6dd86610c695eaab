#include <gtest/gtest.h>

#include <vector>

#include "ccf/table.hpp"

using namespace ccf;

namespace {

FilterConfig small_config() {
  FilterConfig cfg;
  cfg.variant = Variant::Plain;
  cfg.num_buckets = 16;
  cfg.bucket_size = 4;
  cfg.num_attrs = 1;
  cfg.max_kicks = 50;
  return cfg;
}

Entry vec_entry(uint16_t fp, uint8_t a = 0) {
  return Entry{fp, false, FingerprintVector{a}};
}

}  // namespace

TEST(TableTest, BucketScanBasics) {
  Table t(16, 4);
  EXPECT_TRUE(t.bucket_scan(3).empty());
  EXPECT_EQ(t.occupied(), 0u);

  t.place(3, 1, vec_entry(7));
  auto scan = t.bucket_scan(3);
  ASSERT_EQ(scan.size(), 1u);
  EXPECT_EQ(scan[0]->fingerprint, 7);

  for (uint32_t s : {0u, 2u, 3u}) t.place(3, s, vec_entry(uint16_t(s + 1)));
  EXPECT_LE(t.bucket_scan(3).size(), 4u);
  EXPECT_EQ(t.occupied(), 4u);
  EXPECT_EQ(t.scan_occupied(), t.occupied());
}

TEST(TableTest, CountFingerprint) {
  Table t(16, 4);
  uint32_t l = 2, alt = alternate_bucket(2, 9, 16);
  EXPECT_EQ(t.count_fingerprint(l, alt, 9), 0u);
  t.place(l, 0, vec_entry(9, 1));
  t.place(l, 1, vec_entry(9, 2));
  if (alt != l) t.place(alt, 0, vec_entry(9, 3));
  EXPECT_EQ(t.count_fingerprint(l, alt, 9), alt != l ? 3u : 2u);
  EXPECT_EQ(t.count_fingerprint(l, alt, 5), 0u);
}

TEST(TableTest, KickIntoFreeSlotUsesNoKicks) {
  Table t(16, 4);
  FilterConfig cfg = small_config();
  Rng rng(1);
  KickOutcome k = t.kick_insert(5, vec_entry(3), cfg, rng);
  EXPECT_TRUE(k.ok());
  EXPECT_EQ(k.kicks_used, 0u);
  EXPECT_EQ(t.occupied(), 1u);
}

TEST(TableTest, FullTableTerminatesAndRollsBack) {
  Table t(4, 2);
  FilterConfig cfg = small_config();
  cfg.num_buckets = 4;
  cfg.bucket_size = 2;
  cfg.max_kicks = 5;
  Rng rng(2);
  uint16_t fp = 1;
  for (uint32_t l = 0; l < 4; ++l)
    for (uint32_t s = 0; s < 2; ++s) t.place(l, s, vec_entry(fp++, uint8_t(l)));

  // Snapshot, attempt, and verify the failed insert left no trace.
  Table before = t;
  KickOutcome k = t.kick_insert(0, vec_entry(99), cfg, rng);
  EXPECT_EQ(k.status, KickOutcome::Status::Terminated);
  EXPECT_EQ(k.kicks_used, cfg.max_kicks);
  EXPECT_TRUE(t == before);
}

// Unique-fingerprint fill: the kick loop should sustain the high load
// factors typical of b=4 cuckoo tables before the first termination.
TEST(TableTest, HighLoadFactorBeforeFirstTermination) {
  const uint32_t m = 1024, b = 4;
  Table t(m, b);
  FilterConfig cfg = small_config();
  cfg.num_buckets = m;
  cfg.bucket_size = b;
  cfg.max_kicks = 500;
  Rng rng(3);
  double beta_at_failure = 0;
  for (uint64_t key = 0;; ++key) {
    KeyDigest kd = digest_key(key, 12, m, 99);
    Entry e{kd.fingerprint, false, FingerprintVector{uint8_t(key & 0xFF)}};
    if (int s = t.free_slot(kd.bucket); s >= 0) {
      t.place(kd.bucket, uint32_t(s), std::move(e));
      continue;
    }
    uint32_t alt = alternate_bucket(kd.bucket, kd.fingerprint, m);
    KickOutcome k = t.kick_insert(alt, std::move(e), cfg, rng);
    if (!k.ok()) {
      beta_at_failure = t.load_factor();
      break;
    }
  }
  EXPECT_GE(beta_at_failure, 0.93);
  EXPECT_EQ(t.scan_occupied(), t.occupied());
}

TEST(TableTest, VictimsStayInTheirOwnPair) {
  const uint32_t m = 64, b = 2;
  Table t(m, b);
  FilterConfig cfg = small_config();
  cfg.num_buckets = m;
  cfg.bucket_size = b;
  Rng rng(7);
  // Every kicked victim must be displaced from one side of its own pair.
  auto observer = [&](uint32_t bucket, uint16_t victim_fp) {
    uint32_t alt = alternate_bucket(bucket, victim_fp, m);
    EXPECT_TRUE(bucket == alt || alternate_bucket(alt, victim_fp, m) == bucket);
  };
  for (uint64_t key = 0; key < 110; ++key) {
    KeyDigest kd = digest_key(key, 12, m, 5);
    uint32_t alt = alternate_bucket(kd.bucket, kd.fingerprint, m);
    Entry e{kd.fingerprint, false, FingerprintVector{uint8_t(key)}};
    if (int s = t.free_slot(kd.bucket); s >= 0)
      t.place(kd.bucket, uint32_t(s), std::move(e));
    else
      t.kick_insert(alt, std::move(e), cfg, rng, nullptr, observer);
  }
  EXPECT_EQ(t.scan_occupied(), t.occupied());
}

TEST(SizeBitsTest, Arithmetic) {
  FilterConfig cfg;
  cfg.variant = Variant::Plain;
  cfg.num_buckets = 1024;
  cfg.bucket_size = 4;
  cfg.kappa_bits = 12;
  cfg.alpha_bits = 8;
  cfg.num_attrs = 2;
  EXPECT_EQ(size_bits(cfg), 1024ull * 4 * 28);

  cfg.variant = Variant::Bloom;
  cfg.bloom_bits = 16;
  EXPECT_EQ(size_bits(cfg), 1024ull * 4 * 28);

  // The Mixed variant pays one converted flag per entry.
  cfg.variant = Variant::Mixed;
  EXPECT_EQ(size_bits(cfg), 1024ull * 4 * 29);
}
