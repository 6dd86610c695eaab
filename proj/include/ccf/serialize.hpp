#pragma once

#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include "ccf/filter.hpp"
#include "ccf/table.hpp"

// Versioned little-endian binary format for (config, bucket grid). Layout:
//
//   magic   u32  "CCF1" (0x31464343)
//   version u32  currently 1
//   config  variant u8, cycle_detection u8, kappa_bits u8, alpha_bits u8,
//           num_attrs u32, num_buckets u32, bucket_size u32, max_dupes u32,
//           max_chain u32, bloom_bits u32, bloom_hashes u32, max_kicks u32,
//           seed u64
//   grid    m*b entries: fingerprint u16, flags u8 (bit0 converted,
//           bits 1-2 payload kind 0=none 1=vector 2=bloom 3=segment), then
//           vector: u8 width + that many bytes
//           bloom / segment bits: u32 bit count + ceil(bits/64) u64 words
//           segment additionally leads with u8 entry_count
//
// Round-trip fidelity is the contract: deserialize(serialize(f)) == f.

namespace ccf {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace io {

inline constexpr uint32_t kMagic = 0x31464343u;  // "CCF1"
inline constexpr uint32_t kVersion = 1;

inline void put_u8(std::ostream& os, uint8_t v) {
  os.put(char(v));
}
inline void put_u16(std::ostream& os, uint16_t v) {
  for (int i = 0; i < 2; ++i) os.put(char(v >> (8 * i)));
}
inline void put_u32(std::ostream& os, uint32_t v) {
  for (int i = 0; i < 4; ++i) os.put(char(v >> (8 * i)));
}
inline void put_u64(std::ostream& os, uint64_t v) {
  for (int i = 0; i < 8; ++i) os.put(char(v >> (8 * i)));
}

inline uint8_t get_u8(std::istream& is) {
  int c = is.get();
  if (c == EOF) throw FormatError("unexpected end of filter file");
  return uint8_t(c);
}
inline uint16_t get_u16(std::istream& is) {
  uint16_t v = 0;
  for (int i = 0; i < 2; ++i) v |= uint16_t(get_u8(is)) << (8 * i);
  return v;
}
inline uint32_t get_u32(std::istream& is) {
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= uint32_t(get_u8(is)) << (8 * i);
  return v;
}
inline uint64_t get_u64(std::istream& is) {
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= uint64_t(get_u8(is)) << (8 * i);
  return v;
}

inline void put_bits(std::ostream& os, const BitVector& bits) {
  put_u32(os, bits.size());
  for (uint64_t w : bits.words()) put_u64(os, w);
}

inline BitVector get_bits(std::istream& is) {
  uint32_t n = get_u32(is);
  BitVector bits(n);
  for (auto& w : bits.words()) w = get_u64(is);
  return bits;
}

}  // namespace io

inline void save_filter(const ConditionalCuckooFilter& f, std::ostream& os) {
  const FilterConfig& cfg = f.config();
  io::put_u32(os, io::kMagic);
  io::put_u32(os, io::kVersion);
  io::put_u8(os, uint8_t(cfg.variant));
  io::put_u8(os, cfg.cycle_detection ? 1 : 0);
  io::put_u8(os, uint8_t(cfg.kappa_bits));
  io::put_u8(os, uint8_t(cfg.alpha_bits));
  io::put_u32(os, cfg.num_attrs);
  io::put_u32(os, cfg.num_buckets);
  io::put_u32(os, cfg.bucket_size);
  io::put_u32(os, cfg.max_dupes);
  io::put_u32(os, cfg.max_chain);
  io::put_u32(os, cfg.bloom_bits);
  io::put_u32(os, cfg.bloom_hashes);
  io::put_u32(os, cfg.max_kicks);
  io::put_u64(os, cfg.seed);

  const Table& t = f.table();
  for (uint32_t l = 0; l < t.num_buckets(); ++l) {
    for (uint32_t s = 0; s < t.bucket_size(); ++s) {
      const Entry& e = t.at(l, s);
      io::put_u16(os, e.fingerprint);
      uint8_t kind = uint8_t(e.payload.index());
      io::put_u8(os, uint8_t((e.converted ? 1 : 0) | (kind << 1)));
      if (const auto* v = std::get_if<FingerprintVector>(&e.payload)) {
        io::put_u8(os, uint8_t(v->size()));
        for (uint8_t b : *v) io::put_u8(os, b);
      } else if (const auto* bl = std::get_if<BloomBits>(&e.payload)) {
        io::put_bits(os, *bl);
      } else if (const auto* g = std::get_if<GroupSegment>(&e.payload)) {
        io::put_u8(os, g->entry_count);
        io::put_bits(os, g->bits);
      }
    }
  }
  if (!os) throw FormatError("write failed");
}

inline ConditionalCuckooFilter load_filter(std::istream& is) {
  if (io::get_u32(is) != io::kMagic)
    throw FormatError("not a conditional cuckoo filter file (bad magic)");
  uint32_t version = io::get_u32(is);
  if (version != io::kVersion)
    throw FormatError("unsupported filter format version " +
                      std::to_string(version));

  FilterConfig cfg;
  cfg.variant = Variant(io::get_u8(is));
  cfg.cycle_detection = io::get_u8(is) != 0;
  cfg.kappa_bits = io::get_u8(is);
  cfg.alpha_bits = io::get_u8(is);
  cfg.num_attrs = io::get_u32(is);
  cfg.num_buckets = io::get_u32(is);
  cfg.bucket_size = io::get_u32(is);
  cfg.max_dupes = io::get_u32(is);
  cfg.max_chain = io::get_u32(is);
  cfg.bloom_bits = io::get_u32(is);
  cfg.bloom_hashes = io::get_u32(is);
  cfg.max_kicks = io::get_u32(is);
  cfg.seed = io::get_u64(is);
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("invalid filter configuration: ") +
                      e.what());
  }
  if (uint64_t(cfg.num_buckets) * cfg.bucket_size > (1ull << 32))
    throw FormatError("filter dimensions exceed the supported size");

  Table t(cfg.num_buckets, cfg.bucket_size);
  for (uint32_t l = 0; l < cfg.num_buckets; ++l) {
    for (uint32_t s = 0; s < cfg.bucket_size; ++s) {
      uint16_t fp = io::get_u16(is);
      uint8_t flags = io::get_u8(is);
      Entry e;
      e.fingerprint = fp;
      e.converted = flags & 1;
      switch (flags >> 1) {
        case 0:
          break;
        case 1: {
          FingerprintVector v(io::get_u8(is));
          for (auto& b : v) b = io::get_u8(is);
          e.payload = std::move(v);
          break;
        }
        case 2:
          e.payload = io::get_bits(is);
          break;
        case 3: {
          GroupSegment g;
          g.entry_count = io::get_u8(is);
          g.bits = io::get_bits(is);
          e.payload = std::move(g);
          break;
        }
        default:
          throw FormatError("corrupt entry payload kind");
      }
      if (!e.empty()) t.place(l, s, std::move(e));
    }
  }
  return ConditionalCuckooFilter::adopt(cfg, std::move(t));
}

inline void save_filter(const ConditionalCuckooFilter& f,
                        const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("cannot open " + path + " for writing");
  save_filter(f, os);
}

inline ConditionalCuckooFilter load_filter(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open " + path);
  return load_filter(is);
}

}  // namespace ccf
