#pragma once

#include <cassert>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "ccf/attribute_sketch.hpp"
#include "ccf/config.hpp"
#include "ccf/hashing.hpp"
#include "ccf/rng.hpp"

namespace ccf {

/// One bucket's share of a converted group. The head slot of a group's run in
/// a bucket carries the side's entry count and bit share; the remaining slots
/// of the run carry an empty segment.
struct GroupSegment {
  uint8_t entry_count = 0;
  BitVector bits;

  bool is_head() const { return entry_count > 0; }
  friend bool operator==(const GroupSegment&, const GroupSegment&) = default;
};

using AttributePayload =
    std::variant<std::monostate, FingerprintVector, BloomBits, GroupSegment>;

struct Entry {
  uint16_t fingerprint = 0;  // 0 = empty slot
  bool converted = false;    // Mixed variant: payload belongs to a group
  AttributePayload payload;

  bool empty() const { return fingerprint == 0; }
  friend bool operator==(const Entry&, const Entry&) = default;
};

struct KickOutcome {
  enum class Status { Success, Terminated };
  Status status = Status::Success;
  uint32_t kicks_used = 0;

  bool ok() const { return status == Status::Success; }
};

/// m buckets of b entries with partial-key kick relocation. The table knows
/// nothing about filter variants except how converted-group payloads are laid
/// out, which the kick loop must preserve.
class Table {
 public:
  Table() = default;
  Table(uint32_t num_buckets, uint32_t bucket_size)
      : m_(num_buckets),
        b_(bucket_size),
        slots_(size_t(num_buckets) * bucket_size) {}

  uint32_t num_buckets() const { return m_; }
  uint32_t bucket_size() const { return b_; }
  uint64_t capacity() const { return uint64_t(m_) * b_; }
  uint64_t occupied() const { return occupied_; }
  double load_factor() const {
    return capacity() == 0 ? 0.0 : double(occupied_) / double(capacity());
  }

  const Entry& at(uint32_t bucket, uint32_t slot) const {
    return slots_[size_t(bucket) * b_ + slot];
  }
  Entry& at(uint32_t bucket, uint32_t slot) {
    return slots_[size_t(bucket) * b_ + slot];
  }

  std::span<const Entry> bucket(uint32_t l) const {
    return {slots_.data() + size_t(l) * b_, b_};
  }

  /// Occupied entries of bucket l in slot order (stable between mutations).
  std::vector<const Entry*> bucket_scan(uint32_t l) const {
    std::vector<const Entry*> out;
    for (const Entry& e : bucket(l))
      if (!e.empty()) out.push_back(&e);
    return out;
  }

  int free_slot(uint32_t l) const {
    for (uint32_t s = 0; s < b_; ++s)
      if (at(l, s).empty()) return int(s);
    return -1;
  }

  bool bucket_full(uint32_t l) const { return free_slot(l) < 0; }

  /// Physical entries carrying fp in the bucket pair; a converted group
  /// counts each of its slots. Handles the degenerate self-paired bucket.
  uint32_t count_fingerprint(uint32_t l, uint32_t l_alt, uint16_t fp) const {
    uint32_t n = 0;
    for (const Entry& e : bucket(l))
      if (e.fingerprint == fp) ++n;
    if (l_alt != l)
      for (const Entry& e : bucket(l_alt))
        if (e.fingerprint == fp) ++n;
    return n;
  }

  void place(uint32_t bucket, uint32_t slot, Entry e) {
    assert(at(bucket, slot).empty() && !e.empty());
    at(bucket, slot) = std::move(e);
    ++occupied_;
  }

  Entry take(uint32_t bucket, uint32_t slot) {
    assert(!at(bucket, slot).empty());
    Entry e = std::move(at(bucket, slot));
    at(bucket, slot) = Entry{};
    --occupied_;
    return e;
  }

  /// Fresh scan of non-empty slots; must always agree with occupied().
  uint64_t scan_occupied() const {
    uint64_t n = 0;
    for (const Entry& e : slots_)
      if (!e.empty()) ++n;
    return n;
  }

  // -------------------------------------------------------------------------
  // Converted-group layout
  // -------------------------------------------------------------------------

  /// Reassembles the group for fp in the pair (l, l_alt): low-bucket share
  /// first, high-bucket share appended.
  BloomGroup read_group(uint32_t l, uint32_t l_alt, uint16_t fp,
                        const FilterConfig& cfg) const {
    uint32_t lo = l < l_alt ? l : l_alt;
    uint32_t hi = l < l_alt ? l_alt : l;
    BloomGroup g;
    g.fingerprint = fp;
    g.num_hashes = uint8_t(group_num_hashes(cfg));
    g.entry_count_low = uint8_t(count_group_slots(lo, fp));
    g.entry_count_high = lo == hi ? 0 : uint8_t(count_group_slots(hi, fp));
    if (const GroupSegment* s = find_head(lo, fp)) g.bits = s->bits;
    if (lo != hi)
      if (const GroupSegment* s = find_head(hi, fp)) g.bits.append(s->bits);
    assert(g.bits.size() == group_total_bits(cfg));
    return g;
  }

  /// Rewrites the group's slots from its reassembled bits. Derives the side
  /// split from the current physical slot positions, so callers move slots
  /// first and then write back.
  void write_group(uint32_t l, uint32_t l_alt, const BloomGroup& g,
                   const FilterConfig& cfg) {
    uint32_t lo = l < l_alt ? l : l_alt;
    uint32_t hi = l < l_alt ? l_alt : l;
    if (lo == hi) {
      write_side(lo, g.fingerprint, uint32_t(g.bits.size()), 0, g, cfg);
      return;
    }
    uint32_t r_low = count_group_slots(lo, g.fingerprint);
    uint32_t low_bits = group_side_bits(r_low, cfg);
    write_side(lo, g.fingerprint, low_bits, 0, g, cfg);
    write_side(hi, g.fingerprint, uint32_t(g.bits.size()) - low_bits, low_bits,
               g, cfg);
  }

  bool has_group(uint32_t l, uint32_t l_alt, uint16_t fp) const {
    if (find_head(l, fp)) return true;
    return l != l_alt && find_head(l_alt, fp) != nullptr;
  }

  // -------------------------------------------------------------------------
  // Kick loop
  // -------------------------------------------------------------------------

  using KickObserver = std::function<void(uint32_t bucket, uint16_t victim_fp)>;

  /// Inserts `incoming` starting at `start_bucket`, displacing residents to
  /// their alternate buckets up to cfg.max_kicks times. Converted-group slots
  /// move only within their own pair and are re-packed in place. On
  /// Terminated every displacement is rolled back, so the table is unchanged
  /// and the caller gets its entry back for resize handling.
  KickOutcome kick_insert(uint32_t start_bucket, Entry incoming,
                          const FilterConfig& cfg, Rng& rng,
                          uint64_t* group_kick_counter = nullptr,
                          const KickObserver& on_kick = {}) {
    // Displacement log for rollback. A swap step exchanged the homeless
    // entry with (bucket, slot). A cascade step moved a group slot from
    // (bucket, slot) to (other, other_slot), put the homeless entry into
    // (bucket, slot) and evicted the plain entry that was at other_slot.
    struct Step {
      bool cascade;
      uint32_t bucket, slot;
      uint32_t other, other_slot;
    };
    std::vector<Step> path;
    uint32_t cur = start_bucket;

    for (uint32_t kicks = 0;; ++kicks) {
      if (int slot = free_slot(cur); slot >= 0) {
        place(cur, uint32_t(slot), std::move(incoming));
        return {KickOutcome::Status::Success, kicks};
      }
      if (kicks == cfg.max_kicks) break;

      auto group_movable = [&](uint32_t slot) {
        uint32_t other = alternate_bucket(cur, at(cur, slot).fingerprint, m_);
        return other != cur && !bucket_full(other);
      };
      // Moves a group slot across its pair and takes its place; this always
      // ends the chain.
      auto move_group = [&](uint32_t slot) {
        uint16_t gfp = at(cur, slot).fingerprint;
        uint32_t other = alternate_bucket(cur, gfp, m_);
        BloomGroup g = read_group(cur, other, gfp, cfg);
        take(cur, slot);
        place(other, uint32_t(free_slot(other)),
              Entry{gfp, true, GroupSegment{}});
        write_group(cur, other, g, cfg);
        place(cur, slot, std::move(incoming));
        if (group_kick_counter) ++*group_kick_counter;
        if (on_kick) on_kick(cur, gfp);
      };

      uint32_t vslot = rng.below(b_);
      if (at(cur, vslot).converted) {
        if (group_movable(vslot)) {
          move_group(vslot);
          return {KickOutcome::Status::Success, kicks + 1};
        }
        // Pinned group slot: redraw among plain slots and movable group
        // slots.
        std::vector<uint32_t> candidates;
        for (uint32_t s = 0; s < b_; ++s)
          if (!at(cur, s).converted || group_movable(s)) candidates.push_back(s);
        if (!candidates.empty()) {
          vslot = candidates[rng.below(uint32_t(candidates.size()))];
          if (at(cur, vslot).converted) {
            move_group(vslot);
            return {KickOutcome::Status::Success, kicks + 1};
          }
        } else {
          // Every slot is a pinned group. Cascade: shift a group slot into
          // its pair's other side by evicting a plain entry from there, and
          // continue the chain with the evicted entry. The group never
          // leaves its pair.
          bool cascaded = false;
          uint32_t probe = rng.below(b_);
          for (uint32_t i = 0; i < b_ && !cascaded; ++i) {
            uint32_t gslot = (probe + i) % b_;
            uint16_t gfp = at(cur, gslot).fingerprint;
            uint32_t other = alternate_bucket(cur, gfp, m_);
            if (other == cur) continue;
            std::vector<uint32_t> evictable;
            for (uint32_t s = 0; s < b_; ++s)
              if (!at(other, s).converted) evictable.push_back(s);
            if (evictable.empty()) continue;
            uint32_t wslot = evictable[rng.below(uint32_t(evictable.size()))];
            Entry evicted = take(other, wslot);
            BloomGroup g = read_group(cur, other, gfp, cfg);
            take(cur, gslot);
            place(other, wslot, Entry{gfp, true, GroupSegment{}});
            write_group(cur, other, g, cfg);
            place(cur, gslot, std::move(incoming));
            incoming = std::move(evicted);
            path.push_back({true, cur, gslot, other, wslot});
            if (group_kick_counter) ++*group_kick_counter;
            if (on_kick) on_kick(cur, gfp);
            cur = alternate_bucket(other, incoming.fingerprint, m_);
            cascaded = true;
          }
          if (cascaded) continue;
          break;  // no plain entries reachable at all: give up
        }
      }

      Entry& victim = at(cur, vslot);
      if (on_kick) on_kick(cur, victim.fingerprint);
      std::swap(incoming, victim);
      path.push_back({false, cur, vslot, 0, 0});
      cur = alternate_bucket(cur, incoming.fingerprint, m_);
    }

    // Undo the displacement chain back to front, restoring every slot and
    // group split exactly.
    for (auto it = path.rbegin(); it != path.rend(); ++it) {
      if (!it->cascade) {
        std::swap(incoming, at(it->bucket, it->slot));
        continue;
      }
      Entry placed = take(it->bucket, it->slot);
      uint16_t gfp = at(it->other, it->other_slot).fingerprint;
      BloomGroup g = read_group(it->bucket, it->other, gfp, cfg);
      take(it->other, it->other_slot);
      place(it->bucket, it->slot, Entry{gfp, true, GroupSegment{}});
      write_group(it->bucket, it->other, g, cfg);
      place(it->other, it->other_slot, std::move(incoming));
      incoming = std::move(placed);
    }
    return {KickOutcome::Status::Terminated, cfg.max_kicks};
  }

  friend bool operator==(const Table& a, const Table& b) {
    return a.m_ == b.m_ && a.b_ == b.b_ && a.occupied_ == b.occupied_ &&
           a.slots_ == b.slots_;
  }

 private:
  uint32_t count_group_slots(uint32_t l, uint16_t fp) const {
    uint32_t n = 0;
    for (const Entry& e : bucket(l))
      if (e.fingerprint == fp && e.converted) ++n;
    return n;
  }

  const GroupSegment* find_head(uint32_t l, uint16_t fp) const {
    for (const Entry& e : bucket(l)) {
      if (e.fingerprint != fp || !e.converted) continue;
      const auto* seg = std::get_if<GroupSegment>(&e.payload);
      if (seg && seg->is_head()) return seg;
    }
    return nullptr;
  }

  /// Rewrites one bucket's share: first group slot becomes the head with
  /// `nbits` bits starting at `offset`, remaining slots get empty segments.
  void write_side(uint32_t l, uint16_t fp, uint32_t nbits, uint32_t offset,
                  const BloomGroup& g, const FilterConfig& cfg) {
    (void)cfg;
    bool head_written = false;
    uint32_t r = count_group_slots(l, fp);
    for (uint32_t s = 0; s < b_; ++s) {
      Entry& e = at(l, s);
      if (e.fingerprint != fp || !e.converted) continue;
      if (!head_written) {
        e.payload = GroupSegment{uint8_t(r), g.bits.slice(offset, nbits)};
        head_written = true;
      } else {
        e.payload = GroupSegment{};
      }
    }
  }

  uint32_t m_ = 0;
  uint32_t b_ = 0;
  uint64_t occupied_ = 0;
  std::vector<Entry> slots_;
};

}  // namespace ccf
