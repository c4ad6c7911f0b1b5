#pragma once

#include <cassert>
#include <cstdint>
#include <deque>
#include <functional>
#include <unordered_map>

#include "flowsim/packet.hpp"

namespace flowsim {

using FlowId = uint64_t;

/// Canonical bidirectional 5-tuple. The (address, port) endpoint pairs are
/// ordered so (ip_lo, port_lo) is lexicographically the smaller endpoint;
/// both directions of a connection map to the same key.
struct FlowKey {
  uint32_t ip_lo = 0;
  uint32_t ip_hi = 0;
  uint16_t port_lo = 0;
  uint16_t port_hi = 0;
  uint8_t proto = 0;

  bool operator==(const FlowKey&) const = default;
};

struct FlowKeyHash {
  size_t operator()(const FlowKey& k) const {
    uint64_t x = (uint64_t(k.ip_lo) << 32) | k.ip_hi;
    uint64_t y = (uint64_t(k.port_lo) << 24) | (uint64_t(k.port_hi) << 8) | k.proto;
    // splitmix64 finalizer over the packed tuple
    uint64_t z = x + 0x9e3779b97f4a7c15ull * (y + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return size_t(z ^ (z >> 31));
  }
};

FlowKey canonical_key(const PacketRecord& pkt);

/// Per-flow persistent state plus the per-residency counters consumed by
/// the pattern features. ref_count and burst_count are meaningful only
/// while the flow is cached and reset to zero on eviction.
struct FlowState {
  uint64_t flow_packets = 0;  // packets since first sight of the flow
  uint64_t ref_count = 0;     // hits since the current cache insertion
  uint64_t burst_count = 0;   // hits landing while the entry held MRU
  bool cached = false;
  bool marked_dormant = false;  // early-eviction mark
};

/// Stateful backing flow table. Unbounded: the cache under study fronts
/// this table and expiry policy is out of scope. FlowIds are dense,
/// assigned 0..n-1 in order of first sight.
class FlowTable {
 public:
  struct Observation {
    FlowId id;
    FlowState& state;
    bool is_new;
  };

  /// Registers one packet arrival for the flow, creating the entry on
  /// first sight. Increments flow_packets.
  Observation observe(const FlowKey& key) {
    auto [it, inserted] = ids_.try_emplace(key, FlowId(states_.size()));
    if (inserted) states_.emplace_back();
    FlowState& st = states_[it->second];
    st.flow_packets++;
    return {it->second, st, inserted};
  }

  void on_cache_insert(FlowState& st) {
    assert(!st.cached);
    st.cached = true;
    st.ref_count = 0;
    st.burst_count = 0;
    st.marked_dormant = false;
  }

  // was_mru: the entry occupied the MRU position of its set immediately
  // before this hit (insertion counts as occupying MRU).
  void on_cache_hit(FlowState& st, bool was_mru) {
    if (!st.cached) {
      assert(!"cache hit on uncached flow state");
      invalid_hits_++;
      return;
    }
    st.ref_count++;
    if (was_mru) st.burst_count++;
  }

  void on_cache_evict(FlowState& st) {
    assert(st.cached);
    st.cached = false;
    st.ref_count = 0;
    st.burst_count = 0;
    st.marked_dormant = false;
  }

  FlowState& state(FlowId id) { return states_[id]; }
  const FlowState& state(FlowId id) const { return states_[id]; }

  size_t size() const { return states_.size(); }
  uint64_t invalid_hits() const { return invalid_hits_; }

 private:
  std::unordered_map<FlowKey, FlowId, FlowKeyHash> ids_;
  std::deque<FlowState> states_;  // deque: observe() hands out stable refs
  uint64_t invalid_hits_ = 0;
};

}  // namespace flowsim
