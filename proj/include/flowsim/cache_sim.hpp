#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <vector>

#include "flowsim/flow.hpp"
#include "flowsim/metrics.hpp"
#include "flowsim/packet.hpp"
#include "flowsim/perceptron.hpp"

namespace flowsim {

enum class Policy : uint8_t { Lru, Min, Hp };

const char* policy_name(Policy p);
Policy parse_policy(const std::string& name);

struct CacheConfig {
  uint32_t total_entries = 4096;
  uint32_t associativity = 8;  // equal to total_entries => fully associative
  Policy policy = Policy::Lru;
  PredictorConfig predictor;  // consulted for Policy::Hp only
  uint64_t seed = 1;
  uint64_t warmup_packets = 0;  // packets simulated but not counted
  uint64_t epoch_len = 10000;   // bias series / threshold trace granularity

  uint32_t num_sets() const { return total_entries / associativity; }
  void validate() const;
};

constexpr uint64_t kNeverUsed = std::numeric_limits<uint64_t>::max();

/// Position of the next packet of the same flow, per packet position;
/// kNeverUsed when the flow never recurs. Offline input for MIN.
using NextUseIndex = std::vector<uint64_t>;

NextUseIndex build_next_use(const Trace& trace);

/// Low bits of a seeded 64-bit mix of the flow key.
uint32_t set_index(const FlowKey& key, uint32_t num_sets, uint64_t seed);

/// Threshold trace sample plus cumulative applied-update counters.
struct EpochSnapshot {
  uint64_t epoch = 0;
  int phi = 0;
  uint64_t correct_updates = 0;
  uint64_t incorrect_updates = 0;
};

struct PredictorReport {
  TrainingStats stats;
  std::vector<std::vector<uint64_t>> weight_histogram;  // per feature, [-2^(w-1), 2^(w-1)-1]
  std::vector<EpochSnapshot> epochs;
  int final_phi = 0;
  uint64_t correct_updates = 0;
  uint64_t incorrect_updates = 0;
  // Counters at the 2/3 point of the trace, for adaptation-balance checks.
  uint64_t correct_updates_two_thirds = 0;
  uint64_t incorrect_updates_two_thirds = 0;
  uint64_t first_update_packet = kNeverUsed;
};

struct SimulationResult {
  uint64_t total_packets = 0;  // includes warmup
  uint64_t packets = 0;        // counted toward the stats below
  uint64_t hits = 0;
  uint64_t compulsory_misses = 0;  // first-ever packet of a flow
  uint64_t capacity_misses = 0;    // miss on an already-tracked flow
  uint64_t bypasses = 0;           // HP: misses declined insertion
  uint64_t evictions = 0;
  uint64_t distinct_flows = 0;
  std::vector<LifecycleRecord> lifecycle;
  std::optional<PredictorReport> predictor;

  double hit_rate() const { return packets == 0 ? 0.0 : double(hits) / double(packets); }
  double miss_rate() const { return packets == 0 ? 0.0 : 1.0 - hit_rate(); }
};

/// What one packet did to the cache; exposed for stepwise tests.
struct PacketOutcome {
  bool hit = false;
  bool compulsory = false;
  bool inserted = false;
  bool bypassed = false;
  bool evicted = false;
};

/// Trace-driven set-associative flow cache running one of the three
/// management policies. Single-threaded per instance; independent
/// instances may run concurrently over the same immutable trace.
class CacheSim {
 public:
  CacheSim(const Trace& trace, CacheConfig cfg);

  bool done() const { return pos_ >= trace_->packets.size(); }
  uint64_t position() const { return pos_; }
  PacketOutcome step();

  /// Flushes resident entries (synthetic eviction at trace end) and
  /// returns the result. Call once, after the packet loop.
  SimulationResult finish();

  const Predictor* predictor() const { return predictor_.get(); }
  const FlowTable& flows() const { return flows_; }

 private:
  struct Entry {
    FlowId flow = 0;
    uint64_t last_use = 0;   // recency stamp; max within set = MRU
    uint64_t next_use = kNeverUsed;  // MIN only
    uint64_t t0 = 0;
    uint64_t tl = 0;
  };
  struct Set {
    std::vector<Entry> entries;
    uint64_t use_tick = 0;
  };

  int find_entry(const Set& set, FlowId flow) const;
  int pick_victim(const Set& set) const;
  void evict(Set& set, size_t idx, uint64_t now_ts);
  void record_epoch(bool final_epoch);

  const Trace* trace_;
  CacheConfig cfg_;
  FlowTable flows_;
  std::vector<Set> sets_;
  NextUseIndex next_use_;  // MIN only
  std::unique_ptr<Predictor> predictor_;
  SimulationResult result_;
  uint64_t pos_ = 0;
  uint64_t next_epoch_mark_ = 0;
  uint64_t two_thirds_mark_ = 0;
  uint64_t two_thirds_correct_ = 0;
  uint64_t two_thirds_incorrect_ = 0;
  std::vector<EpochSnapshot> epochs_;
  TrainingStats stats_;
  bool finished_ = false;
};

SimulationResult simulate(const Trace& trace, const CacheConfig& cfg);

}  // namespace flowsim
