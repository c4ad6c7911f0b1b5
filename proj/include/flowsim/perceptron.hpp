#pragma once

#include <cstdint>
#include <deque>
#include <random>
#include <span>
#include <vector>

#include "flowsim/features.hpp"

namespace flowsim {

struct PredictorConfig {
  std::vector<FeatureId> features = {6, 27, 21, 18, 10};
  int counter_width = 5;  // w: weights clamp to [-2^(w-1), 2^(w-1)-1]
  int table_bits = 16;    // m: 2^m entries per feature table (f26 uses 1)
  int history_depth = 8;  // H: capacity of each per-set history queue
  int initial_train_threshold = 8;  // phi0
  int adapt_speed = 64;             // saturation bound of the adaptation counter
};

enum class Decision : uint8_t { Dormant = 0, Active = 1 };

/// One inference outcome. decision is Active when the summed correlation
/// is >= 0 (ties break toward Active so cold tables act like LRU), and
/// confidence is the magnitude of the sum.
struct Prediction {
  int sum = 0;
  Decision decision = Decision::Active;
  int confidence = 0;
  FeatureVector vector;
  std::vector<int8_t> weights;  // per enabled feature, sampled at inference
  bool on_hit = false;          // flow was cached when this inference ran
};

// Confusion-matrix case a resolved prediction landed in. Active is the
// positive class.
enum class TrainKind : uint8_t { TruePositive, FalseNegative, FalsePositive, TrueNegative };

inline bool train_kind_correct(TrainKind k) {
  return k == TrainKind::TruePositive || k == TrainKind::TrueNegative;
}

/// Ground-truth resolution of one queued prediction, emitted by
/// reinforcement. Carries the stored prediction's vector and weights so
/// the metrics layer can attribute per-feature contributions.
struct TrainingEvent {
  TrainKind kind;
  bool applied = false;  // a weight update was actually performed
  bool on_hit = false;   // stored prediction's inference context (reuse vs bypass family)
  uint64_t packet_index = 0;
  int confidence = 0;
  FeatureVector vector;
  std::vector<int8_t> weights;
};

/// Saturating add on a w-bit signed counter.
constexpr int8_t saturating_add(int8_t weight, int delta, int width) {
  int lo = -(1 << (width - 1));
  int hi = (1 << (width - 1)) - 1;
  int v = int(weight) + delta;
  return int8_t(v < lo ? lo : (v > hi ? hi : v));
}

/// The perceptron weight store: one saturating-counter array per enabled
/// feature, indexed by the assembled feature value.
class FeatureTables {
 public:
  explicit FeatureTables(const PredictorConfig& cfg);

  int8_t weight(size_t slot, uint16_t index) const { return tables_[slot][mask(slot, index)]; }

  // Returns true when the stored weight changed (not already saturated).
  bool adjust(size_t slot, uint16_t index, int delta) {
    int8_t& w = tables_[slot][mask(slot, index)];
    int8_t next = saturating_add(w, delta, width_);
    bool changed = next != w;
    w = next;
    return changed;
  }

  int weight_min() const { return -(1 << (width_ - 1)); }
  int weight_max() const { return (1 << (width_ - 1)) - 1; }
  size_t table_size(size_t slot) const { return tables_[slot].size(); }
  size_t count() const { return tables_.size(); }

  /// Exact weight counts per feature over [weight_min, weight_max].
  std::vector<std::vector<uint64_t>> histogram() const;

 private:
  uint16_t mask(size_t slot, uint16_t index) const {
    return uint16_t(index & (tables_[slot].size() - 1));
  }

  std::vector<std::vector<int8_t>> tables_;
  int width_;
};

/// Seznec-style adaptive training threshold, targeting a 1:1 ratio of
/// correct to incorrect applied updates. theta (the decision threshold)
/// stays fixed at zero.
struct ThresholdState {
  int phi = 8;
  int counter = 0;  // saturates at +/- adapt_speed
  uint64_t correct_updates = 0;
  uint64_t incorrect_updates = 0;
};

void adapt_threshold(ThresholdState& thr, bool correct, int speed);

/// Flow correlator: weight tables, per-set dual history queues, and the
/// four-case reinforcement algorithm.
class Predictor {
 public:
  Predictor(PredictorConfig cfg, uint32_t num_sets, uint64_t seed);

  const PredictorConfig& config() const { return cfg_; }
  std::span<const FeatureId> features() const { return cfg_.features; }

  Prediction infer(const FeatureContext& ctx, bool on_hit);
  Prediction infer(FeatureVector vec, bool on_hit) const;

  /// Resolves the flow's outstanding prediction (if any) against ground
  /// truth and enqueues new_pred; returns the training events fired.
  std::vector<TrainingEvent> reinforce(uint32_t set_id, FlowId flow, Prediction new_pred,
                                       uint64_t packet_index);

  const ThresholdState& threshold() const { return thr_; }
  const FeatureTables& tables() const { return tables_; }
  FeatureTables& tables() { return tables_; }
  std::mt19937_64& rng() { return rng_; }

  /// Packet index of the first applied weight update, or UINT64_MAX.
  uint64_t first_update_packet() const { return first_update_packet_; }

  size_t queue_size(uint32_t set_id, Decision which) const;
  /// Outstanding entries for the flow across both queues of the set.
  size_t queue_count(uint32_t set_id, FlowId flow) const;
  bool queue_contains(uint32_t set_id, FlowId flow) const {
    return queue_count(set_id, flow) > 0;
  }

 private:
  struct QueueEntry {
    FlowId flow;
    Prediction pred;
  };
  struct SetQueues {
    std::deque<QueueEntry> active;
    std::deque<QueueEntry> dormant;
  };

  std::deque<QueueEntry>& queue_for(SetQueues& q, Decision d) {
    return d == Decision::Active ? q.active : q.dormant;
  }

  // Applies +/-1 across the stored vector; returns true if any weight moved.
  bool train_vector(const FeatureVector& vec, int delta);
  TrainingEvent make_event(TrainKind kind, bool applied, const QueueEntry& entry,
                           uint64_t packet_index) const;
  void push_prediction(SetQueues& q, FlowId flow, Prediction&& pred, uint64_t packet_index,
                       std::vector<TrainingEvent>& events);

  PredictorConfig cfg_;
  FeatureTables tables_;
  std::vector<SetQueues> queues_;
  ThresholdState thr_;
  std::mt19937_64 rng_;
  uint64_t first_update_packet_ = UINT64_MAX;
  uint64_t current_packet_ = 0;
};

}  // namespace flowsim
