#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "flowsim/perceptron.hpp"

namespace flowsim {

/// Binary classification counts; Active is the positive class.
struct ConfusionMatrix {
  uint64_t tp = 0;
  uint64_t fn = 0;
  uint64_t fp = 0;
  uint64_t tn = 0;

  uint64_t total() const { return tp + fn + fp + tn; }
  void add(TrainKind kind) {
    switch (kind) {
      case TrainKind::TruePositive: tp++; break;
      case TrainKind::FalseNegative: fn++; break;
      case TrainKind::FalsePositive: fp++; break;
      case TrainKind::TrueNegative: tn++; break;
    }
  }
  bool operator==(const ConfusionMatrix&) const = default;
};

/// (TP+TN) / total. Absent for an empty matrix.
std::optional<double> accuracy(const ConfusionMatrix& cm);

/// 2TP / (2TP+FP+FN). Absent when the denominator is zero.
std::optional<double> f1(const ConfusionMatrix& cm);

/// Matthews correlation coefficient; any zero factor in the denominator
/// yields 0 (standard convention).
double mcc(const ConfusionMatrix& cm);

/// MCC via the bisection form (correct - incorrect) / sqrt(actual *
/// predicted); agrees with mcc() to within 1e-12 on all inputs.
double mcc_decomposed(const ConfusionMatrix& cm);

/// Per-feature classification record: the feature's own opinion is the
/// sign of its stored weight; zero-weight events are abstentions and stay
/// out of the matrix.
struct FeatureConfusion {
  ConfusionMatrix cm;
  uint64_t abstain = 0;
};

/// Per-feature weight sums over each system quadrant.
struct QuadrantSums {
  double tp = 0, fn = 0, fp = 0, tn = 0;
};

struct InfluenceAccumulator {
  ConfusionMatrix counts;           // system-level quadrant counts
  std::vector<QuadrantSums> sums;   // per enabled feature
};

double influence_correct(const InfluenceAccumulator& acc, size_t slot);
double influence_incorrect(const InfluenceAccumulator& acc, size_t slot);
double influence_total(const InfluenceAccumulator& acc, size_t slot);

/// Event family split: reuse predictions were made on a cache hit, bypass
/// predictions on a miss.
enum class EventFamily : uint8_t { Reuse = 0, Bypass = 1, All = 2 };

/// Per-epoch mean contributed weight per feature; empty epochs are absent.
struct BiasSeries {
  uint64_t epoch_len = 0;
  // [feature][epoch]
  std::vector<std::vector<std::optional<double>>> mean_weight;
};

/// Streaming accumulator over training events: system and per-feature
/// confusion matrices, influence sums, and the bias series, each split by
/// event family.
class TrainingStats {
 public:
  TrainingStats() = default;
  TrainingStats(size_t feature_count, uint64_t epoch_len);

  void add(const TrainingEvent& ev);

  const ConfusionMatrix& system(EventFamily f = EventFamily::All) const;
  const std::vector<FeatureConfusion>& feature_confusion(EventFamily f = EventFamily::All) const;
  const InfluenceAccumulator& influence(EventFamily f = EventFamily::All) const;
  BiasSeries bias() const;

  size_t feature_count() const { return feature_count_; }
  uint64_t epoch_len() const { return epoch_len_; }
  uint64_t events() const { return events_; }

 private:
  size_t feature_count_ = 0;
  uint64_t epoch_len_ = 1;
  uint64_t events_ = 0;
  ConfusionMatrix system_[3];
  std::vector<FeatureConfusion> feature_[3];
  InfluenceAccumulator influence_[3];
  // [feature][epoch] running (sum, count)
  std::vector<std::vector<std::pair<double, uint64_t>>> bias_;
};

std::vector<FeatureConfusion> per_feature_confusion(std::span<const TrainingEvent> events,
                                                    size_t feature_count);
BiasSeries bias_series(std::span<const TrainingEvent> events, size_t feature_count,
                       uint64_t epoch_len);

/// One completed cache residency. end_flush marks entries still resident
/// when the trace ended (synthetic eviction at the trace end time).
struct LifecycleRecord {
  uint64_t t0 = 0;
  uint64_t tl = 0;
  uint64_t te = 0;
  bool end_flush = false;
  bool operator==(const LifecycleRecord&) const = default;
};

struct DistributionSummary {
  uint64_t count = 0;
  double mean = 0, min = 0, max = 0;
  double p25 = 0, p50 = 0, p75 = 0, p90 = 0, p99 = 0;
};

struct LifecycleStats {
  uint64_t records = 0;
  uint64_t rejected = 0;  // records violating t0 <= tL <= tE
  DistributionSummary lifetime;
  DistributionSummary deadtime;
  DistributionSummary efficiency;
  std::vector<uint64_t> efficiency_histogram;  // 20 bins over [0, 1]
};

inline uint64_t lifecycle_lifetime(const LifecycleRecord& r) { return r.tl - r.t0; }
inline uint64_t lifecycle_deadtime(const LifecycleRecord& r) { return r.te - r.tl; }
/// lifetime / (tE - t0); the 0/0 point residency is defined as 0.
double lifecycle_efficiency(const LifecycleRecord& r);

LifecycleStats lifecycle_stats(std::span<const LifecycleRecord> records);

/// Fast/slow path latency pair for the packet-processing-time estimate.
struct AppConfig {
  double t_fast = 0;
  double t_slow = 0;
};

/// First-order estimate: t_fast + miss_rate * t_slow. Rejects miss rates
/// outside [0, 1].
double estimate_appt(const AppConfig& cfg, double miss_rate);

}  // namespace flowsim
