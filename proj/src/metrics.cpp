#include "flowsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace flowsim {

std::optional<double> accuracy(const ConfusionMatrix& cm) {
  uint64_t total = cm.total();
  if (total == 0) return std::nullopt;
  return double(cm.tp + cm.tn) / double(total);
}

std::optional<double> f1(const ConfusionMatrix& cm) {
  double denom = 2.0 * double(cm.tp) + double(cm.fp) + double(cm.fn);
  if (denom == 0) return std::nullopt;
  return 2.0 * double(cm.tp) / denom;
}

double mcc(const ConfusionMatrix& cm) {
  double tp = double(cm.tp), tn = double(cm.tn), fp = double(cm.fp), fn = double(cm.fn);
  double denom = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
  if (denom == 0) return 0.0;
  return (tp * tn - fp * fn) / std::sqrt(denom);
}

double mcc_decomposed(const ConfusionMatrix& cm) {
  double tp = double(cm.tp), tn = double(cm.tn), fp = double(cm.fp), fn = double(cm.fn);
  double correct = tp * tn;
  double incorrect = fp * fn;
  double actual = (tp + fn) * (tn + fp);
  double predicted = (tp + fp) * (tn + fn);
  if (actual == 0 || predicted == 0) return 0.0;
  return (correct - incorrect) / std::sqrt(actual * predicted);
}

namespace {
// Empty quadrants contribute 0.
double quadrant_mean(double sum, uint64_t count) { return count == 0 ? 0.0 : sum / double(count); }
}  // namespace

double influence_correct(const InfluenceAccumulator& acc, size_t slot) {
  const QuadrantSums& s = acc.sums.at(slot);
  return quadrant_mean(s.tp, acc.counts.tp) - quadrant_mean(s.tn, acc.counts.tn);
}

double influence_incorrect(const InfluenceAccumulator& acc, size_t slot) {
  const QuadrantSums& s = acc.sums.at(slot);
  return quadrant_mean(s.fn, acc.counts.fn) - quadrant_mean(s.fp, acc.counts.fp);
}

double influence_total(const InfluenceAccumulator& acc, size_t slot) {
  return influence_correct(acc, slot) + influence_incorrect(acc, slot);
}

TrainingStats::TrainingStats(size_t feature_count, uint64_t epoch_len)
    : feature_count_(feature_count), epoch_len_(epoch_len == 0 ? 1 : epoch_len) {
  for (auto& f : feature_) f.assign(feature_count, {});
  for (auto& i : influence_) i.sums.assign(feature_count, {});
  bias_.assign(feature_count, {});
}

void TrainingStats::add(const TrainingEvent& ev) {
  events_++;
  bool truth_active = ev.kind == TrainKind::TruePositive || ev.kind == TrainKind::FalseNegative;
  size_t fam = ev.on_hit ? size_t(EventFamily::Reuse) : size_t(EventFamily::Bypass);
  size_t epoch = ev.packet_index / epoch_len_;

  for (size_t f : {fam, size_t(EventFamily::All)}) {
    system_[f].add(ev.kind);
    influence_[f].counts.add(ev.kind);
  }

  for (size_t i = 0; i < feature_count_ && i < ev.weights.size(); ++i) {
    int w = ev.weights[i];
    for (size_t f : {fam, size_t(EventFamily::All)}) {
      QuadrantSums& sums = influence_[f].sums[i];
      switch (ev.kind) {
        case TrainKind::TruePositive: sums.tp += w; break;
        case TrainKind::FalseNegative: sums.fn += w; break;
        case TrainKind::FalsePositive: sums.fp += w; break;
        case TrainKind::TrueNegative: sums.tn += w; break;
      }
      FeatureConfusion& fc = feature_[f][i];
      if (w == 0) {
        fc.abstain++;
      } else if (truth_active) {
        (w > 0 ? fc.cm.tp : fc.cm.fn)++;
      } else {
        (w > 0 ? fc.cm.fp : fc.cm.tn)++;
      }
    }
    auto& series = bias_[i];
    if (series.size() <= epoch) series.resize(epoch + 1, {0.0, 0});
    series[epoch].first += w;
    series[epoch].second++;
  }
}

const ConfusionMatrix& TrainingStats::system(EventFamily f) const { return system_[size_t(f)]; }

const std::vector<FeatureConfusion>& TrainingStats::feature_confusion(EventFamily f) const {
  return feature_[size_t(f)];
}

const InfluenceAccumulator& TrainingStats::influence(EventFamily f) const {
  return influence_[size_t(f)];
}

BiasSeries TrainingStats::bias() const {
  BiasSeries out;
  out.epoch_len = epoch_len_;
  size_t epochs = 0;
  for (const auto& series : bias_) epochs = std::max(epochs, series.size());
  out.mean_weight.assign(feature_count_, std::vector<std::optional<double>>(epochs));
  for (size_t i = 0; i < feature_count_; ++i)
    for (size_t e = 0; e < bias_[i].size(); ++e)
      if (bias_[i][e].second > 0)
        out.mean_weight[i][e] = bias_[i][e].first / double(bias_[i][e].second);
  return out;
}

std::vector<FeatureConfusion> per_feature_confusion(std::span<const TrainingEvent> events,
                                                    size_t feature_count) {
  TrainingStats stats(feature_count, 1);
  for (const TrainingEvent& ev : events) stats.add(ev);
  return stats.feature_confusion(EventFamily::All);
}

BiasSeries bias_series(std::span<const TrainingEvent> events, size_t feature_count,
                       uint64_t epoch_len) {
  if (epoch_len == 0) throw std::invalid_argument("epoch length must be positive");
  TrainingStats stats(feature_count, epoch_len);
  for (const TrainingEvent& ev : events) stats.add(ev);
  return stats.bias();
}

double lifecycle_efficiency(const LifecycleRecord& r) {
  if (r.te == r.t0) return 0.0;
  return double(r.tl - r.t0) / double(r.te - r.t0);
}

namespace {

DistributionSummary summarize(std::vector<double>& values) {
  DistributionSummary s;
  s.count = values.size();
  if (values.empty()) return s;
  std::sort(values.begin(), values.end());
  double sum = 0;
  for (double v : values) sum += v;
  s.mean = sum / double(values.size());
  s.min = values.front();
  s.max = values.back();
  auto quantile = [&](double q) {
    double pos = q * double(values.size() - 1);
    size_t lo = size_t(pos);
    size_t hi = std::min(lo + 1, values.size() - 1);
    double frac = pos - double(lo);
    return values[lo] * (1 - frac) + values[hi] * frac;
  };
  s.p25 = quantile(0.25);
  s.p50 = quantile(0.50);
  s.p75 = quantile(0.75);
  s.p90 = quantile(0.90);
  s.p99 = quantile(0.99);
  return s;
}

}  // namespace

LifecycleStats lifecycle_stats(std::span<const LifecycleRecord> records) {
  LifecycleStats out;
  out.efficiency_histogram.assign(20, 0);
  std::vector<double> lifetimes, deadtimes, efficiencies;
  for (const LifecycleRecord& r : records) {
    if (!(r.t0 <= r.tl && r.tl <= r.te)) {
      out.rejected++;
      continue;
    }
    out.records++;
    lifetimes.push_back(double(lifecycle_lifetime(r)));
    deadtimes.push_back(double(lifecycle_deadtime(r)));
    double eff = lifecycle_efficiency(r);
    efficiencies.push_back(eff);
    size_t bin = std::min(size_t(eff * 20.0), size_t(19));
    out.efficiency_histogram[bin]++;
  }
  out.lifetime = summarize(lifetimes);
  out.deadtime = summarize(deadtimes);
  out.efficiency = summarize(efficiencies);
  return out;
}

double estimate_appt(const AppConfig& cfg, double miss_rate) {
  if (!(miss_rate >= 0.0 && miss_rate <= 1.0))
    throw std::invalid_argument("miss rate outside [0, 1]");
  if (!(cfg.t_slow >= cfg.t_fast && cfg.t_fast >= 0))
    throw std::invalid_argument("latency pair must satisfy t_slow >= t_fast >= 0");
  return cfg.t_fast + miss_rate * cfg.t_slow;
}

}  // namespace flowsim
