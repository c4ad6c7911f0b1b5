#pragma once

#include <string>

#include "flowsim/cache_sim.hpp"
#include "flowsim/ranking.hpp"

namespace flowsim {

// Bumped whenever a serialized field changes meaning.
constexpr int kOutputSchemaVersion = 1;

/// Serializes a run summary: schema version, resolved config echo, the
/// hit/miss accounting, and the predictor roll-up when present. Output is
/// deterministic (ordered keys, fixed float formatting).
std::string summary_json(const SimulationResult& result, const std::string& config_echo);

std::string lifecycle_csv(const SimulationResult& result);
std::string feature_confusion_csv(const PredictorReport& report,
                                  std::span<const FeatureId> features);
std::string influence_csv(const PredictorReport& report, std::span<const FeatureId> features);
std::string bias_csv(const PredictorReport& report, std::span<const FeatureId> features);
std::string weights_histogram_csv(const PredictorReport& report,
                                  std::span<const FeatureId> features, int weight_min);
std::string epochs_csv(const PredictorReport& report);

std::string sweep_csv(const SweepResult& sweep);
std::string ig_log_json(const IgResult& result);

/// Derived report emitted by `report`: per-feature mcc + influence + mean
/// bias per family.
std::string metrics_report_csv(const PredictorReport& report,
                               std::span<const FeatureId> features);
std::string lifecycle_stats_csv(const LifecycleStats& stats);

void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

}  // namespace flowsim
