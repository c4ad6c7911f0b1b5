#include "flowsim/run_output.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace flowsim {

using ordered_json = nlohmann::ordered_json;

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

ordered_json confusion_json(const ConfusionMatrix& cm) {
  return ordered_json{{"tp", cm.tp}, {"fn", cm.fn}, {"fp", cm.fp}, {"tn", cm.tn}};
}

}  // namespace

std::string summary_json(const SimulationResult& result, const std::string& config_echo) {
  ordered_json j;
  j["schema_version"] = kOutputSchemaVersion;
  j["config"] = ordered_json::parse(config_echo);
  j["total_packets"] = result.total_packets;
  j["packets"] = result.packets;
  j["hits"] = result.hits;
  j["compulsory_misses"] = result.compulsory_misses;
  j["capacity_misses"] = result.capacity_misses;
  j["bypasses"] = result.bypasses;
  j["evictions"] = result.evictions;
  j["distinct_flows"] = result.distinct_flows;
  j["hit_rate"] = result.hit_rate();
  if (result.predictor.has_value()) {
    const PredictorReport& rep = *result.predictor;
    ordered_json p;
    p["system_confusion"] = confusion_json(rep.stats.system());
    p["system_confusion_reuse"] = confusion_json(rep.stats.system(EventFamily::Reuse));
    p["system_confusion_bypass"] = confusion_json(rep.stats.system(EventFamily::Bypass));
    p["system_mcc"] = mcc(rep.stats.system());
    p["final_phi"] = rep.final_phi;
    p["correct_updates"] = rep.correct_updates;
    p["incorrect_updates"] = rep.incorrect_updates;
    p["correct_updates_two_thirds"] = rep.correct_updates_two_thirds;
    p["incorrect_updates_two_thirds"] = rep.incorrect_updates_two_thirds;
    p["first_update_packet"] =
        rep.first_update_packet == kNeverUsed ? ordered_json() : ordered_json(rep.first_update_packet);
    j["predictor"] = std::move(p);
  }
  return j.dump(2) + "\n";
}

std::string lifecycle_csv(const SimulationResult& result) {
  std::string out = "t0_ns,tl_ns,te_ns,end_flush\n";
  for (const LifecycleRecord& r : result.lifecycle) {
    out += std::to_string(r.t0) + ',' + std::to_string(r.tl) + ',' + std::to_string(r.te) + ',' +
           (r.end_flush ? "1" : "0") + '\n';
  }
  return out;
}

namespace {

const char* family_name(EventFamily f) {
  switch (f) {
    case EventFamily::Reuse: return "reuse";
    case EventFamily::Bypass: return "bypass";
    case EventFamily::All: return "all";
  }
  return "?";
}

constexpr EventFamily kFamilies[] = {EventFamily::All, EventFamily::Reuse, EventFamily::Bypass};

}  // namespace

std::string feature_confusion_csv(const PredictorReport& report,
                                  std::span<const FeatureId> features) {
  std::string out = "feature,family,tp,fn,fp,tn,abstain\n";
  for (EventFamily fam : kFamilies) {
    const auto& rows = report.stats.feature_confusion(fam);
    for (size_t i = 0; i < features.size(); ++i) {
      const FeatureConfusion& fc = rows[i];
      out += std::to_string(int(features[i])) + ',' + family_name(fam) + ',' +
             std::to_string(fc.cm.tp) + ',' + std::to_string(fc.cm.fn) + ',' +
             std::to_string(fc.cm.fp) + ',' + std::to_string(fc.cm.tn) + ',' +
             std::to_string(fc.abstain) + '\n';
    }
  }
  return out;
}

std::string influence_csv(const PredictorReport& report, std::span<const FeatureId> features) {
  std::string out = "feature,family,wsum_tp,wsum_fn,wsum_fp,wsum_tn,count_tp,count_fn,count_fp,count_tn\n";
  for (EventFamily fam : kFamilies) {
    const InfluenceAccumulator& acc = report.stats.influence(fam);
    for (size_t i = 0; i < features.size(); ++i) {
      const QuadrantSums& s = acc.sums[i];
      out += std::to_string(int(features[i])) + ',' + family_name(fam) + ',' + fmt_double(s.tp) +
             ',' + fmt_double(s.fn) + ',' + fmt_double(s.fp) + ',' + fmt_double(s.tn) + ',' +
             std::to_string(acc.counts.tp) + ',' + std::to_string(acc.counts.fn) + ',' +
             std::to_string(acc.counts.fp) + ',' + std::to_string(acc.counts.tn) + '\n';
    }
  }
  return out;
}

std::string bias_csv(const PredictorReport& report, std::span<const FeatureId> features) {
  BiasSeries bias = report.stats.bias();
  std::string out = "epoch,feature,mean_weight\n";
  size_t epochs = bias.mean_weight.empty() ? 0 : bias.mean_weight[0].size();
  for (size_t e = 0; e < epochs; ++e) {
    for (size_t i = 0; i < features.size(); ++i) {
      const auto& cell = bias.mean_weight[i][e];
      out += std::to_string(e) + ',' + std::to_string(int(features[i])) + ',' +
             (cell.has_value() ? fmt_double(*cell) : "") + '\n';
    }
  }
  return out;
}

std::string weights_histogram_csv(const PredictorReport& report,
                                  std::span<const FeatureId> features, int weight_min) {
  std::string out = "feature,weight,count\n";
  for (size_t i = 0; i < features.size(); ++i) {
    const auto& counts = report.weight_histogram[i];
    for (size_t b = 0; b < counts.size(); ++b) {
      out += std::to_string(int(features[i])) + ',' + std::to_string(weight_min + int(b)) + ',' +
             std::to_string(counts[b]) + '\n';
    }
  }
  return out;
}

std::string epochs_csv(const PredictorReport& report) {
  std::string out = "epoch,phi,correct_updates,incorrect_updates\n";
  for (const EpochSnapshot& e : report.epochs) {
    out += std::to_string(e.epoch) + ',' + std::to_string(e.phi) + ',' +
           std::to_string(e.correct_updates) + ',' + std::to_string(e.incorrect_updates) + '\n';
  }
  return out;
}

std::string sweep_csv(const SweepResult& sweep) {
  std::string out = "prefix_len,feature_id,hit_rate,gain\n";
  std::vector<double> gains = adjacent_gain(sweep);
  for (size_t i = 0; i < sweep.ranking.size(); ++i) {
    out += std::to_string(i + 1) + ',' + std::to_string(int(sweep.ranking[i])) + ',' +
           fmt_double(sweep.hit_rate[i]) + ',' + fmt_double(gains[i]) + '\n';
  }
  return out;
}

std::string ig_log_json(const IgResult& result) {
  ordered_json j;
  j["schema_version"] = kOutputSchemaVersion;
  j["converged"] = result.converged;
  auto ranking_json = [](const Ranking& r) {
    ordered_json arr = ordered_json::array();
    for (FeatureId id : r) arr.push_back(int(id));
    return arr;
  };
  j["final"] = ranking_json(result.final);
  j["iterations"] = ordered_json::array();
  for (const IgIteration& it : result.iterations) {
    ordered_json ji;
    ji["input"] = ranking_json(it.input);
    ji["baseline_lru"] = it.sweep.baseline_lru;
    ji["hit_rate"] = it.sweep.hit_rate;
    ji["gains"] = it.gains;
    ji["output"] = ranking_json(it.output);
    j["iterations"].push_back(std::move(ji));
  }
  return j.dump(2) + "\n";
}

std::string metrics_report_csv(const PredictorReport& report,
                               std::span<const FeatureId> features) {
  std::string out =
      "feature,family,mcc,accuracy,f1,correct_influence,incorrect_influence,total_influence,"
      "mean_bias\n";
  BiasSeries bias = report.stats.bias();
  for (EventFamily fam : kFamilies) {
    const auto& confusion = report.stats.feature_confusion(fam);
    const InfluenceAccumulator& acc = report.stats.influence(fam);
    for (size_t i = 0; i < features.size(); ++i) {
      double sum = 0;
      uint64_t n = 0;
      if (fam == EventFamily::All) {
        for (const auto& cell : bias.mean_weight[i])
          if (cell.has_value()) {
            sum += *cell;
            n++;
          }
      }
      std::optional<double> acc_v = accuracy(confusion[i].cm);
      std::optional<double> f1_v = f1(confusion[i].cm);
      out += std::to_string(int(features[i])) + ',' + family_name(fam) + ',' +
             fmt_double(mcc(confusion[i].cm)) + ',' +
             (acc_v.has_value() ? fmt_double(*acc_v) : "") + ',' +
             (f1_v.has_value() ? fmt_double(*f1_v) : "") + ',' +
             fmt_double(influence_correct(acc, i)) + ',' + fmt_double(influence_incorrect(acc, i)) +
             ',' + fmt_double(influence_total(acc, i)) + ',' +
             (n > 0 ? fmt_double(sum / double(n)) : "") + '\n';
    }
  }
  return out;
}

std::string lifecycle_stats_csv(const LifecycleStats& stats) {
  auto row = [](const char* name, const DistributionSummary& d) {
    std::string out = name;
    out += ',' + std::to_string(d.count) + ',' + fmt_double(d.mean) + ',' + fmt_double(d.min) +
           ',' + fmt_double(d.p25) + ',' + fmt_double(d.p50) + ',' + fmt_double(d.p75) + ',' +
           fmt_double(d.p90) + ',' + fmt_double(d.p99) + ',' + fmt_double(d.max) + '\n';
    return out;
  };
  std::string out = "metric,count,mean,min,p25,p50,p75,p90,p99,max\n";
  out += row("lifetime_ns", stats.lifetime);
  out += row("deadtime_ns", stats.deadtime);
  out += row("efficiency", stats.efficiency);
  out += "\nefficiency_bin,count\n";
  for (size_t b = 0; b < stats.efficiency_histogram.size(); ++b) {
    double lo = double(b) / double(stats.efficiency_histogram.size());
    out += fmt_double(lo) + ',' + std::to_string(stats.efficiency_histogram[b]) + '\n';
  }
  return out;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << content;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace flowsim
