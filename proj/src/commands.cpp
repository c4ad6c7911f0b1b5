#include "flowsim/commands.hpp"

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <map>
#include <sstream>

#include <json.hpp>

#include "flowsim/run_output.hpp"
#include "flowsim/trace_io.hpp"

namespace flowsim {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

uint64_t mix64(uint64_t a, uint64_t b) {
  uint64_t z = a + 0x9e3779b97f4a7c15ull * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Component sub-seed tags, derived from the single master seed.
constexpr uint64_t kSeedCache = 0xca;

ordered_json features_json(const std::vector<FeatureId>& ids) {
  ordered_json arr = ordered_json::array();
  for (FeatureId id : ids) arr.push_back(int(id));
  return arr;
}

std::vector<FeatureId> features_from_json(const ordered_json& arr) {
  std::vector<FeatureId> ids;
  for (const auto& v : arr) {
    int x = v.get<int>();
    if (x < 0 || x >= kFeatureCount)
      throw std::invalid_argument("feature id out of range: " + std::to_string(x));
    ids.push_back(FeatureId(x));
  }
  return ids;
}

}  // namespace

std::string RunConfig::to_json() const {
  ordered_json j;
  ordered_json trace;
  if (!trace_path.empty()) trace["path"] = trace_path;
  if (!synthetic_spec_path.empty()) trace["synthetic_spec"] = synthetic_spec_path;
  if (synthetic.has_value())
    trace["synthetic"] = ordered_json::parse(synthetic_spec_to_json(*synthetic));
  j["trace"] = std::move(trace);

  j["cache"] = ordered_json{{"entries", cache.total_entries},
                            {"assoc", cache.associativity},
                            {"policy", policy_name(cache.policy)}};
  j["predictor"] = ordered_json{{"features", features_json(cache.predictor.features)},
                                {"counter_width", cache.predictor.counter_width},
                                {"table_bits", cache.predictor.table_bits},
                                {"history_depth", cache.predictor.history_depth},
                                {"phi0", cache.predictor.initial_train_threshold},
                                {"adapt_speed", cache.predictor.adapt_speed}};
  j["warmup_packets"] = cache.warmup_packets;
  j["epoch_len"] = cache.epoch_len;
  j["seed"] = seed;
  j["jobs"] = jobs;
  j["out"] = out_dir;
  j["limit_sizes"] = limit_sizes;
  j["candidates"] = features_json(candidates);
  j["max_iters"] = max_iters;
  j["gain_epsilon"] = gain_epsilon;
  return j.dump(2) + "\n";
}

RunConfig RunConfig::from_json(const std::string& text) {
  ordered_json j = ordered_json::parse(text);
  RunConfig cfg;
  if (j.contains("trace")) {
    const auto& t = j["trace"];
    cfg.trace_path = t.value("path", std::string());
    cfg.synthetic_spec_path = t.value("synthetic_spec", std::string());
    if (t.contains("synthetic")) cfg.synthetic = parse_synthetic_spec(t["synthetic"].dump());
  }
  if (j.contains("cache")) {
    const auto& c = j["cache"];
    cfg.cache.total_entries = c.value("entries", cfg.cache.total_entries);
    cfg.cache.associativity = c.value("assoc", cfg.cache.associativity);
    if (c.contains("policy")) cfg.cache.policy = parse_policy(c["policy"].get<std::string>());
  }
  if (j.contains("predictor")) {
    const auto& p = j["predictor"];
    if (p.contains("features")) cfg.cache.predictor.features = features_from_json(p["features"]);
    cfg.cache.predictor.counter_width = p.value("counter_width", cfg.cache.predictor.counter_width);
    cfg.cache.predictor.table_bits = p.value("table_bits", cfg.cache.predictor.table_bits);
    cfg.cache.predictor.history_depth = p.value("history_depth", cfg.cache.predictor.history_depth);
    cfg.cache.predictor.initial_train_threshold =
        p.value("phi0", cfg.cache.predictor.initial_train_threshold);
    cfg.cache.predictor.adapt_speed = p.value("adapt_speed", cfg.cache.predictor.adapt_speed);
  }
  cfg.cache.warmup_packets = j.value("warmup_packets", cfg.cache.warmup_packets);
  cfg.cache.epoch_len = j.value("epoch_len", cfg.cache.epoch_len);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.jobs = j.value("jobs", cfg.jobs);
  cfg.out_dir = j.value("out", cfg.out_dir);
  if (j.contains("limit_sizes")) cfg.limit_sizes = j["limit_sizes"].get<std::vector<uint32_t>>();
  if (j.contains("candidates")) cfg.candidates = features_from_json(j["candidates"]);
  cfg.max_iters = j.value("max_iters", cfg.max_iters);
  cfg.gain_epsilon = j.value("gain_epsilon", cfg.gain_epsilon);
  return cfg;
}

RunConfig RunConfig::from_file(const std::string& path) { return from_json(read_file(path)); }

Trace resolve_trace(const RunConfig& cfg) {
  int sources = int(!cfg.trace_path.empty()) + int(!cfg.synthetic_spec_path.empty()) +
                int(cfg.synthetic.has_value());
  if (sources != 1)
    throw std::invalid_argument("config must name exactly one trace source "
                                "(trace.path, trace.synthetic_spec, or trace.synthetic)");
  if (!cfg.trace_path.empty()) return load_trace(cfg.trace_path);
  if (!cfg.synthetic_spec_path.empty())
    return generate_synthetic(load_synthetic_spec(cfg.synthetic_spec_path));
  return generate_synthetic(*cfg.synthetic);
}

namespace {

CacheConfig seeded_cache(const RunConfig& cfg) {
  CacheConfig out = cfg.cache;
  out.seed = mix64(cfg.seed, kSeedCache);
  return out;
}

void ensure_out_dir(const RunConfig& cfg) {
  if (cfg.out_dir.empty()) throw std::invalid_argument("an output directory is required (--out)");
  fs::create_directories(cfg.out_dir);
}

std::string out_path(const RunConfig& cfg, const char* name) {
  return (fs::path(cfg.out_dir) / name).string();
}

void print_result_row(const char* policy, const SimulationResult& r) {
  std::printf("%-6s %12" PRIu64 " %12" PRIu64 " %12" PRIu64 "   %.6f\n", policy, r.hits,
              r.compulsory_misses, r.capacity_misses, r.hit_rate());
}

void print_result_header() {
  std::printf("%-6s %12s %12s %12s   %s\n", "policy", "hits", "compulsory", "capacity",
              "hit_rate");
}

int run_guarded(const char* what, int (*body)(const RunConfig&), const RunConfig& cfg) {
  try {
    return body(cfg);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "%s: %s\n", what, e.what());
    return kExitUsage;
  }
}

int do_simulate(const RunConfig& cfg) {
  ensure_out_dir(cfg);
  Trace trace = resolve_trace(cfg);
  CacheConfig cache_cfg = seeded_cache(cfg);
  SimulationResult result = simulate(trace, cache_cfg);

  if (result.hits + result.compulsory_misses + result.capacity_misses != result.packets) {
    std::fprintf(stderr, "simulate: hit/miss accounting identity violated\n");
    return kExitInvariant;
  }

  std::string config_echo = cfg.to_json();
  write_file(out_path(cfg, "config.json"), config_echo);
  write_file(out_path(cfg, "summary.json"), summary_json(result, config_echo));
  write_file(out_path(cfg, "lifecycle.csv"), lifecycle_csv(result));
  if (result.predictor.has_value()) {
    const PredictorReport& rep = *result.predictor;
    std::span<const FeatureId> feats = cache_cfg.predictor.features;
    int wmin = -(1 << (cache_cfg.predictor.counter_width - 1));
    write_file(out_path(cfg, "feature_confusion.csv"), feature_confusion_csv(rep, feats));
    write_file(out_path(cfg, "influence.csv"), influence_csv(rep, feats));
    write_file(out_path(cfg, "bias.csv"), bias_csv(rep, feats));
    write_file(out_path(cfg, "weights_hist.csv"), weights_histogram_csv(rep, feats, wmin));
    write_file(out_path(cfg, "epochs.csv"), epochs_csv(rep));
  }

  print_result_header();
  print_result_row(policy_name(cache_cfg.policy), result);
  return kExitOk;
}

int do_limit(const RunConfig& cfg) {
  ensure_out_dir(cfg);
  if (cfg.limit_sizes.empty()) throw std::invalid_argument("limit needs a non-empty size list");
  Trace trace = resolve_trace(cfg);

  struct Row {
    uint32_t size;
    Policy policy;
    SimulationResult result;
  };
  std::vector<Row> rows;
  for (uint32_t size : cfg.limit_sizes)
    for (Policy policy : {Policy::Min, Policy::Lru}) rows.push_back({size, policy, {}});

  int n = int(rows.size());
  int jobs = cfg.jobs;
  // The limit study runs fully associative.
  auto run_row = [&](int i) {
    CacheConfig cc = seeded_cache(cfg);
    cc.total_entries = rows[size_t(i)].size;
    cc.associativity = rows[size_t(i)].size;
    cc.policy = rows[size_t(i)].policy;
    rows[size_t(i)].result = simulate(trace, cc);
  };
  if (jobs > 1) {
#pragma omp parallel for schedule(dynamic, 1) num_threads(jobs)
    for (int i = 0; i < n; ++i) run_row(i);
  } else {
    for (int i = 0; i < n; ++i) run_row(i);
  }

  std::string csv = "size,policy,hit_rate,compulsory,capacity\n";
  for (const Row& row : rows) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%u,%s,%.12g,%" PRIu64 ",%" PRIu64 "\n", row.size,
                  policy_name(row.policy), row.result.hit_rate(), row.result.compulsory_misses,
                  row.result.capacity_misses);
    csv += buf;
  }
  write_file(out_path(cfg, "config.json"), cfg.to_json());
  write_file(out_path(cfg, "limit.csv"), csv);

  print_result_header();
  for (const Row& row : rows) print_result_row(policy_name(row.policy), row.result);
  return kExitOk;
}

int do_sweep(const RunConfig& cfg) {
  ensure_out_dir(cfg);
  if (cfg.candidates.empty()) throw std::invalid_argument("sweep needs a candidate feature list");
  Trace trace = resolve_trace(cfg);
  SweepResult result = sweep(trace, cfg.candidates, seeded_cache(cfg), cfg.jobs);
  write_file(out_path(cfg, "config.json"), cfg.to_json());
  write_file(out_path(cfg, "sweep.csv"), sweep_csv(result));
  std::printf("swept %zu prefixes, baseline lru hit_rate %.6f\n", result.hit_rate.size(),
              result.baseline_lru);
  return kExitOk;
}

int do_rank(const RunConfig& cfg) {
  ensure_out_dir(cfg);
  if (cfg.candidates.empty()) throw std::invalid_argument("rank needs a candidate feature list");
  Trace trace = resolve_trace(cfg);
  IgResult result =
      ig_iterate(trace, cfg.candidates, seeded_cache(cfg), cfg.max_iters, cfg.gain_epsilon,
                 cfg.jobs);
  write_file(out_path(cfg, "config.json"), cfg.to_json());
  write_file(out_path(cfg, "rank_log.json"), ig_log_json(result));
  for (size_t i = 0; i < result.iterations.size(); ++i) {
    std::string name = "sweep_pass" + std::to_string(i + 1) + ".csv";
    write_file(out_path(cfg, name.c_str()), sweep_csv(result.iterations[i].sweep));
  }
  std::printf("final ranking: %s (%s after %zu passes)\n",
              format_feature_list(result.final).c_str(),
              result.converged ? "stable" : "not stable", result.iterations.size());
  return kExitOk;
}

}  // namespace

int cmd_simulate(const RunConfig& cfg) { return run_guarded("simulate", do_simulate, cfg); }
int cmd_limit(const RunConfig& cfg) { return run_guarded("limit", do_limit, cfg); }
int cmd_sweep(const RunConfig& cfg) { return run_guarded("sweep", do_sweep, cfg); }
int cmd_rank(const RunConfig& cfg) { return run_guarded("rank", do_rank, cfg); }

namespace {

// Minimal reader for our own CSV outputs.
std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ls(line);
    std::string tok;
    while (std::getline(ls, tok, ',')) fields.push_back(tok);
    rows.push_back(std::move(fields));
  }
  return rows;
}

double to_double(const std::string& s) { return s.empty() ? 0.0 : std::stod(s); }

}  // namespace

int cmd_report(const std::string& run_dir, const std::string& out_dir) {
  try {
    fs::path run(run_dir);
    fs::path out(out_dir.empty() ? run_dir : out_dir);
    fs::create_directories(out);

    auto require = [&](const char* name) {
      fs::path p = run / name;
      if (!fs::exists(p))
        throw std::invalid_argument("missing run input: " + p.string());
      return read_file(p.string());
    };

    // Lifecycle distributions exist for every policy.
    std::vector<LifecycleRecord> records;
    auto lifecycle_rows = parse_csv(require("lifecycle.csv"));
    for (size_t i = 1; i < lifecycle_rows.size(); ++i) {
      const auto& row = lifecycle_rows[i];
      records.push_back({uint64_t(std::stoull(row[0])), uint64_t(std::stoull(row[1])),
                         uint64_t(std::stoull(row[2])), row[3] == "1"});
    }
    write_file((out / "report_lifecycle.csv").string(),
               lifecycle_stats_csv(lifecycle_stats(records)));

    ordered_json summary = ordered_json::parse(require("summary.json"));
    bool has_predictor = summary.contains("predictor");
    if (!has_predictor) {
      std::printf("report: lifecycle only (run had no predictor)\n");
      return kExitOk;
    }

    // feature,family -> fields keyed by the raw CSV columns.
    auto confusion_rows = parse_csv(require("feature_confusion.csv"));
    auto influence_rows = parse_csv(require("influence.csv"));
    auto bias_rows = parse_csv(require("bias.csv"));

    struct Derived {
      ConfusionMatrix cm;
      uint64_t abstain = 0;
      double wsum[4] = {0, 0, 0, 0};   // tp, fn, fp, tn
      uint64_t count[4] = {0, 0, 0, 0};
    };
    std::map<std::pair<int, std::string>, Derived> table;
    for (size_t i = 1; i < confusion_rows.size(); ++i) {
      const auto& r = confusion_rows[i];
      Derived& d = table[{std::stoi(r[0]), r[1]}];
      d.cm.tp = std::stoull(r[2]);
      d.cm.fn = std::stoull(r[3]);
      d.cm.fp = std::stoull(r[4]);
      d.cm.tn = std::stoull(r[5]);
      d.abstain = std::stoull(r[6]);
    }
    for (size_t i = 1; i < influence_rows.size(); ++i) {
      const auto& r = influence_rows[i];
      Derived& d = table[{std::stoi(r[0]), r[1]}];
      for (int q = 0; q < 4; ++q) {
        d.wsum[q] = to_double(r[size_t(2 + q)]);
        d.count[q] = std::stoull(r[size_t(6 + q)]);
      }
    }
    std::map<int, std::pair<double, uint64_t>> bias_mean;
    for (size_t i = 1; i < bias_rows.size(); ++i) {
      const auto& r = bias_rows[i];
      if (r.size() < 3 || r[2].empty()) continue;
      auto& acc = bias_mean[std::stoi(r[1])];
      acc.first += std::stod(r[2]);
      acc.second++;
    }

    auto mean = [](double sum, uint64_t n) { return n == 0 ? 0.0 : sum / double(n); };
    std::string csv =
        "feature,family,mcc,correct_influence,incorrect_influence,total_influence,mean_bias\n";
    for (const auto& [key, d] : table) {
      double correct = mean(d.wsum[0], d.count[0]) - mean(d.wsum[3], d.count[3]);
      double incorrect = mean(d.wsum[1], d.count[1]) - mean(d.wsum[2], d.count[2]);
      char buf[200];
      std::string bias_cell;
      if (key.second == "all" && bias_mean.count(key.first) > 0) {
        const auto& b = bias_mean[key.first];
        char bb[40];
        std::snprintf(bb, sizeof(bb), "%.12g", b.first / double(b.second));
        bias_cell = bb;
      }
      std::snprintf(buf, sizeof(buf), "%d,%s,%.12g,%.12g,%.12g,%.12g,%s\n", key.first,
                    key.second.c_str(), mcc(d.cm), correct, incorrect, correct + incorrect,
                    bias_cell.c_str());
      csv += buf;
    }
    write_file((out / "report_metrics.csv").string(), csv);
    write_file((out / "report_weights.csv").string(), require("weights_hist.csv"));
    std::printf("report: metrics, weights, lifecycle written to %s\n", out.string().c_str());
    return kExitOk;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "report: %s\n", e.what());
    return kExitUsage;
  }
}

int cmd_trace_generate(const std::string& spec_path, const std::string& out_path) {
  try {
    Trace trace = generate_synthetic(load_synthetic_spec(spec_path));
    write_native_file(trace, out_path);
    std::printf("generated %zu packets\n", trace.packets.size());
    return kExitOk;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "trace generate: %s\n", e.what());
    return kExitUsage;
  }
}

int cmd_trace_stats(const std::string& trace_path) {
  try {
    TraceStats stats = trace_stats(load_trace(trace_path));
    std::printf("packets         %" PRIu64 "\n", stats.packets);
    std::printf("distinct_flows  %" PRIu64 "\n", stats.distinct_flows);
    std::printf("duration_ns     %" PRIu64 "\n", stats.duration_ns);
    std::printf("packets_per_s   %.3f\n", stats.packets_per_s);
    std::printf("new_flows_per_s %.3f\n", stats.new_flows_per_s);
    return kExitOk;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "trace stats: %s\n", e.what());
    return kExitUsage;
  }
}

int cmd_trace_convert(const std::string& in_path, const std::string& out_path) {
  try {
    Trace trace = load_trace(in_path);
    write_native_file(trace, out_path);
    std::printf("wrote %zu packets (%" PRIu64 " non-IPv4 frames skipped, %" PRIu64
                " timestamps restamped)\n",
                trace.packets.size(), trace.skipped_non_ipv4, trace.restamped);
    return kExitOk;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "trace convert: %s\n", e.what());
    return kExitUsage;
  }
}

}  // namespace flowsim
