// Command-line front end: simulate / limit / sweep / rank / trace / report.
// Flags override config-file values; FLOWSIM_* environment variables
// mirror the flags.

#include <cstdio>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "flowsim/commands.hpp"
#include "flowsim/features.hpp"

namespace {

struct CommonFlags {
  std::string config_path;
  std::string trace_path;
  std::string policy;
  std::optional<uint32_t> entries;
  std::optional<uint32_t> assoc;
  std::string features;
  std::optional<uint64_t> seed;
  std::optional<int> jobs;
  std::string out_dir;
  std::optional<uint64_t> warmup;
  std::optional<uint64_t> epoch_len;
  std::string synthetic_spec;
};

void add_common(CLI::App* app, CommonFlags& f) {
  app->add_option("--config", f.config_path, "run config JSON")->envname("FLOWSIM_CONFIG");
  app->add_option("--trace", f.trace_path, "trace file (.pcap/.cap or native CSV)")
      ->envname("FLOWSIM_TRACE");
  app->add_option("--synthetic-spec", f.synthetic_spec, "synthetic trace spec JSON")
      ->envname("FLOWSIM_SYNTHETIC_SPEC");
  app->add_option("--policy", f.policy, "lru|min|hp")->envname("FLOWSIM_POLICY");
  app->add_option("--entries", f.entries, "total cache entries")->envname("FLOWSIM_ENTRIES");
  app->add_option("--assoc", f.assoc, "set associativity")->envname("FLOWSIM_ASSOC");
  app->add_option("--features", f.features, "enabled feature ids, e.g. 6,27,21,18,10")
      ->envname("FLOWSIM_FEATURES");
  app->add_option("--seed", f.seed, "master seed")->envname("FLOWSIM_SEED");
  app->add_option("--jobs", f.jobs, "parallel simulations for sweeps")->envname("FLOWSIM_JOBS");
  app->add_option("--out", f.out_dir, "output directory")->envname("FLOWSIM_OUT");
  app->add_option("--warmup", f.warmup, "packets excluded from the counted stats")
      ->envname("FLOWSIM_WARMUP");
  app->add_option("--epoch-len", f.epoch_len, "bias/threshold epoch length in packets")
      ->envname("FLOWSIM_EPOCH_LEN");
}

int resolve(const CommonFlags& f, flowsim::RunConfig& cfg) {
  try {
    if (!f.config_path.empty()) cfg = flowsim::RunConfig::from_file(f.config_path);
    if (!f.trace_path.empty()) {
      cfg.trace_path = f.trace_path;
      cfg.synthetic_spec_path.clear();
      cfg.synthetic.reset();
    }
    if (!f.synthetic_spec.empty()) {
      cfg.synthetic_spec_path = f.synthetic_spec;
      cfg.trace_path.clear();
      cfg.synthetic.reset();
    }
    if (!f.policy.empty()) cfg.cache.policy = flowsim::parse_policy(f.policy);
    if (f.entries.has_value()) cfg.cache.total_entries = *f.entries;
    if (f.assoc.has_value()) cfg.cache.associativity = *f.assoc;
    if (!f.features.empty()) cfg.cache.predictor.features = flowsim::parse_feature_list(f.features);
    if (f.seed.has_value()) cfg.seed = *f.seed;
    if (f.jobs.has_value()) cfg.jobs = *f.jobs;
    if (!f.out_dir.empty()) cfg.out_dir = f.out_dir;
    if (f.warmup.has_value()) cfg.cache.warmup_packets = *f.warmup;
    if (f.epoch_len.has_value()) cfg.cache.epoch_len = *f.epoch_len;
    return flowsim::kExitOk;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "config: %s\n", e.what());
    return flowsim::kExitUsage;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"trace-driven flow table cache simulator"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::string candidates;
  int max_iters = 3;
  double gain_epsilon = 0.0;
  std::string limit_sizes;

  CLI::App* simulate = app.add_subcommand("simulate", "run one cache simulation");
  add_common(simulate, flags);

  CLI::App* limit = app.add_subcommand("limit", "MIN vs LRU size sweep, fully associative");
  add_common(limit, flags);
  limit->add_option("--sizes", limit_sizes, "comma-separated capacity list");

  CLI::App* sweep_cmd = app.add_subcommand("sweep", "hit-rate sweep over ranked feature prefixes");
  add_common(sweep_cmd, flags);
  sweep_cmd->add_option("--candidates", candidates, "feature ids in ranked order");

  CLI::App* rank = app.add_subcommand("rank", "iterative differential information gain ranking");
  add_common(rank, flags);
  rank->add_option("--candidates", candidates, "candidate feature ids");
  rank->add_option("--max-iters", max_iters, "ranking passes");
  rank->add_option("--gain-epsilon", gain_epsilon, "gain quantum for tie damping");

  CLI::App* trace_cmd = app.add_subcommand("trace", "trace utilities");
  trace_cmd->require_subcommand(1);
  std::string gen_spec, gen_out, stats_in, conv_in, conv_out;
  CLI::App* trace_gen = trace_cmd->add_subcommand("generate", "deterministic synthetic trace");
  trace_gen->add_option("--spec", gen_spec, "synthetic spec JSON")->required();
  trace_gen->add_option("--out", gen_out, "native CSV output path")->required();
  CLI::App* trace_stats_cmd = trace_cmd->add_subcommand("stats", "summarize a trace");
  trace_stats_cmd->add_option("--trace", stats_in, "trace file")->required();
  CLI::App* trace_conv = trace_cmd->add_subcommand("convert", "convert a trace to native CSV");
  trace_conv->add_option("--in", conv_in, "input trace (.pcap/.cap or native)")->required();
  trace_conv->add_option("--out", conv_out, "native CSV output path")->required();

  CLI::App* report = app.add_subcommand("report", "derive metric CSVs from a finished run");
  std::string run_dir, report_out;
  report->add_option("--run", run_dir, "run output directory")->required();
  report->add_option("--out", report_out, "report output directory (defaults to the run dir)");

  CLI11_PARSE(app, argc, argv);

  flowsim::RunConfig cfg;
  if (int rc = resolve(flags, cfg); rc != flowsim::kExitOk) return rc;

  try {
    if (!limit_sizes.empty()) {
      cfg.limit_sizes.clear();
      std::stringstream ss(limit_sizes);
      std::string tok;
      while (std::getline(ss, tok, ',')) cfg.limit_sizes.push_back(uint32_t(std::stoul(tok)));
    }
    if (!candidates.empty()) cfg.candidates = flowsim::parse_feature_list(candidates);
    cfg.max_iters = max_iters;
    cfg.gain_epsilon = gain_epsilon;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "config: %s\n", e.what());
    return flowsim::kExitUsage;
  }

  if (simulate->parsed()) return flowsim::cmd_simulate(cfg);
  if (limit->parsed()) return flowsim::cmd_limit(cfg);
  if (sweep_cmd->parsed()) return flowsim::cmd_sweep(cfg);
  if (rank->parsed()) return flowsim::cmd_rank(cfg);
  if (trace_cmd->parsed()) {
    if (trace_gen->parsed()) return flowsim::cmd_trace_generate(gen_spec, gen_out);
    if (trace_stats_cmd->parsed()) return flowsim::cmd_trace_stats(stats_in);
    if (trace_conv->parsed()) return flowsim::cmd_trace_convert(conv_in, conv_out);
  }
  if (report->parsed()) return flowsim::cmd_report(run_dir, report_out);
  return flowsim::kExitUsage;
}
