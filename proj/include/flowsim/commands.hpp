#pragma once

#include <optional>
#include <string>
#include <vector>

#include "flowsim/cache_sim.hpp"
#include "flowsim/ranking.hpp"
#include "flowsim/synthetic.hpp"

namespace flowsim {

// Process exit codes shared by every command.
constexpr int kExitOk = 0;
constexpr int kExitInvariant = 1;
constexpr int kExitUsage = 2;

/// Fully resolved description of one batch run. Serialized verbatim into
/// every output directory; re-running from that echo reproduces the run
/// byte for byte.
struct RunConfig {
  // Trace source: exactly one of path / synthetic spec path / inline spec.
  std::string trace_path;
  std::string synthetic_spec_path;
  std::optional<SyntheticSpec> synthetic;

  CacheConfig cache;
  uint64_t seed = 1;  // master seed; component sub-seeds derive from it
  int jobs = 1;
  std::string out_dir;

  std::vector<uint32_t> limit_sizes = {16, 64, 256, 1024, 4096};
  Ranking candidates;
  int max_iters = 3;
  double gain_epsilon = 0.0;

  std::string to_json() const;
  static RunConfig from_json(const std::string& text);
  static RunConfig from_file(const std::string& path);
};

/// Loads the configured trace (file, capture, or synthetic generation).
Trace resolve_trace(const RunConfig& cfg);

int cmd_simulate(const RunConfig& cfg);
int cmd_limit(const RunConfig& cfg);
int cmd_sweep(const RunConfig& cfg);
int cmd_rank(const RunConfig& cfg);
int cmd_report(const std::string& run_dir, const std::string& out_dir);

int cmd_trace_generate(const std::string& spec_path, const std::string& out_path);
int cmd_trace_stats(const std::string& trace_path);
int cmd_trace_convert(const std::string& in_path, const std::string& out_path);

}  // namespace flowsim
