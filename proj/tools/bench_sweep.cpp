// Compares the serial reference sweep against the OpenMP-parallel path on
// a generated trace and verifies both produce identical hit rates.

#include <chrono>
#include <cstdio>
#include <cstdlib>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "flowsim/ranking.hpp"
#include "flowsim/synthetic.hpp"

using namespace flowsim;

namespace {

SyntheticSpec bench_spec() {
  SyntheticSpec spec;
  spec.duration_s = 4.0;
  spec.seed = 11;

  FlowArchetype scan;
  scan.name = "scan";
  scan.arrival_rate_per_s = 3000;
  scan.flow_length = ValueDist::fixed(1);
  scan.dst_port_base = 23;
  scan.flags_first = kFlagSyn;
  scan.flags_burst = kFlagSyn;
  scan.flags_rest = kFlagSyn;
  spec.archetypes.push_back(scan);

  FlowArchetype bursty;
  bursty.name = "bursty";
  bursty.arrival_rate_per_s = 300;
  bursty.flow_length = {40, 120};
  bursty.packets_per_burst = {4, 12};
  bursty.intra_burst_gap_ns = ValueDist::fixed(1'000'000);
  bursty.inter_burst_gap_ns = {40'000'000, 120'000'000};
  bursty.dst_port_base = 443;
  bursty.ip_length = ValueDist::fixed(512);
  bursty.flags_first = kFlagSyn;
  bursty.flags_burst = kFlagAck;
  bursty.flags_rest = kFlagAck;
  spec.archetypes.push_back(bursty);
  return spec;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
  int jobs = 0;
#ifdef _OPENMP
  jobs = omp_get_max_threads();
#endif
  if (argc > 1) jobs = std::atoi(argv[1]);
  if (jobs < 2) {
    std::fprintf(stderr, "no parallelism available (jobs=%d); pass a thread count\n", jobs);
  }

  Trace trace = generate_synthetic(bench_spec());
  std::printf("trace: %zu packets\n", trace.packets.size());

  Ranking ranking = {6, 27, 21, 18, 10, 4, 11, 16, 7, 14, 15, 5};
  CacheConfig cfg;
  cfg.total_entries = 256;
  cfg.associativity = 8;
  cfg.policy = Policy::Hp;

  auto t0 = std::chrono::steady_clock::now();
  SweepResult serial = sweep(trace, ranking, cfg, 1);
  double serial_s = seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  SweepResult parallel = sweep(trace, ranking, cfg, jobs);
  double parallel_s = seconds_since(t0);

  bool identical = serial.hit_rate == parallel.hit_rate &&
                   serial.baseline_lru == parallel.baseline_lru;
  std::printf("%-12s %10s %12s\n", "variant", "jobs", "seconds");
  std::printf("%-12s %10d %12.3f\n", "serial", 1, serial_s);
  std::printf("%-12s %10d %12.3f\n", "openmp", jobs, parallel_s);
  std::printf("speedup %.2fx, results %s\n", serial_s / parallel_s,
              identical ? "identical" : "DIFFER");
  return identical ? 0 : 1;
}
