#pragma once

#include <cstdint>
#include <vector>

#include "flowsim/cache_sim.hpp"

namespace flowsim {

/// Candidate features ordered best first.
using Ranking = std::vector<FeatureId>;

/// Hit rates of simulating the ranking prefixes of length 1..n, plus the
/// LRU baseline the first gain is measured against.
struct SweepResult {
  Ranking ranking;
  std::vector<double> hit_rate;  // hit_rate[i]: prefix of length i+1
  double baseline_lru = 0;
};

/// One HP run with all candidates enabled, ranked by per-feature MCC
/// (descending, ties toward the lower feature id).
Ranking initial_mcc_ranking(const Trace& trace, const Ranking& candidates,
                            const CacheConfig& cfg);

/// Runs one independent simulation per ranking prefix. jobs > 1 runs the
/// prefix simulations in parallel (OpenMP); jobs <= 1 is the serial
/// reference path and produces identical results.
SweepResult sweep(const Trace& trace, const Ranking& ranking, const CacheConfig& cfg,
                  int jobs = 1);

/// gain[0] = p[0] - baseline, gain[i] = p[i] - p[i-1].
std::vector<double> adjacent_gain(const SweepResult& sweep);

struct IgIteration {
  Ranking input;
  SweepResult sweep;
  std::vector<double> gains;
  Ranking output;
};

struct IgResult {
  Ranking final;
  std::vector<IgIteration> iterations;
  bool converged = false;
};

/// Iterative differential information gain: starts from the MCC ranking,
/// then repeatedly sweeps and re-sorts by adjacent gain (stable, so exact
/// ties keep their previous order) until the ranking reaches a fixed
/// point or max_iters passes ran. gain_epsilon > 0 quantizes gains before
/// comparison to damp near-zero oscillation.
IgResult ig_iterate(const Trace& trace, const Ranking& candidates, const CacheConfig& cfg,
                    int max_iters, double gain_epsilon = 0.0, int jobs = 1);

/// First k entries of a ranking. Throws when k exceeds its length.
Ranking top_k(const Ranking& ranking, size_t k);

}  // namespace flowsim
