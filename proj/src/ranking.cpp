#include "flowsim/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace flowsim {

namespace {

CacheConfig with_features(const CacheConfig& cfg, Ranking features) {
  CacheConfig out = cfg;
  out.policy = Policy::Hp;
  out.predictor.features = std::move(features);
  return out;
}

}  // namespace

Ranking initial_mcc_ranking(const Trace& trace, const Ranking& candidates,
                            const CacheConfig& cfg) {
  SimulationResult result = simulate(trace, with_features(cfg, candidates));
  const auto& confusion = result.predictor->stats.feature_confusion();

  std::vector<size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), size_t(0));
  std::vector<double> score(candidates.size());
  for (size_t i = 0; i < candidates.size(); ++i) score[i] = mcc(confusion[i].cm);
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (score[a] != score[b]) return score[a] > score[b];
    return candidates[a] < candidates[b];
  });

  Ranking out;
  out.reserve(candidates.size());
  for (size_t i : order) out.push_back(candidates[i]);
  return out;
}

SweepResult sweep(const Trace& trace, const Ranking& ranking, const CacheConfig& cfg, int jobs) {
  if (ranking.empty()) throw std::invalid_argument("cannot sweep an empty ranking");
  SweepResult result;
  result.ranking = ranking;
  result.hit_rate.assign(ranking.size(), 0.0);

  CacheConfig lru_cfg = cfg;
  lru_cfg.policy = Policy::Lru;
  result.baseline_lru = simulate(trace, lru_cfg).hit_rate();

  int n = int(ranking.size());
  if (jobs > 1) {
#pragma omp parallel for schedule(dynamic, 1) num_threads(jobs)
    for (int i = 0; i < n; ++i) {
      Ranking prefix(ranking.begin(), ranking.begin() + i + 1);
      result.hit_rate[size_t(i)] = simulate(trace, with_features(cfg, std::move(prefix))).hit_rate();
    }
  } else {
    for (int i = 0; i < n; ++i) {
      Ranking prefix(ranking.begin(), ranking.begin() + i + 1);
      result.hit_rate[size_t(i)] = simulate(trace, with_features(cfg, std::move(prefix))).hit_rate();
    }
  }
  return result;
}

std::vector<double> adjacent_gain(const SweepResult& sweep) {
  std::vector<double> gains(sweep.hit_rate.size());
  for (size_t i = 0; i < sweep.hit_rate.size(); ++i)
    gains[i] = sweep.hit_rate[i] - (i == 0 ? sweep.baseline_lru : sweep.hit_rate[i - 1]);
  return gains;
}

IgResult ig_iterate(const Trace& trace, const Ranking& candidates, const CacheConfig& cfg,
                    int max_iters, double gain_epsilon, int jobs) {
  if (max_iters < 1) throw std::invalid_argument("max_iters must be >= 1");
  IgResult result;
  Ranking current = initial_mcc_ranking(trace, candidates, cfg);

  auto quantize = [gain_epsilon](double g) {
    return gain_epsilon > 0 ? std::floor(g / gain_epsilon) : g;
  };

  for (int iter = 0; iter < max_iters; ++iter) {
    IgIteration log;
    log.input = current;
    log.sweep = sweep(trace, current, cfg, jobs);
    log.gains = adjacent_gain(log.sweep);

    std::vector<size_t> order(current.size());
    std::iota(order.begin(), order.end(), size_t(0));
    // Stable: equal gains keep the previous pass's order, so exact ties
    // cannot cycle.
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
      return quantize(log.gains[a]) > quantize(log.gains[b]);
    });
    Ranking next;
    next.reserve(current.size());
    for (size_t i : order) next.push_back(current[i]);
    log.output = next;
    result.iterations.push_back(std::move(log));

    if (next == current) {
      result.converged = true;
      current = std::move(next);
      break;
    }
    current = std::move(next);
  }
  result.final = std::move(current);
  return result;
}

Ranking top_k(const Ranking& ranking, size_t k) {
  if (k > ranking.size()) throw std::out_of_range("top_k beyond ranking length");
  return Ranking(ranking.begin(), ranking.begin() + k);
}

}  // namespace flowsim
