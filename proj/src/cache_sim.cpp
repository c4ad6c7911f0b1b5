#include "flowsim/cache_sim.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>
#include <unordered_map>

namespace flowsim {

const char* policy_name(Policy p) {
  switch (p) {
    case Policy::Lru: return "lru";
    case Policy::Min: return "min";
    case Policy::Hp: return "hp";
  }
  return "?";
}

Policy parse_policy(const std::string& name) {
  if (name == "lru") return Policy::Lru;
  if (name == "min") return Policy::Min;
  if (name == "hp") return Policy::Hp;
  throw std::invalid_argument("unknown policy '" + name + "' (expected lru|min|hp)");
}

void CacheConfig::validate() const {
  if (total_entries == 0 || associativity == 0)
    throw std::invalid_argument("cache geometry must be non-zero");
  if (epoch_len == 0) throw std::invalid_argument("epoch length must be positive");
  if (associativity == total_entries) return;  // fully associative: any capacity
  if (total_entries % associativity != 0)
    throw std::invalid_argument("total entries must be divisible by associativity");
  if (!std::has_single_bit(total_entries) || !std::has_single_bit(associativity))
    throw std::invalid_argument("set-associative geometry must use powers of two");
}

NextUseIndex build_next_use(const Trace& trace) {
  NextUseIndex next(trace.packets.size(), kNeverUsed);
  std::unordered_map<FlowKey, uint64_t, FlowKeyHash> last_seen;
  for (size_t i = trace.packets.size(); i-- > 0;) {
    FlowKey key = canonical_key(trace.packets[i]);
    auto [it, inserted] = last_seen.try_emplace(key, i);
    if (!inserted) {
      next[i] = it->second;
      it->second = i;
    }
  }
  return next;
}

uint32_t set_index(const FlowKey& key, uint32_t num_sets, uint64_t seed) {
  if (num_sets <= 1) return 0;
  uint64_t x = (uint64_t(key.ip_lo) << 32) | key.ip_hi;
  uint64_t y = (uint64_t(key.port_lo) << 24) | (uint64_t(key.port_hi) << 8) | key.proto;
  uint64_t z = (x ^ seed) + 0x9e3779b97f4a7c15ull * (y + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  z ^= z >> 31;
  return uint32_t(z & (num_sets - 1));
}

CacheSim::CacheSim(const Trace& trace, CacheConfig cfg) : trace_(&trace), cfg_(std::move(cfg)) {
  cfg_.validate();
  sets_.resize(cfg_.num_sets());
  for (Set& s : sets_) s.entries.reserve(cfg_.associativity);
  if (cfg_.policy == Policy::Min) next_use_ = build_next_use(trace);
  if (cfg_.policy == Policy::Hp) {
    predictor_ = std::make_unique<Predictor>(cfg_.predictor, cfg_.num_sets(), cfg_.seed);
    stats_ = TrainingStats(cfg_.predictor.features.size(), cfg_.epoch_len);
  }
  next_epoch_mark_ = cfg_.epoch_len;
  two_thirds_mark_ = trace.packets.size() * 2 / 3;
  result_.total_packets = trace.packets.size();
}

int CacheSim::find_entry(const Set& set, FlowId flow) const {
  for (size_t i = 0; i < set.entries.size(); ++i)
    if (set.entries[i].flow == flow) return int(i);
  return -1;
}

int CacheSim::pick_victim(const Set& set) const {
  if (cfg_.policy == Policy::Min) {
    // Furthest next use; never-used-again entries sort first naturally.
    size_t victim = 0;
    for (size_t i = 1; i < set.entries.size(); ++i)
      if (set.entries[i].next_use > set.entries[victim].next_use) victim = i;
    return int(victim);
  }
  if (cfg_.policy == Policy::Hp) {
    // Entries marked dormant take priority, oldest recency first.
    int marked = -1;
    for (size_t i = 0; i < set.entries.size(); ++i) {
      if (!flows_.state(set.entries[i].flow).marked_dormant) continue;
      if (marked < 0 || set.entries[i].last_use < set.entries[size_t(marked)].last_use)
        marked = int(i);
    }
    if (marked >= 0) return marked;
  }
  size_t victim = 0;
  for (size_t i = 1; i < set.entries.size(); ++i)
    if (set.entries[i].last_use < set.entries[victim].last_use) victim = i;
  return int(victim);
}

void CacheSim::evict(Set& set, size_t idx, uint64_t now_ts) {
  Entry& e = set.entries[idx];
  result_.lifecycle.push_back({e.t0, e.tl, now_ts, false});
  flows_.on_cache_evict(flows_.state(e.flow));
  set.entries[idx] = set.entries.back();
  set.entries.pop_back();
  result_.evictions++;
}

// Snapshots the threshold automaton; epoch counts completed windows.
void CacheSim::record_epoch(bool final_epoch) {
  if (predictor_ == nullptr) return;
  uint64_t epoch = final_epoch ? (pos_ + cfg_.epoch_len - 1) / cfg_.epoch_len
                               : pos_ / cfg_.epoch_len;
  const ThresholdState& thr = predictor_->threshold();
  epochs_.push_back({epoch, thr.phi, thr.correct_updates, thr.incorrect_updates});
}

PacketOutcome CacheSim::step() {
  const PacketRecord& pkt = trace_->packets[pos_];
  PacketOutcome out;

  FlowKey key = canonical_key(pkt);
  FlowTable::Observation obs = flows_.observe(key);
  uint32_t set_id = set_index(key, cfg_.num_sets(), cfg_.seed);
  Set& set = sets_[set_id];
  int slot = find_entry(set, obs.id);
  out.hit = slot >= 0;
  out.compulsory = obs.is_new;

  Prediction pred;
  if (predictor_ != nullptr) {
    FeatureContext ctx = make_context(pkt, obs.state.cached ? &obs.state : nullptr, obs.id,
                                      &predictor_->rng());
    pred = predictor_->infer(ctx, out.hit);
    for (const TrainingEvent& ev : predictor_->reinforce(set_id, obs.id, pred, pos_))
      stats_.add(ev);
  }

  bool counted = pos_ >= cfg_.warmup_packets;
  if (counted) result_.packets++;

  if (out.hit) {
    Entry& e = set.entries[size_t(slot)];
    bool was_mru = e.last_use == set.use_tick;  // insertion counts as MRU
    flows_.on_cache_hit(obs.state, was_mru);
    e.last_use = ++set.use_tick;
    e.tl = pkt.ts_ns;
    if (cfg_.policy == Policy::Min) e.next_use = next_use_[pos_];
    if (predictor_ != nullptr) {
      // A hit on a marked entry corrects the earlier dormant call; the
      // FN training already fired through the dormant queue lookup.
      obs.state.marked_dormant = pred.decision == Decision::Dormant;
    }
    if (counted) result_.hits++;
  } else {
    if (counted) (obs.is_new ? result_.compulsory_misses : result_.capacity_misses)++;
    bool insert = cfg_.policy != Policy::Hp || pred.decision == Decision::Active;
    if (insert) {
      if (set.entries.size() >= cfg_.associativity) {
        evict(set, size_t(pick_victim(set)), pkt.ts_ns);
        out.evicted = true;
      }
      Entry e;
      e.flow = obs.id;
      e.last_use = ++set.use_tick;
      e.t0 = e.tl = pkt.ts_ns;
      if (cfg_.policy == Policy::Min) e.next_use = next_use_[pos_];
      set.entries.push_back(e);
      flows_.on_cache_insert(obs.state);
      out.inserted = true;
    } else {
      out.bypassed = true;
      if (counted) result_.bypasses++;
    }
  }

  pos_++;
  if (predictor_ != nullptr) {
    if (pos_ == two_thirds_mark_) {
      two_thirds_correct_ = predictor_->threshold().correct_updates;
      two_thirds_incorrect_ = predictor_->threshold().incorrect_updates;
    }
    if (pos_ >= next_epoch_mark_) {
      record_epoch(false);
      next_epoch_mark_ += cfg_.epoch_len;
    }
  }
  return out;
}

SimulationResult CacheSim::finish() {
  if (finished_) return result_;
  finished_ = true;

  uint64_t end_ts = trace_->end_ts_ns();
  for (Set& set : sets_) {
    for (Entry& e : set.entries) {
      result_.lifecycle.push_back({e.t0, e.tl, end_ts, true});
      flows_.on_cache_evict(flows_.state(e.flow));
    }
    set.entries.clear();
  }
  result_.distinct_flows = flows_.size();

  if (predictor_ != nullptr) {
    if (pos_ % std::max<uint64_t>(cfg_.epoch_len, 1) != 0 || epochs_.empty()) record_epoch(true);
    PredictorReport report;
    report.stats = std::move(stats_);
    report.weight_histogram = predictor_->tables().histogram();
    report.epochs = std::move(epochs_);
    const ThresholdState& thr = predictor_->threshold();
    report.final_phi = thr.phi;
    report.correct_updates = thr.correct_updates;
    report.incorrect_updates = thr.incorrect_updates;
    report.correct_updates_two_thirds = two_thirds_correct_;
    report.incorrect_updates_two_thirds = two_thirds_incorrect_;
    report.first_update_packet = predictor_->first_update_packet();
    result_.predictor = std::move(report);
  }
  return result_;
}

SimulationResult simulate(const Trace& trace, const CacheConfig& cfg) {
  CacheSim sim(trace, cfg);
  while (!sim.done()) sim.step();
  return sim.finish();
}

}  // namespace flowsim
