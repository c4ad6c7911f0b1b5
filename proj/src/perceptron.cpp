#include "flowsim/perceptron.hpp"

#include <algorithm>
#include <stdexcept>

namespace flowsim {

FeatureTables::FeatureTables(const PredictorConfig& cfg) : width_(cfg.counter_width) {
  if (cfg.counter_width < 2 || cfg.counter_width > 8)
    throw std::invalid_argument("counter width must be in [2, 8]");
  if (cfg.table_bits < 1 || cfg.table_bits > 16)
    throw std::invalid_argument("table bits must be in [1, 16]");
  tables_.reserve(cfg.features.size());
  for (FeatureId id : cfg.features) {
    size_t n = id == 26 ? 1 : (size_t(1) << cfg.table_bits);
    tables_.emplace_back(n, int8_t(0));
  }
}

std::vector<std::vector<uint64_t>> FeatureTables::histogram() const {
  std::vector<std::vector<uint64_t>> out;
  out.reserve(tables_.size());
  size_t buckets = size_t(weight_max() - weight_min()) + 1;
  for (const auto& table : tables_) {
    std::vector<uint64_t> counts(buckets, 0);
    for (int8_t w : table) counts[size_t(int(w) - weight_min())]++;
    out.push_back(std::move(counts));
  }
  return out;
}

void adapt_threshold(ThresholdState& thr, bool correct, int speed) {
  if (correct) {
    thr.correct_updates++;
    thr.counter--;
    if (thr.counter <= -speed) {
      thr.phi = std::max(0, thr.phi - 1);
      thr.counter = 0;
    }
  } else {
    thr.incorrect_updates++;
    thr.counter++;
    if (thr.counter >= speed) {
      thr.phi++;
      thr.counter = 0;
    }
  }
}

Predictor::Predictor(PredictorConfig cfg, uint32_t num_sets, uint64_t seed)
    : cfg_(std::move(cfg)), tables_(cfg_), queues_(num_sets), rng_(seed) {
  thr_.phi = cfg_.initial_train_threshold;
}

Prediction Predictor::infer(const FeatureContext& ctx, bool on_hit) {
  return infer(assemble_vector(cfg_.features, ctx), on_hit);
}

Prediction Predictor::infer(FeatureVector vec, bool on_hit) const {
  Prediction p;
  p.on_hit = on_hit;
  p.weights.reserve(vec.size());
  for (size_t i = 0; i < vec.size(); ++i) {
    int8_t w = tables_.weight(i, vec[i].index);
    p.weights.push_back(w);
    p.sum += w;
  }
  p.decision = p.sum >= 0 ? Decision::Active : Decision::Dormant;
  p.confidence = std::abs(p.sum);
  p.vector = std::move(vec);
  return p;
}

bool Predictor::train_vector(const FeatureVector& vec, int delta) {
  bool changed = false;
  for (size_t i = 0; i < vec.size(); ++i)
    changed |= tables_.adjust(i, vec[i].index, delta);
  return changed;
}

TrainingEvent Predictor::make_event(TrainKind kind, bool applied, const QueueEntry& entry,
                                    uint64_t packet_index) const {
  TrainingEvent ev;
  ev.kind = kind;
  ev.applied = applied;
  ev.on_hit = entry.pred.on_hit;
  ev.packet_index = packet_index;
  ev.confidence = entry.pred.confidence;
  ev.vector = entry.pred.vector;
  ev.weights = entry.pred.weights;
  return ev;
}

void Predictor::push_prediction(SetQueues& q, FlowId flow, Prediction&& pred,
                                uint64_t packet_index, std::vector<TrainingEvent>& events) {
  auto& queue = queue_for(q, pred.decision);
  if (queue.size() >= size_t(cfg_.history_depth)) {
    // Aged-out prediction: leaving the active queue unconfirmed makes it a
    // false positive (trained unconditionally); leaving the dormant queue
    // unconfirmed makes it a true negative (threshold-gated).
    QueueEntry oldest = std::move(queue.front());
    queue.pop_front();
    if (pred.decision == Decision::Active) {
      bool moved = train_vector(oldest.pred.vector, -1);
      if (moved) first_update_packet_ = std::min(first_update_packet_, packet_index);
      events.push_back(make_event(TrainKind::FalsePositive, true, oldest, packet_index));
      adapt_threshold(thr_, /*correct=*/false, cfg_.adapt_speed);
    } else {
      bool gate = oldest.pred.confidence <= thr_.phi;
      if (gate) {
        bool moved = train_vector(oldest.pred.vector, -1);
        if (moved) first_update_packet_ = std::min(first_update_packet_, packet_index);
        adapt_threshold(thr_, /*correct=*/true, cfg_.adapt_speed);
      }
      events.push_back(make_event(TrainKind::TrueNegative, gate, oldest, packet_index));
    }
  }
  queue.push_back({flow, std::move(pred)});
}

std::vector<TrainingEvent> Predictor::reinforce(uint32_t set_id, FlowId flow,
                                                Prediction new_pred, uint64_t packet_index) {
  if (set_id >= queues_.size()) throw std::out_of_range("set id out of range");
  SetQueues& q = queues_[set_id];
  std::vector<TrainingEvent> events;

  auto find_in = [flow](std::deque<QueueEntry>& queue) {
    return std::find_if(queue.begin(), queue.end(),
                        [flow](const QueueEntry& e) { return e.flow == flow; });
  };

  if (auto it = find_in(q.active); it != q.active.end()) {
    // Prior active prediction confirmed by this arrival: true positive.
    // Reinforce only while confidence has not passed the training threshold.
    QueueEntry entry = std::move(*it);
    q.active.erase(it);
    bool gate = entry.pred.confidence <= thr_.phi;
    if (gate) {
      bool moved = train_vector(entry.pred.vector, +1);
      if (moved) first_update_packet_ = std::min(first_update_packet_, packet_index);
      adapt_threshold(thr_, /*correct=*/true, cfg_.adapt_speed);
    }
    events.push_back(make_event(TrainKind::TruePositive, gate, entry, packet_index));
  } else if (auto dit = find_in(q.dormant); dit != q.dormant.end()) {
    // Prior dormant prediction caught before aging out: false negative.
    // The training threshold is omitted for incorrect predictions.
    QueueEntry entry = std::move(*dit);
    q.dormant.erase(dit);
    bool moved = train_vector(entry.pred.vector, +1);
    if (moved) first_update_packet_ = std::min(first_update_packet_, packet_index);
    events.push_back(make_event(TrainKind::FalseNegative, true, entry, packet_index));
    adapt_threshold(thr_, /*correct=*/false, cfg_.adapt_speed);
  }

  push_prediction(q, flow, std::move(new_pred), packet_index, events);
  return events;
}

size_t Predictor::queue_size(uint32_t set_id, Decision which) const {
  const SetQueues& q = queues_[set_id];
  return which == Decision::Active ? q.active.size() : q.dormant.size();
}

size_t Predictor::queue_count(uint32_t set_id, FlowId flow) const {
  const SetQueues& q = queues_[set_id];
  auto match = [flow](const QueueEntry& e) { return e.flow == flow; };
  return size_t(std::count_if(q.active.begin(), q.active.end(), match)) +
         size_t(std::count_if(q.dormant.begin(), q.dormant.end(), match));
}

}  // namespace flowsim
