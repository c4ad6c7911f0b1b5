#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "flowsim/packet.hpp"

namespace flowsim {

/// Integer distribution for the generator: fixed when min == max,
/// otherwise uniform over [min, max].
struct ValueDist {
  uint64_t min = 0;
  uint64_t max = 0;

  static ValueDist fixed(uint64_t v) { return {v, v}; }
  bool is_fixed() const { return min == max; }
};

/// One traffic class. The generator materializes round(rate * duration)
/// flows, started at evenly spaced offsets (plus optional jitter). Flow
/// 5-tuples are assigned sequentially within the address/port ranges so
/// distinct flows get distinct keys while ranges are large enough.
struct FlowArchetype {
  std::string name;
  double arrival_rate_per_s = 1.0;
  ValueDist flow_length = ValueDist::fixed(1);       // packets per flow
  ValueDist packets_per_burst = ValueDist::fixed(1);
  ValueDist intra_burst_gap_ns = ValueDist::fixed(0);
  ValueDist inter_burst_gap_ns = ValueDist::fixed(0);
  uint64_t start_jitter_ns = 0;

  uint8_t proto = 6;
  uint32_t src_ip_base = 0x0a000000;
  uint32_t src_ip_count = 1 << 16;
  uint32_t dst_ip_base = 0xc0a80000;
  uint32_t dst_ip_count = 256;
  uint16_t src_port_base = 1024;
  uint32_t src_port_count = 60000;
  uint16_t dst_port_base = 80;
  uint32_t dst_port_count = 1;

  ValueDist ip_length = ValueDist::fixed(60);
  uint8_t flags_first = 0;  // first packet of the flow
  uint8_t flags_burst = 0;  // first packet of each subsequent burst
  uint8_t flags_rest = 0;   // everything else
};

/// Deterministic synthetic trace description: same spec and seed produce
/// a byte-identical trace.
struct SyntheticSpec {
  double duration_s = 1.0;
  uint64_t seed = 1;
  std::vector<FlowArchetype> archetypes;
};

Trace generate_synthetic(const SyntheticSpec& spec);

SyntheticSpec load_synthetic_spec(const std::string& path);
SyntheticSpec parse_synthetic_spec(const std::string& json_text);
std::string synthetic_spec_to_json(const SyntheticSpec& spec);

}  // namespace flowsim
