#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "flowsim/flow.hpp"
#include "flowsim/packet.hpp"

namespace flowsim {

/// Row selector for the feature catalog (f0..f28).
using FeatureId = uint8_t;
constexpr int kFeatureCount = 29;

constexpr FeatureId kSelectedFeatures[] = {6, 27, 21, 18, 10};

/// Everything feature assembly may consume for one packet: the stateless
/// header fields plus the stateful flow counters. The stateful components
/// (flow_packets, ref_count, burst_count) must be zero when the flow is
/// not cached; they are pulled from the cached entry on a hit only.
struct FeatureContext {
  uint32_t ipv4_src = 0;
  uint32_t ipv4_dst = 0;
  uint16_t src_port = 0;
  uint16_t dst_port = 0;
  uint16_t ip_length = 0;
  uint16_t ip_frag_offset = 0;
  uint8_t ip_proto = 0;
  uint8_t flags = 0;
  uint64_t flow_packets = 0;
  uint64_t ref_count = 0;
  uint64_t burst_count = 0;
  uint64_t flow_id = 0;
  std::mt19937_64* rng = nullptr;  // consumed by f0 only
};

/// Builds the assembly context for a packet. cached_state is the flow's
/// table entry when the flow is resident in the cache, nullptr otherwise.
FeatureContext make_context(const PacketRecord& pkt, const FlowState* cached_state,
                            FlowId flow_id, std::mt19937_64* rng = nullptr);

/// XOR-folds a wide value into 16 bits (little-endian 16-bit limbs).
/// Identity for values below 2^16.
constexpr uint16_t fold16(uint64_t v) {
  v ^= v >> 32;
  v ^= v >> 16;
  return uint16_t(v);
}

/// Assembles feature `id` from the context into a 16-bit table index.
/// Throws std::out_of_range for an unknown id.
uint16_t assemble(FeatureId id, const FeatureContext& ctx);

struct FeatureIndex {
  FeatureId id = 0;
  uint16_t index = 0;
  bool operator==(const FeatureIndex&) const = default;
};

using FeatureVector = std::vector<FeatureIndex>;

FeatureVector assemble_vector(std::span<const FeatureId> enabled, const FeatureContext& ctx);

/// Parses a comma-separated feature list such as "6,27,21,18,10".
std::vector<FeatureId> parse_feature_list(const std::string& text);
std::string format_feature_list(std::span<const FeatureId> ids);

}  // namespace flowsim
