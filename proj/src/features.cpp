#include "flowsim/features.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>
#include <string>

namespace flowsim {

FeatureContext make_context(const PacketRecord& pkt, const FlowState* cached_state,
                            FlowId flow_id, std::mt19937_64* rng) {
  FeatureContext ctx;
  ctx.ipv4_src = pkt.ipv4_src;
  ctx.ipv4_dst = pkt.ipv4_dst;
  ctx.src_port = pkt.src_port;
  ctx.dst_port = pkt.dst_port;
  ctx.ip_length = pkt.ip_length;
  ctx.ip_frag_offset = pkt.ip_frag_offset;
  ctx.ip_proto = pkt.ip_proto;
  ctx.flags = pkt.flags;
  if (cached_state != nullptr) {
    ctx.flow_packets = cached_state->flow_packets;
    ctx.ref_count = cached_state->ref_count;
    ctx.burst_count = cached_state->burst_count;
  }
  ctx.flow_id = flow_id;
  ctx.rng = rng;
  return ctx;
}

namespace {

constexpr uint64_t cap(uint64_t v, uint64_t bound) { return std::min(v, bound); }

// Component expressions for the feature catalog. Widths used by the
// concatenations: capped-at-8 counters occupy 4 bits, capped-at-16
// occupy 5 bits, ip_length 16 bits, flags 8 bits.
struct Components {
  const FeatureContext& c;

  uint64_t f1() const { return uint64_t(c.ip_proto) ^ std::min(c.src_port, c.dst_port); }
  uint64_t f4() const { return c.flags; }
  uint64_t f7() const { return ((uint64_t(c.ipv4_dst) ^ c.ipv4_src) >> 16) & 0xffff; }
  uint64_t f8() const { return ((uint64_t(c.ipv4_dst) ^ c.ipv4_src) >> 8) & 0xffff; }
  uint64_t f9() const { return (uint64_t(c.ipv4_dst) ^ c.ipv4_src) & 0xffff; }
  uint64_t f11() const { return c.ip_length; }
  uint64_t f12() const { return fold16(c.flow_id); }
  uint64_t f14() const { return cap(c.ref_count, 16); }
  uint64_t f15() const { return cap(c.burst_count, 16); }
  uint64_t f16() const { return (cap(f14(), 8) << 4) | cap(f15(), 8); }
};

}  // namespace

uint16_t assemble(FeatureId id, const FeatureContext& ctx) {
  Components x{ctx};
  uint64_t v = 0;
  switch (id) {
    case 0:  // control: uniform random entry
      v = ctx.rng != nullptr ? ((*ctx.rng)() & 0xffff) : 0;
      break;
    case 1: v = x.f1(); break;
    case 2: v = (uint64_t(ctx.ipv4_dst) >> 16) ^ ctx.dst_port; break;
    case 3: v = (uint64_t(ctx.ipv4_src) >> 16) ^ ctx.src_port; break;
    case 4: v = x.f4(); break;
    case 5: v = uint64_t(ctx.src_port) ^ ctx.dst_port; break;
    case 6: v = (uint64_t(ctx.flags & kTcpFlagMask) << 7) ^ x.f1(); break;
    case 7: v = x.f7(); break;
    case 8: v = x.f8(); break;
    case 9: v = x.f9(); break;
    case 10: v = cap(ctx.flow_packets, 16); break;
    case 11: v = x.f11(); break;
    case 12: v = x.f12(); break;
    case 13: v = x.f12() ^ x.f11(); break;
    case 14: v = x.f14(); break;
    case 15: v = x.f15(); break;
    case 16: v = x.f16(); break;
    case 17: v = x.f16() ^ x.f12(); break;
    case 18: v = x.f16() ^ x.f7(); break;
    case 19: v = x.f16() ^ x.f8(); break;
    case 20: v = x.f16() ^ x.f9(); break;
    case 21: v = x.f11() ^ x.f7(); break;
    case 22: v = x.f11() ^ x.f8(); break;
    case 23: v = x.f11() ^ x.f9(); break;
    case 24: v = uint64_t(ctx.ip_frag_offset) ^ x.f4() ^ x.f11() ^ x.f12(); break;
    case 25: v = x.f7() ^ x.f4(); break;
    case 26: return 0;  // control: single-entry table
    case 27: v = (x.f11() << 4) | cap(x.f15(), 8); break;
    case 28: v = x.f16() ^ x.f11(); break;
    default:
      throw std::out_of_range("unknown feature id " + std::to_string(int(id)));
  }
  return fold16(v);
}

FeatureVector assemble_vector(std::span<const FeatureId> enabled, const FeatureContext& ctx) {
  FeatureVector vec;
  vec.reserve(enabled.size());
  for (FeatureId id : enabled) vec.push_back({id, assemble(id, ctx)});
  return vec;
}

std::vector<FeatureId> parse_feature_list(const std::string& text) {
  std::vector<FeatureId> ids;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    int v = std::stoi(tok);
    if (v < 0 || v >= kFeatureCount)
      throw std::out_of_range("feature id out of range: " + tok);
    ids.push_back(FeatureId(v));
  }
  return ids;
}

std::string format_feature_list(std::span<const FeatureId> ids) {
  std::string out;
  for (size_t i = 0; i < ids.size(); ++i) {
    if (i > 0) out += ',';
    out += std::to_string(int(ids[i]));
  }
  return out;
}

}  // namespace flowsim
