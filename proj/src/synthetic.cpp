#include "flowsim/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "flowsim/trace_io.hpp"

namespace flowsim {

namespace {

uint64_t mix64(uint64_t a, uint64_t b) {
  uint64_t z = a + 0x9e3779b97f4a7c15ull * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

uint64_t sample(const ValueDist& d, std::mt19937_64& rng) {
  if (d.max < d.min) throw std::invalid_argument("distribution with max < min");
  if (d.is_fixed()) return d.min;
  return std::uniform_int_distribution<uint64_t>(d.min, d.max)(rng);
}

void emit_flow(const FlowArchetype& arch, size_t arch_idx, uint64_t flow_idx, uint64_t seed,
               std::vector<PacketRecord>& out) {
  std::mt19937_64 rng(mix64(mix64(seed, arch_idx), flow_idx));

  uint64_t inter_arrival_ns = uint64_t(std::llround(1e9 / arch.arrival_rate_per_s));
  uint64_t start = flow_idx * inter_arrival_ns;
  if (arch.start_jitter_ns > 0)
    start += std::uniform_int_distribution<uint64_t>(0, arch.start_jitter_ns)(rng);

  PacketRecord pkt;
  pkt.ip_proto = arch.proto;
  pkt.src_port = uint16_t(arch.src_port_base + flow_idx % arch.src_port_count);
  pkt.ipv4_src = arch.src_ip_base + uint32_t((flow_idx / arch.src_port_count) % arch.src_ip_count);
  pkt.ipv4_dst = arch.dst_ip_base + uint32_t(flow_idx % arch.dst_ip_count);
  pkt.dst_port = uint16_t(arch.dst_port_base + flow_idx % arch.dst_port_count);

  uint64_t remaining = sample(arch.flow_length, rng);
  if (remaining == 0) throw std::invalid_argument("archetype '" + arch.name + "' generated a zero-packet flow");

  uint64_t t = start;
  uint64_t emitted = 0;
  while (remaining > 0) {
    uint64_t burst = std::min(std::max<uint64_t>(sample(arch.packets_per_burst, rng), 1), remaining);
    for (uint64_t j = 0; j < burst; ++j) {
      pkt.ts_ns = t;
      pkt.ip_length = uint16_t(sample(arch.ip_length, rng));
      pkt.flags = emitted == 0 ? arch.flags_first : (j == 0 ? arch.flags_burst : arch.flags_rest);
      out.push_back(pkt);
      emitted++;
      remaining--;
      if (j + 1 < burst) t += sample(arch.intra_burst_gap_ns, rng);
    }
    if (remaining > 0) t += sample(arch.inter_burst_gap_ns, rng);
  }
}

}  // namespace

Trace generate_synthetic(const SyntheticSpec& spec) {
  if (spec.duration_s <= 0) throw std::invalid_argument("duration must be positive");
  Trace trace;
  for (size_t a = 0; a < spec.archetypes.size(); ++a) {
    const FlowArchetype& arch = spec.archetypes[a];
    if (arch.arrival_rate_per_s <= 0)
      throw std::invalid_argument("archetype '" + arch.name + "' needs a positive arrival rate");
    if (arch.flow_length.max == 0)
      throw std::invalid_argument("archetype '" + arch.name + "' has zero packets per flow");
    if (arch.src_port_count == 0 || arch.src_ip_count == 0 || arch.dst_ip_count == 0 ||
        arch.dst_port_count == 0)
      throw std::invalid_argument("archetype '" + arch.name + "' has an empty header range");

    uint64_t flows = uint64_t(std::llround(arch.arrival_rate_per_s * spec.duration_s));
    flows = std::max<uint64_t>(flows, 1);
    for (uint64_t i = 0; i < flows; ++i) emit_flow(arch, a, i, spec.seed, trace.packets);
  }
  std::stable_sort(trace.packets.begin(), trace.packets.end(),
                   [](const PacketRecord& a, const PacketRecord& b) { return a.ts_ns < b.ts_ns; });
  return trace;
}

namespace {

using nlohmann::json;

ValueDist dist_from_json(const json& j) {
  if (j.is_number()) return ValueDist::fixed(j.get<uint64_t>());
  ValueDist d;
  if (j.contains("fixed")) {
    d.min = d.max = j.at("fixed").get<uint64_t>();
  } else {
    d.min = j.at("min").get<uint64_t>();
    d.max = j.at("max").get<uint64_t>();
  }
  return d;
}

json dist_to_json(const ValueDist& d) {
  if (d.is_fixed()) return json{{"fixed", d.min}};
  return json{{"min", d.min}, {"max", d.max}};
}

}  // namespace

SyntheticSpec parse_synthetic_spec(const std::string& json_text) {
  json j = json::parse(json_text);
  SyntheticSpec spec;
  spec.duration_s = j.at("duration_s").get<double>();
  spec.seed = j.value("seed", uint64_t(1));
  for (const json& ja : j.at("archetypes")) {
    FlowArchetype a;
    a.name = ja.value("name", std::string("archetype"));
    a.arrival_rate_per_s = ja.at("arrival_rate_per_s").get<double>();
    if (ja.contains("flow_length")) a.flow_length = dist_from_json(ja.at("flow_length"));
    if (ja.contains("packets_per_burst"))
      a.packets_per_burst = dist_from_json(ja.at("packets_per_burst"));
    if (ja.contains("intra_burst_gap_ns"))
      a.intra_burst_gap_ns = dist_from_json(ja.at("intra_burst_gap_ns"));
    if (ja.contains("inter_burst_gap_ns"))
      a.inter_burst_gap_ns = dist_from_json(ja.at("inter_burst_gap_ns"));
    a.start_jitter_ns = ja.value("start_jitter_ns", uint64_t(0));
    a.proto = ja.value("proto", uint8_t(6));
    if (ja.contains("src_ip_base")) a.src_ip_base = parse_ipv4(ja.at("src_ip_base").get<std::string>());
    a.src_ip_count = ja.value("src_ip_count", uint32_t(1 << 16));
    if (ja.contains("dst_ip_base")) a.dst_ip_base = parse_ipv4(ja.at("dst_ip_base").get<std::string>());
    a.dst_ip_count = ja.value("dst_ip_count", uint32_t(256));
    a.src_port_base = ja.value("src_port_base", uint16_t(1024));
    a.src_port_count = ja.value("src_port_count", uint32_t(60000));
    a.dst_port_base = ja.value("dst_port_base", uint16_t(80));
    a.dst_port_count = ja.value("dst_port_count", uint32_t(1));
    if (ja.contains("ip_length")) a.ip_length = dist_from_json(ja.at("ip_length"));
    a.flags_first = ja.value("flags_first", uint8_t(0));
    a.flags_burst = ja.value("flags_burst", uint8_t(0));
    a.flags_rest = ja.value("flags_rest", uint8_t(0));
    spec.archetypes.push_back(std::move(a));
  }
  return spec;
}

SyntheticSpec load_synthetic_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open synthetic spec: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_synthetic_spec(ss.str());
}

std::string synthetic_spec_to_json(const SyntheticSpec& spec) {
  json j;
  j["duration_s"] = spec.duration_s;
  j["seed"] = spec.seed;
  j["archetypes"] = json::array();
  for (const FlowArchetype& a : spec.archetypes) {
    json ja;
    ja["name"] = a.name;
    ja["arrival_rate_per_s"] = a.arrival_rate_per_s;
    ja["flow_length"] = dist_to_json(a.flow_length);
    ja["packets_per_burst"] = dist_to_json(a.packets_per_burst);
    ja["intra_burst_gap_ns"] = dist_to_json(a.intra_burst_gap_ns);
    ja["inter_burst_gap_ns"] = dist_to_json(a.inter_burst_gap_ns);
    ja["start_jitter_ns"] = a.start_jitter_ns;
    ja["proto"] = a.proto;
    ja["src_ip_base"] = format_ipv4(a.src_ip_base);
    ja["src_ip_count"] = a.src_ip_count;
    ja["dst_ip_base"] = format_ipv4(a.dst_ip_base);
    ja["dst_ip_count"] = a.dst_ip_count;
    ja["src_port_base"] = a.src_port_base;
    ja["src_port_count"] = a.src_port_count;
    ja["dst_port_base"] = a.dst_port_base;
    ja["dst_port_count"] = a.dst_port_count;
    ja["ip_length"] = dist_to_json(a.ip_length);
    ja["flags_first"] = a.flags_first;
    ja["flags_burst"] = a.flags_burst;
    ja["flags_rest"] = a.flags_rest;
    j["archetypes"].push_back(std::move(ja));
  }
  return j.dump(2) + "\n";
}

}  // namespace flowsim
