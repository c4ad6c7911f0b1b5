#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <unordered_set>

#include "flowsim/flow.hpp"
#include "flowsim/synthetic.hpp"
#include "flowsim/trace_io.hpp"

using namespace flowsim;

namespace {

// Test-only builder for classic capture bytes.
struct PcapBuilder {
  std::string bytes;
  bool swapped;

  explicit PcapBuilder(bool byte_swapped = false, uint32_t link_type = 1)
      : swapped(byte_swapped) {
    put32(byte_swapped ? 0xd4c3b2a1 : 0xa1b2c3d4, false);  // magic as stored
    put16(2);
    put16(4);
    put32(0);
    put32(0);
    put32(65535);
    put32(link_type);
  }

  void put16(uint16_t v) {
    if (swapped) v = uint16_t((v >> 8) | (v << 8));
    bytes.append(reinterpret_cast<const char*>(&v), 2);
  }
  void put32(uint32_t v, bool swap_this = true) {
    if (swapped && swap_this) v = __builtin_bswap32(v);
    bytes.append(reinterpret_cast<const char*>(&v), 4);
  }
  void raw8(uint8_t v) { bytes.push_back(char(v)); }
  void be16(uint16_t v) {
    bytes.push_back(char(v >> 8));
    bytes.push_back(char(v & 0xff));
  }
  void be32(uint32_t v) {
    be16(uint16_t(v >> 16));
    be16(uint16_t(v & 0xffff));
  }

  void add_tcp_packet(uint32_t ts_sec, uint32_t ts_usec, uint32_t src, uint16_t sport,
                      uint32_t dst, uint16_t dport, uint8_t wire_tcp_flags) {
    uint32_t len = 14 + 20 + 20;
    put32(ts_sec);
    put32(ts_usec);
    put32(len);
    put32(len);
    for (int i = 0; i < 12; ++i) raw8(0);  // MACs
    be16(0x0800);
    // IPv4 header
    raw8(0x45);
    raw8(0);
    be16(40);      // total length
    be16(0);       // id
    be16(0x4000);  // DF set
    raw8(64);
    raw8(6);
    be16(0);  // checksum
    be32(src);
    be32(dst);
    // TCP header
    be16(sport);
    be16(dport);
    be32(0);
    be32(0);
    raw8(0x50);
    raw8(wire_tcp_flags);
    be16(0);
    be16(0);
    be16(0);
  }

  void add_arp_packet(uint32_t ts_sec, uint32_t ts_usec) {
    uint32_t len = 14 + 28;
    put32(ts_sec);
    put32(ts_usec);
    put32(len);
    put32(len);
    for (int i = 0; i < 12; ++i) raw8(0);
    be16(0x0806);
    for (int i = 0; i < 28; ++i) raw8(0);
  }

  void add_vlan_udp_packet(uint32_t ts_sec, uint32_t ts_usec, uint32_t src, uint16_t sport,
                           uint32_t dst, uint16_t dport) {
    uint32_t len = 14 + 4 + 20 + 8;
    put32(ts_sec);
    put32(ts_usec);
    put32(len);
    put32(len);
    for (int i = 0; i < 12; ++i) raw8(0);
    be16(0x8100);  // VLAN tag
    be16(0x0064);  // VID 100
    be16(0x0800);
    raw8(0x45);
    raw8(0);
    be16(28);
    be16(0);
    be16(0);
    raw8(64);
    raw8(17);
    be16(0);
    be32(src);
    be32(dst);
    be16(sport);
    be16(dport);
    be16(8);
    be16(0);
  }

  Trace parse() {
    std::istringstream in(bytes);
    return parse_pcap(in);
  }
};

}  // namespace

TEST_CASE("pcap byte-swapped magic is accepted") {
  PcapBuilder pcap(/*byte_swapped=*/true);
  pcap.add_tcp_packet(100, 0, 0x0a000001, 1234, 0xc0a80002, 80, 0x02);
  Trace t = pcap.parse();
  REQUIRE(t.packets.size() == 1);
  CHECK(t.packets[0].src_port == 1234);
}

TEST_CASE("pcap parses a TCP SYN packet") {
  PcapBuilder pcap;
  pcap.add_tcp_packet(100, 10, 0x0a000001, 1234, 0xc0a80002, 80, 0x02);  // wire SYN
  Trace t = pcap.parse();
  REQUIRE(t.packets.size() == 1);
  const PacketRecord& p = t.packets[0];
  CHECK(p.ipv4_src == 0x0a000001);
  CHECK(p.ipv4_dst == 0xc0a80002);
  CHECK(p.src_port == 1234);
  CHECK(p.dst_port == 80);
  CHECK(p.ip_proto == 6);
  CHECK((p.flags & kFlagSyn) != 0);
  CHECK((p.flags & kFlagDf) != 0);
  CHECK(p.ts_ns == 0);  // offsets start at the first packet
}

TEST_CASE("pcap unwraps one VLAN tag level") {
  PcapBuilder pcap;
  pcap.add_vlan_udp_packet(5, 0, 0x0a0a0a0a, 5353, 0x0b0b0b0b, 53);
  Trace t = pcap.parse();
  REQUIRE(t.packets.size() == 1);
  CHECK(t.skipped_non_ipv4 == 0);
  CHECK(t.packets[0].ip_proto == 17);
  CHECK(t.packets[0].src_port == 5353);
  CHECK(t.packets[0].dst_port == 53);
  CHECK(t.packets[0].flags == 0);  // UDP leaves the TCP flag bits clear
}

TEST_CASE("pcap skips non-IPv4 frames") {
  PcapBuilder pcap;
  pcap.add_tcp_packet(1, 0, 1, 10, 2, 20, 0x02);
  pcap.add_arp_packet(1, 5);
  pcap.add_tcp_packet(1, 10, 3, 10, 4, 20, 0x10);
  pcap.add_arp_packet(1, 15);
  pcap.add_tcp_packet(1, 20, 5, 10, 6, 20, 0x10);
  Trace t = pcap.parse();
  CHECK(t.packets.size() == 3);
  CHECK(t.skipped_non_ipv4 == 2);
}

TEST_CASE("pcap errors carry position information") {
  SUBCASE("bad magic") {
    std::istringstream in(std::string(24, 'x'));
    CHECK_THROWS_AS(parse_pcap(in), ParseError);
  }
  SUBCASE("unknown link type") {
    PcapBuilder pcap(false, /*link_type=*/101);
    CHECK_THROWS_WITH_AS(pcap.parse(), doctest::Contains("link type 101"), ParseError);
  }
  SUBCASE("truncated packet data") {
    PcapBuilder pcap;
    pcap.add_tcp_packet(1, 0, 1, 10, 2, 20, 0x02);
    pcap.bytes.resize(pcap.bytes.size() - 4);
    CHECK_THROWS_WITH_AS(pcap.parse(), doctest::Contains("byte offset"), ParseError);
  }
}

TEST_CASE("native format round trips") {
  std::istringstream in("0,10.0.0.1,10.0.0.2,6,1000,80,60,17,0\n");
  Trace t = parse_native(in);
  REQUIRE(t.packets.size() == 1);
  CHECK(t.packets[0].flags == (kFlagSyn | kFlagAck));  // 17 = 0b00010001
  CHECK(t.packets[0].ip_length == 60);

  std::ostringstream out;
  write_native(t, out);
  CHECK(out.str() == "0,10.0.0.1,10.0.0.2,6,1000,80,60,17,0\n");
}

TEST_CASE("load_trace dispatches on the file extension") {
  auto dir = std::filesystem::temp_directory_path();
  auto pcap_path = (dir / "flowsim_dispatch_test.pcap").string();
  PcapBuilder pcap;
  pcap.add_tcp_packet(9, 0, 0x01020304, 1111, 0x05060708, 2222, 0x10);
  {
    std::ofstream out(pcap_path, std::ios::binary);
    out << pcap.bytes;
  }
  Trace t = load_trace(pcap_path);
  REQUIRE(t.packets.size() == 1);
  CHECK(t.packets[0].dst_port == 2222);
  std::filesystem::remove(pcap_path);

  CHECK_THROWS_AS(load_trace((dir / "flowsim_no_such_trace.csv").string()), ParseError);
}

TEST_CASE("native parser handles empty input and comments") {
  std::istringstream empty("");
  CHECK(parse_native(empty).packets.empty());

  std::istringstream commented("# header comment\n0,1.2.3.4,5.6.7.8,17,53,53,80,0,0\n");
  CHECK(parse_native(commented).packets.size() == 1);
}

TEST_CASE("native parser names the offending line") {
  std::istringstream in("0,10.0.0.1,10.0.0.2,6,1000,80,60,17,0\n1,10.0.0.1,10.0.0.2,6,1000,80,60,17\n");
  CHECK_THROWS_WITH_AS(parse_native(in), doctest::Contains("line 2"), ParseError);

  std::istringstream bad_ip("0,10.0.0.999,10.0.0.2,6,1000,80,60,17,0\n");
  CHECK_THROWS_WITH_AS(parse_native(bad_ip), doctest::Contains("line 1"), ParseError);
}

TEST_CASE("ipv4 text parsing rejects malformed addresses") {
  CHECK(parse_ipv4("10.0.0.1") == 0x0a000001);
  CHECK(parse_ipv4("255.255.255.255") == 0xffffffff);
  CHECK(format_ipv4(parse_ipv4("192.168.1.2")) == "192.168.1.2");
  for (const char* bad : {"10.0.0", "10.0.0.0.1", "4294967297.1.1.1", "1.2.3.256", "a.b.c.d",
                          "1..2.3", "1.2.3.4x"})
    CHECK_THROWS_AS(parse_ipv4(bad), ParseError);
}

TEST_CASE("random records survive a write/parse round trip") {
  std::mt19937_64 rng(23);
  Trace t;
  uint64_t ts = 0;
  for (int i = 0; i < 500; ++i) {
    PacketRecord p;
    ts += rng() % 100000;
    p.ts_ns = ts;
    p.ipv4_src = uint32_t(rng());
    p.ipv4_dst = uint32_t(rng());
    p.ip_proto = uint8_t(rng());
    p.src_port = uint16_t(rng());
    p.dst_port = uint16_t(rng());
    p.ip_length = uint16_t(rng());
    p.flags = uint8_t(rng());
    p.ip_frag_offset = uint16_t(rng() & 0x1fff);
    t.packets.push_back(p);
  }
  std::ostringstream out;
  write_native(t, out);
  std::istringstream in(out.str());
  Trace round = parse_native(in);
  CHECK(round.packets == t.packets);
  CHECK(round.restamped == 0);

  std::ostringstream out2;
  write_native(round, out2);
  CHECK(out2.str() == out.str());  // byte-identical modulo comments
}

TEST_CASE("out-of-order timestamps are restamped monotone") {
  std::istringstream in(
      "100,1.1.1.1,2.2.2.2,6,1,2,60,0,0\n"
      "50,1.1.1.1,2.2.2.2,6,1,2,60,0,0\n"
      "200,1.1.1.1,2.2.2.2,6,1,2,60,0,0\n");
  Trace t = parse_native(in);
  CHECK(t.restamped == 1);
  CHECK(t.packets[1].ts_ns == 100);  // max-so-far
  CHECK(t.packets[2].ts_ns == 200);
  for (size_t i = 1; i < t.packets.size(); ++i)
    CHECK(t.packets[i].ts_ns >= t.packets[i - 1].ts_ns);
}

TEST_CASE("synthetic generator emits a fixed-gap schedule") {
  SyntheticSpec spec;
  spec.duration_s = 1.0;
  spec.seed = 3;
  FlowArchetype arch;
  arch.name = "steady";
  arch.arrival_rate_per_s = 1;  // exactly one flow
  arch.flow_length = ValueDist::fixed(5);
  arch.packets_per_burst = ValueDist::fixed(5);
  arch.intra_burst_gap_ns = ValueDist::fixed(1'000'000);
  spec.archetypes.push_back(arch);

  Trace t = generate_synthetic(spec);
  REQUIRE(t.packets.size() == 5);
  for (uint64_t i = 0; i < 5; ++i) CHECK(t.packets[i].ts_ns == i * 1'000'000);
}

TEST_CASE("synthetic generation is deterministic under the seed") {
  SyntheticSpec spec;
  spec.duration_s = 2.0;
  spec.seed = 99;
  FlowArchetype a;
  a.arrival_rate_per_s = 50;
  a.flow_length = {1, 30};
  a.packets_per_burst = {2, 6};
  a.intra_burst_gap_ns = {1000, 3000};
  a.inter_burst_gap_ns = {100000, 400000};
  a.src_port_base = 1000;
  a.src_port_count = 500;
  spec.archetypes.push_back(a);
  FlowArchetype b = a;
  b.src_port_base = 2000;  // disjoint port range
  spec.archetypes.push_back(b);

  Trace t1 = generate_synthetic(spec);
  Trace t2 = generate_synthetic(spec);
  CHECK(t1.packets == t2.packets);

  std::ostringstream s1, s2;
  write_native(t1, s1);
  write_native(t2, s2);
  CHECK(s1.str() == s2.str());
}

TEST_CASE("scan plus bursty mix produces one key per flow") {
  SyntheticSpec spec;
  spec.duration_s = 1.0;
  spec.seed = 5;
  FlowArchetype scan;
  scan.name = "scan";
  scan.arrival_rate_per_s = 100;
  scan.flow_length = ValueDist::fixed(1);
  scan.src_port_base = 1024;
  scan.src_port_count = 1000;
  spec.archetypes.push_back(scan);
  FlowArchetype bursty;
  bursty.name = "bursty";
  bursty.arrival_rate_per_s = 1;
  bursty.flow_length = ValueDist::fixed(100);
  bursty.packets_per_burst = ValueDist::fixed(10);
  bursty.intra_burst_gap_ns = ValueDist::fixed(1000);
  bursty.inter_burst_gap_ns = ValueDist::fixed(100000);
  bursty.src_port_base = 5000;
  bursty.dst_port_base = 443;
  spec.archetypes.push_back(bursty);

  Trace t = generate_synthetic(spec);
  CHECK(t.packets.size() == 200);  // 100 scans + 1 flow of 100

  std::unordered_set<FlowKey, FlowKeyHash> keys;
  for (const PacketRecord& p : t.packets) keys.insert(canonical_key(p));
  CHECK(keys.size() == 101);

  TraceStats stats = trace_stats(t);
  CHECK(stats.distinct_flows == 101);
  CHECK(stats.packets == 200);
}

TEST_CASE("generator rejects degenerate specs") {
  SyntheticSpec spec;
  spec.duration_s = 1.0;
  FlowArchetype a;
  a.arrival_rate_per_s = 10;
  a.flow_length = ValueDist::fixed(0);  // zero packets
  spec.archetypes.push_back(a);
  CHECK_THROWS_AS(generate_synthetic(spec), std::invalid_argument);

  spec.archetypes[0].flow_length = ValueDist::fixed(1);
  spec.archetypes[0].arrival_rate_per_s = 0;
  CHECK_THROWS_AS(generate_synthetic(spec), std::invalid_argument);
}

TEST_CASE("trace stats on toy inputs") {
  Trace empty;
  TraceStats zero = trace_stats(empty);
  CHECK(zero.packets == 0);
  CHECK(zero.distinct_flows == 0);
  CHECK(zero.duration_ns == 0);
  CHECK(zero.packets_per_s == 0);

  Trace five;
  for (uint64_t i = 0; i < 5; ++i) {
    PacketRecord p;
    p.ts_ns = i * 1'000'000;
    p.ipv4_src = 1;
    p.ipv4_dst = 2;
    p.src_port = 10;
    p.dst_port = 20;
    p.ip_proto = 6;
    five.packets.push_back(p);
  }
  TraceStats s = trace_stats(five);
  CHECK(s.duration_ns == 4'000'000);
  CHECK(s.distinct_flows == 1);
  CHECK(s.packets_per_s == doctest::Approx(1250.0));
}

TEST_CASE("synthetic spec json round trip") {
  SyntheticSpec spec;
  spec.duration_s = 3.5;
  spec.seed = 77;
  FlowArchetype a;
  a.name = "mixed";
  a.arrival_rate_per_s = 12.5;
  a.flow_length = {3, 9};
  a.flags_first = kFlagSyn;
  a.flags_rest = kFlagAck;
  spec.archetypes.push_back(a);

  SyntheticSpec round = parse_synthetic_spec(synthetic_spec_to_json(spec));
  CHECK(round.duration_s == spec.duration_s);
  CHECK(round.seed == spec.seed);
  REQUIRE(round.archetypes.size() == 1);
  CHECK(round.archetypes[0].flow_length.min == 3);
  CHECK(round.archetypes[0].flow_length.max == 9);
  CHECK(round.archetypes[0].flags_first == kFlagSyn);
  CHECK(generate_synthetic(round).packets == generate_synthetic(spec).packets);
}
