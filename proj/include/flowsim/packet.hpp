#pragma once

#include <cstdint>
#include <vector>

namespace flowsim {

// Bit layout of PacketRecord::flags. Bits 0-5 mirror the TCP flag group,
// bits 6-7 carry the IP DF/MF flags. Non-TCP packets have bits 0-5 clear.
enum PacketFlag : uint8_t {
  kFlagSyn = 1u << 0,
  kFlagFin = 1u << 1,
  kFlagRst = 1u << 2,
  kFlagPsh = 1u << 3,
  kFlagAck = 1u << 4,
  kFlagUrg = 1u << 5,
  kFlagDf = 1u << 6,
  kFlagMf = 1u << 7,
};

constexpr uint8_t kTcpFlagMask = 0x3f;

/// One parsed packet: arrival time plus the header fields feature
/// assembly consumes. Timestamps are nanoseconds since trace start and
/// non-decreasing within a stream.
struct PacketRecord {
  uint64_t ts_ns = 0;
  uint32_t ipv4_src = 0;
  uint32_t ipv4_dst = 0;
  uint16_t src_port = 0;  // zero when the protocol has no ports
  uint16_t dst_port = 0;
  uint16_t ip_length = 0;       // IP total length in bytes
  uint16_t ip_frag_offset = 0;  // 13-bit fragment offset
  uint8_t ip_proto = 0;
  uint8_t flags = 0;

  bool operator==(const PacketRecord&) const = default;
};

struct Trace {
  std::vector<PacketRecord> packets;
  uint64_t skipped_non_ipv4 = 0;  // capture frames without an IPv4 payload
  uint64_t restamped = 0;         // timestamps forced monotone on ingest

  uint64_t end_ts_ns() const { return packets.empty() ? 0 : packets.back().ts_ns; }
  size_t size() const { return packets.size(); }
  bool empty() const { return packets.empty(); }
};

}  // namespace flowsim
