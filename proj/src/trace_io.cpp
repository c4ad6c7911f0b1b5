#include "flowsim/trace_io.hpp"

#include <array>
#include <charconv>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "flowsim/flow.hpp"

namespace flowsim {

std::string format_ipv4(uint32_t addr) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%u.%u.%u.%u", (addr >> 24) & 0xff, (addr >> 16) & 0xff,
                (addr >> 8) & 0xff, addr & 0xff);
  return buf;
}

uint32_t parse_ipv4(const std::string& text) {
  uint32_t addr = 0;
  const char* p = text.data();
  const char* end = text.data() + text.size();
  for (int octet = 0; octet < 4; ++octet) {
    unsigned v = 0;
    auto [next, ec] = std::from_chars(p, end, v);
    if (ec != std::errc{} || v > 255 || next == p)
      throw ParseError("bad IPv4 address: '" + text + "'");
    addr = (addr << 8) | v;
    p = next;
    if (octet < 3) {
      if (p == end || *p != '.') throw ParseError("bad IPv4 address: '" + text + "'");
      p++;
    }
  }
  if (p != end) throw ParseError("bad IPv4 address: '" + text + "'");
  return addr;
}

namespace {

// Forces non-decreasing timestamps (max-so-far), counting adjustments.
void restamp_monotone(Trace& trace) {
  uint64_t high = 0;
  for (PacketRecord& pkt : trace.packets) {
    if (pkt.ts_ns < high) {
      pkt.ts_ns = high;
      trace.restamped++;
    } else {
      high = pkt.ts_ns;
    }
  }
}

uint64_t parse_u64_field(const std::string& tok, size_t line_no, const char* name,
                         uint64_t max_value) {
  uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || ptr != tok.data() + tok.size() || v > max_value)
    throw ParseError("line " + std::to_string(line_no) + ": bad " + name + " '" + tok + "'");
  return v;
}

}  // namespace

Trace parse_native(std::istream& in) {
  Trace trace;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    line_no++;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;

    std::array<std::string, 10> fields;
    size_t count = 0;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      if (count < fields.size()) fields[count] = tok;
      count++;
    }
    if (count != 9)
      throw ParseError("line " + std::to_string(line_no) + ": expected 9 fields, got " +
                       std::to_string(count));

    PacketRecord pkt;
    pkt.ts_ns = parse_u64_field(fields[0], line_no, "ts_ns", UINT64_MAX);
    try {
      pkt.ipv4_src = parse_ipv4(fields[1]);
      pkt.ipv4_dst = parse_ipv4(fields[2]);
    } catch (const ParseError& e) {
      throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
    }
    pkt.ip_proto = uint8_t(parse_u64_field(fields[3], line_no, "proto", 255));
    pkt.src_port = uint16_t(parse_u64_field(fields[4], line_no, "src_port", 65535));
    pkt.dst_port = uint16_t(parse_u64_field(fields[5], line_no, "dst_port", 65535));
    pkt.ip_length = uint16_t(parse_u64_field(fields[6], line_no, "ip_length", 65535));
    pkt.flags = uint8_t(parse_u64_field(fields[7], line_no, "flags", 255));
    pkt.ip_frag_offset = uint16_t(parse_u64_field(fields[8], line_no, "frag_offset", 0x1fff));
    trace.packets.push_back(pkt);
  }
  restamp_monotone(trace);
  return trace;
}

void write_native(const Trace& trace, std::ostream& out) {
  for (const PacketRecord& pkt : trace.packets) {
    out << pkt.ts_ns << ',' << format_ipv4(pkt.ipv4_src) << ',' << format_ipv4(pkt.ipv4_dst)
        << ',' << unsigned(pkt.ip_proto) << ',' << pkt.src_port << ',' << pkt.dst_port << ','
        << pkt.ip_length << ',' << unsigned(pkt.flags) << ',' << pkt.ip_frag_offset << '\n';
  }
}

Trace parse_native_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open trace file: " + path);
  return parse_native(in);
}

void write_native_file(const Trace& trace, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write trace file: " + path);
  write_native(trace, out);
}

namespace {

constexpr uint32_t kPcapMagic = 0xa1b2c3d4;
constexpr uint32_t kPcapMagicSwapped = 0xd4c3b2a1;
constexpr uint32_t kLinkEthernet = 1;

constexpr uint16_t kEtherIpv4 = 0x0800;
constexpr uint16_t kEtherVlan = 0x8100;

uint32_t swap32(uint32_t v) { return __builtin_bswap32(v); }

struct ByteReader {
  std::istream& in;
  uint64_t offset = 0;

  bool read(void* dst, size_t n) {
    in.read(reinterpret_cast<char*>(dst), std::streamsize(n));
    size_t got = size_t(in.gcount());
    offset += got;
    return got == n;
  }
};

uint16_t be16(const uint8_t* p) { return uint16_t((p[0] << 8) | p[1]); }
uint32_t be32(const uint8_t* p) {
  return (uint32_t(p[0]) << 24) | (uint32_t(p[1]) << 16) | (uint32_t(p[2]) << 8) | p[3];
}

// Remaps the wire TCP flag byte (FIN lowest) to the PacketRecord layout.
uint8_t remap_tcp_flags(uint8_t wire) {
  uint8_t out = 0;
  if (wire & 0x02) out |= kFlagSyn;
  if (wire & 0x01) out |= kFlagFin;
  if (wire & 0x04) out |= kFlagRst;
  if (wire & 0x08) out |= kFlagPsh;
  if (wire & 0x10) out |= kFlagAck;
  if (wire & 0x20) out |= kFlagUrg;
  return out;
}

}  // namespace

Trace parse_pcap(std::istream& in) {
  ByteReader reader{in};
  uint8_t header[24];
  if (!reader.read(header, sizeof(header)))
    throw ParseError("capture file shorter than the 24-byte global header");

  uint32_t magic;
  std::memcpy(&magic, header, 4);
  bool swapped;
  if (magic == kPcapMagic) {
    swapped = false;
  } else if (magic == kPcapMagicSwapped) {
    swapped = true;
  } else {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "unrecognized capture magic 0x%08x", magic);
    throw ParseError(buf);
  }
  auto host32 = [swapped](const uint8_t* p) {
    uint32_t v;
    std::memcpy(&v, p, 4);
    return swapped ? swap32(v) : v;
  };
  uint32_t link_type = host32(header + 20);
  if (link_type != kLinkEthernet)
    throw ParseError("unsupported link type " + std::to_string(link_type) +
                     " (only Ethernet is handled)");

  Trace trace;
  bool have_first = false;
  uint64_t first_ts = 0;
  std::vector<uint8_t> frame;

  for (;;) {
    uint8_t rec[16];
    uint64_t rec_offset = reader.offset;
    reader.in.read(reinterpret_cast<char*>(rec), sizeof(rec));
    size_t got = size_t(reader.in.gcount());
    reader.offset += got;
    if (got == 0) break;  // clean EOF
    if (got != sizeof(rec))
      throw ParseError("truncated record header at byte offset " + std::to_string(rec_offset));

    uint64_t ts_sec = host32(rec + 0);
    uint64_t ts_usec = host32(rec + 4);
    uint32_t incl_len = host32(rec + 8);
    if (incl_len > (1u << 20))
      throw ParseError("implausible record length at byte offset " + std::to_string(rec_offset));

    frame.resize(incl_len);
    if (!reader.read(frame.data(), incl_len))
      throw ParseError("truncated packet data at byte offset " + std::to_string(rec_offset));

    uint64_t ts_ns = ts_sec * 1'000'000'000ull + ts_usec * 1'000ull;
    if (!have_first) {
      first_ts = ts_ns;
      have_first = true;
    }

    // Ethernet header, optionally one VLAN tag.
    size_t off = 14;
    if (frame.size() < off) {
      trace.skipped_non_ipv4++;
      continue;
    }
    uint16_t ether_type = be16(frame.data() + 12);
    if (ether_type == kEtherVlan) {
      if (frame.size() < off + 4) {
        trace.skipped_non_ipv4++;
        continue;
      }
      ether_type = be16(frame.data() + 16);
      off += 4;
    }
    if (ether_type != kEtherIpv4 || frame.size() < off + 20) {
      trace.skipped_non_ipv4++;
      continue;
    }

    const uint8_t* ip = frame.data() + off;
    uint8_t version = ip[0] >> 4;
    size_t ihl = size_t(ip[0] & 0x0f) * 4;
    if (version != 4 || ihl < 20 || frame.size() < off + ihl) {
      trace.skipped_non_ipv4++;
      continue;
    }

    PacketRecord pkt;
    pkt.ts_ns = ts_ns - first_ts;
    pkt.ip_length = be16(ip + 2);
    uint16_t frag = be16(ip + 6);
    pkt.ip_frag_offset = frag & 0x1fff;
    if (frag & 0x4000) pkt.flags |= kFlagDf;
    if (frag & 0x2000) pkt.flags |= kFlagMf;
    pkt.ip_proto = ip[9];
    pkt.ipv4_src = be32(ip + 12);
    pkt.ipv4_dst = be32(ip + 16);

    bool first_fragment = pkt.ip_frag_offset == 0;
    const uint8_t* l4 = ip + ihl;
    size_t l4_len = frame.size() - off - ihl;
    if (first_fragment && pkt.ip_proto == 6 && l4_len >= 14) {  // TCP
      pkt.src_port = be16(l4);
      pkt.dst_port = be16(l4 + 2);
      pkt.flags |= remap_tcp_flags(l4[13]);
    } else if (first_fragment && pkt.ip_proto == 17 && l4_len >= 4) {  // UDP
      pkt.src_port = be16(l4);
      pkt.dst_port = be16(l4 + 2);
    }
    trace.packets.push_back(pkt);
  }

  restamp_monotone(trace);
  return trace;
}

Trace parse_pcap_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open capture file: " + path);
  return parse_pcap(in);
}

Trace load_trace(const std::string& path) {
  auto ends_with = [&](const char* suffix) {
    std::string s(suffix);
    return path.size() >= s.size() && path.compare(path.size() - s.size(), s.size(), s) == 0;
  };
  if (ends_with(".pcap") || ends_with(".cap")) return parse_pcap_file(path);
  return parse_native_file(path);
}

TraceStats trace_stats(const Trace& trace) {
  TraceStats stats;
  stats.packets = trace.packets.size();
  if (trace.packets.empty()) return stats;

  std::unordered_set<FlowKey, FlowKeyHash> flows;
  for (const PacketRecord& pkt : trace.packets) flows.insert(canonical_key(pkt));
  stats.distinct_flows = flows.size();
  stats.duration_ns = trace.packets.back().ts_ns - trace.packets.front().ts_ns;
  if (stats.duration_ns > 0) {
    double secs = double(stats.duration_ns) / 1e9;
    stats.packets_per_s = double(stats.packets) / secs;
    stats.new_flows_per_s = double(stats.distinct_flows) / secs;
  }
  return stats;
}

}  // namespace flowsim
