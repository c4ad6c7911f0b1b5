#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>

#include "flowsim/packet.hpp"

namespace flowsim {

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Parses the native text format: one packet per line,
///   ts_ns,src_ip,dst_ip,proto,src_port,dst_port,ip_length,flags,frag_offset
/// with dotted-quad addresses, `#` comment lines, LF line endings.
/// Out-of-order timestamps are restamped monotone (max-so-far) and counted.
Trace parse_native(std::istream& in);
Trace parse_native_file(const std::string& path);

void write_native(const Trace& trace, std::ostream& out);
void write_native_file(const Trace& trace, const std::string& path);

/// Parses a classic capture file (24-byte global header, either byte
/// order, Ethernet link type). Yields one record per IPv4 packet; other
/// frames are counted and skipped. One VLAN tag level is unwrapped.
/// Timestamps become ns offsets from the first packet, forced monotone.
Trace parse_pcap(std::istream& in);
Trace parse_pcap_file(const std::string& path);

/// Loads a trace by extension: .pcap/.cap -> capture format, else native.
Trace load_trace(const std::string& path);

struct TraceStats {
  uint64_t packets = 0;
  uint64_t distinct_flows = 0;
  uint64_t duration_ns = 0;
  double packets_per_s = 0;
  double new_flows_per_s = 0;
};

TraceStats trace_stats(const Trace& trace);

std::string format_ipv4(uint32_t addr);
uint32_t parse_ipv4(const std::string& text);  // throws ParseError

}  // namespace flowsim
