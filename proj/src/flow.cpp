#include "flowsim/flow.hpp"

namespace flowsim {

FlowKey canonical_key(const PacketRecord& pkt) {
  FlowKey key;
  key.proto = pkt.ip_proto;
  // Endpoint ordering is lexicographic on (address, port).
  bool src_first = std::pair(pkt.ipv4_src, pkt.src_port) <= std::pair(pkt.ipv4_dst, pkt.dst_port);
  if (src_first) {
    key.ip_lo = pkt.ipv4_src;
    key.port_lo = pkt.src_port;
    key.ip_hi = pkt.ipv4_dst;
    key.port_hi = pkt.dst_port;
  } else {
    key.ip_lo = pkt.ipv4_dst;
    key.port_lo = pkt.dst_port;
    key.ip_hi = pkt.ipv4_src;
    key.port_hi = pkt.src_port;
  }
  return key;
}

}  // namespace flowsim
