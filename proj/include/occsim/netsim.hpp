#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "occsim/chunking.hpp"
#include "occsim/gf2.hpp"

namespace occsim {

/// One successful transmission: the seq-th packet carried by link `link`.
/// Both are 1-based; link i joins node i-1 to node i, node 0 is the source
/// and node l the sink.
struct ScheduleEvent {
  std::size_t link = 0;
  std::size_t seq = 0;
  friend bool operator==(const ScheduleEvent&, const ScheduleEvent&) = default;
};

enum class ScheduleMode { Canonical, RandomizedInterleave };

struct Schedule {
  std::size_t l = 0;
  std::size_t n = 0;
  std::vector<ScheduleEvent> events;
};

/// Worst-case schedule of capacity n over l links. Canonical mode runs n
/// rounds of links 1..l in order. RandomizedInterleave picks uniformly among
/// the links allowed to fire at each step, so every interleaving satisfying
/// the arrival/departure alternation is reachable.
Schedule build_worst_case_schedule(std::size_t l, std::size_t n, std::uint64_t seed,
                                   ScheduleMode mode = ScheduleMode::Canonical);

/// Checks that every link carries exactly n packets in sequence and that
/// every interior node alternates arrival, departure, arrival, ... On failure
/// returns false and, if `why` is given, a description.
bool is_worst_case_schedule(const Schedule& s, std::string* why = nullptr);

/// A coded packet as seen by the sink: its chunk label and its global
/// encoding vector over the k message packets.
struct CodedPacket {
  std::size_t chunk = 0;
  gf2::BitVector gev;
};

enum class EmptyChunkPolicy {
  ZeroPacket,  // send an all-zero packet for the chosen chunk
  Resample,    // choose among chunks the node holds packets for
};

/// Every packet sent on every link, in schedule order. links[i] holds the
/// packets carried by link i+1.
struct TransmitTrace {
  std::vector<std::vector<CodedPacket>> links;
};

/// Simulates chunked random recoding along the line. Each node picks a chunk
/// uniformly at every transmission and sends a uniformly random GF(2)
/// combination of what it holds for that chunk; the source holds the α
/// message packets of every chunk. Returns the sink's packets in arrival
/// order. Deterministic in `seed`; node i draws from its own stream.
std::vector<CodedPacket> transmit(const ChunkingScheme& scheme, const Schedule& sched, std::uint64_t seed,
                                  EmptyChunkPolicy policy = EmptyChunkPolicy::ZeroPacket,
                                  TransmitTrace* trace = nullptr);

}  // namespace occsim
