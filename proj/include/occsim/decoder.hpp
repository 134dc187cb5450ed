#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "occsim/chunking.hpp"
#include "occsim/netsim.hpp"

namespace occsim {

class SchemeMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct DecodeOutcome {
  bool success = false;
  /// Recovered message indices, increasing.
  std::vector<std::size_t> recovered;
  /// Per-chunk decodability; filled by decode_cc only.
  std::vector<bool> per_chunk_decodable;
  std::size_t rank_at_sink = 0;
};

/// Per-chunk decoding for chunked codes (tau = 1): chunk ω is decodable when
/// its ω-packets have rank α on the chunk's columns.
DecodeOutcome decode_cc(const ChunkingScheme& s, const std::vector<CodedPacket>& packets);

/// Joint decoding for overlapped chunks. Rows are ordered by chunk and solved
/// with the wrap-around banded eliminator; a message index counts as
/// recovered when every null-space vector vanishes on it.
DecodeOutcome decode_occ(const ChunkingScheme& s, const std::vector<CodedPacket>& packets);

struct HyperchunkReport {
  std::size_t chi = 0;
  std::vector<std::size_t> bad_hyperchunks;
  /// Blocks not contained in any decodable hyperchunk.
  std::vector<std::size_t> bad_blocks;
};

/// Decodes each hyperchunk of chi chunks in isolation. Requires tau >= 2 and
/// 1 <= chi < q. Every index of a decodable hyperchunk is also recovered by
/// decode_occ, so bad blocks over-count the loss.
HyperchunkReport analyze_hyperchunks(const ChunkingScheme& s, const std::vector<CodedPacket>& packets,
                                     std::size_t chi);

}  // namespace occsim
