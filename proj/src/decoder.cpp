#include "occsim/decoder.hpp"

#include <algorithm>
#include <string>

namespace occsim {

namespace {

std::vector<std::vector<const CodedPacket*>> by_chunk(const ChunkingScheme& s, const std::vector<CodedPacket>& packets) {
  std::vector<std::vector<const CodedPacket*>> out(s.q());
  for (const auto& p : packets) {
    if (p.chunk >= s.q()) throw IndexOutOfRange("packet labeled with chunk " + std::to_string(p.chunk));
    if (p.gev.size() != s.k()) throw std::invalid_argument("packet encoding vector length differs from k");
    out[p.chunk].push_back(&p);
  }
  return out;
}

}  // namespace

DecodeOutcome decode_cc(const ChunkingScheme& s, const std::vector<CodedPacket>& packets) {
  if (s.tau() != 1) throw SchemeMismatch("decode_cc needs tau = 1, got tau = " + std::to_string(s.tau()));
  const auto groups = by_chunk(s, packets);
  DecodeOutcome out;
  out.per_chunk_decodable.assign(s.q(), false);
  for (std::size_t w = 0; w < s.q(); ++w) {
    gf2::BitMatrix sub(s.alpha(), std::vector<gf2::BitVector>{});
    for (const auto* p : groups[w]) sub.append_row(p->gev.circular_slice(s.chunk_start(w), s.alpha()));
    const std::size_t r = gf2::rank(sub);
    out.rank_at_sink += r;
    if (r == s.alpha()) {
      out.per_chunk_decodable[w] = true;
      for (std::size_t j : s.chunk_indices(w)) out.recovered.push_back(j);
    }
  }
  std::sort(out.recovered.begin(), out.recovered.end());
  out.success = out.recovered.size() == s.k();
  return out;
}

DecodeOutcome decode_occ(const ChunkingScheme& s, const std::vector<CodedPacket>& packets) {
  if (s.tau() < 2) throw SchemeMismatch("decode_occ needs tau >= 2, got tau = " + std::to_string(s.tau()));
  const auto groups = by_chunk(s, packets);
  std::vector<gf2::BitVector> rows;
  std::vector<std::size_t> starts;
  rows.reserve(packets.size());
  for (std::size_t w = 0; w < s.q(); ++w) {
    for (const auto* p : groups[w]) {
      if (p->gev.none()) continue;
      rows.push_back(p->gev);
      starts.push_back(s.chunk_start(w));
    }
  }
  const gf2::BitMatrix q_matrix(s.k(), std::move(rows));
  const auto rep = gf2::banded_eliminate(q_matrix, s.alpha(), true, starts);
  DecodeOutcome out;
  out.rank_at_sink = rep.rank;
  out.recovered = gf2::determined_coordinates(s.k(), rep.null_basis);
  out.success = rep.rank == s.k();
  return out;
}

HyperchunkReport analyze_hyperchunks(const ChunkingScheme& s, const std::vector<CodedPacket>& packets,
                                     std::size_t chi) {
  if (s.tau() < 2) throw SchemeMismatch("hyperchunk analysis needs tau >= 2, got tau = " + std::to_string(s.tau()));
  if (chi == 0 || chi >= s.q())
    throw InvalidParameter("chi must lie in [1, q) = [1, " + std::to_string(s.q()) + "), got " + std::to_string(chi));
  const auto groups = by_chunk(s, packets);
  const std::size_t size = s.hyperchunk_size(chi);
  HyperchunkReport rep;
  rep.chi = chi;
  std::vector<bool> good_block(s.block_count(), false);
  for (const auto& h : s.hyperchunks(chi)) {
    gf2::BitMatrix sub(size, std::vector<gf2::BitVector>{});
    for (std::size_t c = 0; c < chi; ++c)
      for (const auto* p : groups[(h.start_chunk + c) % s.q()]) sub.append_row(p->gev.circular_slice(h.first_index, size));
    if (gf2::rank(sub) < size) {
      rep.bad_hyperchunks.push_back(h.start_chunk);
      continue;
    }
    // Hyperchunks start on block boundaries, so whole blocks fit in the arc.
    const std::size_t first_block = h.first_index / s.stride();
    const std::size_t covered = size / s.stride();
    for (std::size_t b = 0; b < covered; ++b) good_block[(first_block + b) % good_block.size()] = true;
  }
  for (std::size_t b = 0; b < good_block.size(); ++b)
    if (!good_block[b]) rep.bad_blocks.push_back(b);
  return rep;
}

}  // namespace occsim
