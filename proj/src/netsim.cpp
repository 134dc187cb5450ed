#include "occsim/netsim.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>

#include "occsim/rng.hpp"

namespace occsim {

namespace {

// Whether link i (1-based) may fire given per-link counts `done` (index 0 unused).
bool may_fire(const std::vector<std::size_t>& done, std::size_t i, std::size_t l, std::size_t n) {
  if (done[i] >= n) return false;
  if (i > 1 && done[i] >= done[i - 1]) return false;  // sender has nothing new to forward
  if (i < l && done[i + 1] != done[i]) return false;  // receiver still owes a departure
  return true;
}

}  // namespace

Schedule build_worst_case_schedule(std::size_t l, std::size_t n, std::uint64_t seed, ScheduleMode mode) {
  if (l == 0 || n == 0) throw std::invalid_argument("schedule needs l >= 1 and n >= 1");
  Schedule s{l, n, {}};
  s.events.reserve(l * n);
  if (mode == ScheduleMode::Canonical) {
    for (std::size_t t = 1; t <= n; ++t)
      for (std::size_t i = 1; i <= l; ++i) s.events.push_back({i, t});
    return s;
  }
  Rng rng(derive_seed(seed, {0x5c4ed}));
  std::vector<std::size_t> done(l + 2, 0);
  std::vector<std::size_t> enabled;
  for (std::size_t step = 0; step < l * n; ++step) {
    enabled.clear();
    for (std::size_t i = 1; i <= l; ++i)
      if (may_fire(done, i, l, n)) enabled.push_back(i);
    if (enabled.empty()) throw std::logic_error("schedule generator reached a dead end");
    const std::size_t i = enabled[uniform_below(rng, enabled.size())];
    s.events.push_back({i, ++done[i]});
  }
  return s;
}

bool is_worst_case_schedule(const Schedule& s, std::string* why) {
  auto fail = [&](std::string msg) {
    if (why) *why = std::move(msg);
    return false;
  };
  if (s.l == 0 || s.n == 0) return fail("empty line or zero capacity");
  std::vector<std::size_t> done(s.l + 2, 0);
  for (std::size_t e = 0; e < s.events.size(); ++e) {
    const auto& ev = s.events[e];
    if (ev.link < 1 || ev.link > s.l) return fail("event " + std::to_string(e) + " names an unknown link");
    if (ev.seq != done[ev.link] + 1) return fail("event " + std::to_string(e) + " is out of sequence");
    if (!may_fire(done, ev.link, s.l, s.n))
      return fail("event " + std::to_string(e) + " breaks arrival/departure alternation at link " +
                  std::to_string(ev.link));
    ++done[ev.link];
  }
  for (std::size_t i = 1; i <= s.l; ++i)
    if (done[i] != s.n) return fail("link " + std::to_string(i) + " carries " + std::to_string(done[i]) + " packets");
  return true;
}

namespace {

using gf2::Word;

// Packets of one chunk held by a node, stored as chunk-local coefficient
// vectors (bit j refers to message index chunk_start + j) in a flat pool.
class ChunkBuffer {
 public:
  explicit ChunkBuffer(std::size_t words) : words_(words) {}

  std::size_t size() const { return count_; }
  const Word* packet(std::size_t i) const { return pool_.data() + i * words_; }

  void push(const Word* p) {
    pool_.insert(pool_.end(), p, p + words_);
    ++count_;
  }

  // out = uniformly random GF(2) combination of the held packets.
  void combine(Rng& rng, Word* out) const {
    std::fill(out, out + words_, Word{0});
    Word coeffs = 0;
    for (std::size_t i = 0; i < count_; ++i) {
      if (i % gf2::kWordBits == 0) coeffs = rng();
      if ((coeffs >> (i % gf2::kWordBits)) & 1U) {
        const Word* p = packet(i);
        for (std::size_t w = 0; w < words_; ++w) out[w] ^= p[w];
      }
    }
  }

 private:
  std::size_t words_;
  std::size_t count_ = 0;
  std::vector<Word> pool_;
};

gf2::BitVector to_global(const ChunkingScheme& s, std::size_t chunk, const Word* local, std::size_t words) {
  gf2::BitVector g(s.k());
  const std::size_t start = s.chunk_start(chunk);
  for (std::size_t w = 0; w < words; ++w) {
    Word x = local[w];
    while (x != 0) {
      const std::size_t j = w * gf2::kWordBits + static_cast<std::size_t>(std::countr_zero(x));
      g.set((start + j) % s.k());
      x &= x - 1;
    }
  }
  return g;
}

}  // namespace

std::vector<CodedPacket> transmit(const ChunkingScheme& scheme, const Schedule& sched, std::uint64_t seed,
                                  EmptyChunkPolicy policy, TransmitTrace* trace) {
  const std::size_t l = sched.l;
  const std::size_t q = scheme.q();
  const std::size_t alpha = scheme.alpha();
  const std::size_t words = gf2::words_for(alpha);
  const Word last_mask = alpha % gf2::kWordBits == 0 ? ~Word{0} : (Word{1} << (alpha % gf2::kWordBits)) - 1;

  std::vector<Rng> node_rng;
  node_rng.reserve(l);
  for (std::size_t i = 0; i < l; ++i) node_rng.emplace_back(derive_seed(seed, {0x70de, i}));

  // buffers[i][ω] for interior nodes i = 1..l-1; index 0 unused.
  std::vector<std::vector<ChunkBuffer>> buffers(l, std::vector<ChunkBuffer>(q, ChunkBuffer(words)));
  // Chunks node i holds at least one packet for, for the Resample policy.
  std::vector<std::vector<std::size_t>> held(l);

  if (trace) trace->links.assign(l, {});
  std::vector<CodedPacket> out;
  out.reserve(sched.n);
  std::vector<Word> local(words);

  for (const auto& ev : sched.events) {
    const std::size_t sender = ev.link - 1;
    Rng& rng = node_rng[sender];
    std::size_t chunk = uniform_below(rng, q);
    if (sender == 0) {
      for (std::size_t w = 0; w < words; ++w) local[w] = rng();
      local[words - 1] &= last_mask;
    } else {
      if (buffers[sender][chunk].size() == 0 && policy == EmptyChunkPolicy::Resample && !held[sender].empty())
        chunk = held[sender][uniform_below(rng, held[sender].size())];
      buffers[sender][chunk].combine(rng, local.data());
    }

    const std::size_t receiver = ev.link;
    if (receiver < l) {
      auto& buf = buffers[receiver][chunk];
      if (buf.size() == 0) held[receiver].push_back(chunk);
      buf.push(local.data());
    }
    if (trace) trace->links[ev.link - 1].push_back({chunk, to_global(scheme, chunk, local.data(), words)});
    if (receiver == l) out.push_back({chunk, to_global(scheme, chunk, local.data(), words)});
  }
  return out;
}

}  // namespace occsim
