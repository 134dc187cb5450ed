#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include "occsim/netsim.hpp"

using namespace occsim;

namespace {

bool in_row_space(const std::vector<gf2::BitVector>& rows, const gf2::BitVector& v, std::size_t cols) {
  gf2::BitMatrix m(cols, rows);
  const auto before = gf2::rank(m);
  m.append_row(v);
  return gf2::rank(m) == before;
}

bool gev_inside_chunk(const ChunkingScheme& s, const CodedPacket& p) {
  const auto idx = s.chunk_indices(p.chunk);
  const std::set<std::size_t> allowed(idx.begin(), idx.end());
  for (auto j : p.gev.set_bits())
    if (!allowed.count(j)) return false;
  return true;
}

}  // namespace

TEST(Schedule, SingleLink) {
  const auto s = build_worst_case_schedule(1, 3, 0);
  EXPECT_EQ(s.events, (std::vector<ScheduleEvent>{{1, 1}, {1, 2}, {1, 3}}));
}

TEST(Schedule, FourLinksTwoRounds) {
  const auto s = build_worst_case_schedule(4, 2, 0);
  ASSERT_EQ(s.events.size(), 8U);
  for (std::size_t e = 0; e < 8; ++e) EXPECT_EQ(s.events[e], (ScheduleEvent{e % 4 + 1, e / 4 + 1}));
  EXPECT_TRUE(is_worst_case_schedule(s));
}

TEST(Schedule, CheckerAcceptsGeneratedSchedules) {
  std::mt19937 g(1);
  for (int t = 0; t < 100; ++t) {
    const std::size_t l = 1 + g() % 8, n = 1 + g() % 40;
    for (auto mode : {ScheduleMode::Canonical, ScheduleMode::RandomizedInterleave}) {
      const auto s = build_worst_case_schedule(l, n, g(), mode);
      std::string why;
      EXPECT_TRUE(is_worst_case_schedule(s, &why)) << "l=" << l << " n=" << n << ": " << why;
      EXPECT_EQ(s.events.size(), l * n);
    }
  }
}

TEST(Schedule, RandomizedInterleaveDiffersFromCanonical) {
  const auto a = build_worst_case_schedule(4, 20, 1, ScheduleMode::Canonical);
  const auto b = build_worst_case_schedule(4, 20, 1, ScheduleMode::RandomizedInterleave);
  EXPECT_NE(a.events, b.events);
}

TEST(Schedule, CheckerRejectsViolations) {
  // Node 1 receives twice without forwarding in between.
  Schedule s{2, 2, {{1, 1}, {1, 2}, {2, 1}, {2, 2}}};
  std::string why;
  EXPECT_FALSE(is_worst_case_schedule(s, &why));
  EXPECT_FALSE(why.empty());
  // Departure before the matching arrival.
  EXPECT_FALSE(is_worst_case_schedule({2, 1, {{2, 1}, {1, 1}}}));
  // Too few packets on the last link.
  EXPECT_FALSE(is_worst_case_schedule({2, 2, {{1, 1}, {2, 1}, {1, 2}}}));
  EXPECT_THROW(build_worst_case_schedule(0, 3, 0), std::invalid_argument);
}

TEST(Transmit, SinkReceivesNPacketsInsideTheirChunks) {
  const auto s = ChunkingScheme::make(64, 16, 2);
  const auto sched = build_worst_case_schedule(4, 100, 0);
  const auto pk = transmit(s, sched, 7);
  ASSERT_EQ(pk.size(), 100U);
  gf2::BitMatrix m(64, std::vector<gf2::BitVector>{});
  for (const auto& p : pk) {
    EXPECT_TRUE(gev_inside_chunk(s, p));
    m.append_row(p.gev);
  }
  EXPECT_LE(gf2::rank(m), 64U);
}

TEST(Transmit, RelayOutputsLieInSpanOfInputs) {
  const auto s = ChunkingScheme::make(24, 24, 1);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto sched = build_worst_case_schedule(4, 30, seed, ScheduleMode::RandomizedInterleave);
    TransmitTrace trace;
    transmit(s, sched, seed, EmptyChunkPolicy::ZeroPacket, &trace);
    ASSERT_EQ(trace.links.size(), 4U);
    // The j-th departure from node i follows exactly j arrivals.
    for (std::size_t link = 1; link < 4; ++link) {
      std::vector<gf2::BitVector> received;
      for (std::size_t j = 0; j < 30; ++j) {
        received.push_back(trace.links[link - 1][j].gev);
        EXPECT_TRUE(in_row_space(received, trace.links[link][j].gev, 24)) << "link " << link + 1 << " packet " << j;
      }
    }
  }
}

TEST(Transmit, ZeroPacketPolicySendsZeroForEmptyChunk) {
  const auto s = ChunkingScheme::make(64, 8, 1);  // q = 8
  const auto sched = build_worst_case_schedule(2, 50, 0);
  TransmitTrace trace;
  transmit(s, sched, 3, EmptyChunkPolicy::ZeroPacket, &trace);
  std::set<std::size_t> held;
  int zeros = 0;
  for (std::size_t j = 0; j < 50; ++j) {
    held.insert(trace.links[0][j].chunk);
    const auto& out = trace.links[1][j];
    if (!held.count(out.chunk)) {
      EXPECT_TRUE(out.gev.none());
      ++zeros;
    }
  }
  EXPECT_GT(zeros, 0);
}

TEST(Transmit, ResamplePolicySendsOnlyHeldChunks) {
  const auto s = ChunkingScheme::make(64, 8, 1);
  const auto sched = build_worst_case_schedule(2, 50, 0);
  TransmitTrace trace;
  transmit(s, sched, 3, EmptyChunkPolicy::Resample, &trace);
  std::set<std::size_t> held;
  for (std::size_t j = 0; j < 50; ++j) {
    held.insert(trace.links[0][j].chunk);
    EXPECT_TRUE(held.count(trace.links[1][j].chunk));
  }
}

TEST(Transmit, Deterministic) {
  const auto s = ChunkingScheme::make(64, 16, 4);
  const auto sched = build_worst_case_schedule(4, 80, 0);
  const auto a = transmit(s, sched, 99);
  const auto b = transmit(s, sched, 99);
  const auto c = transmit(s, sched, 100);
  ASSERT_EQ(a.size(), b.size());
  bool differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].chunk, b[i].chunk);
    EXPECT_EQ(a[i].gev, b[i].gev);
    differs |= a[i].chunk != c[i].chunk || !(a[i].gev == c[i].gev);
  }
  EXPECT_TRUE(differs);
}

TEST(Transmit, SinkOutputIndependentOfInterleaving) {
  // A relay's j-th departure always sees exactly j arrivals, and every node
  // draws from its own stream, so all worst-case interleavings agree.
  const auto s = ChunkingScheme::make(64, 16, 2);
  const auto canonical = build_worst_case_schedule(4, 60, 0, ScheduleMode::Canonical);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto shuffled = build_worst_case_schedule(4, 60, seed, ScheduleMode::RandomizedInterleave);
    const auto a = transmit(s, canonical, 42);
    const auto b = transmit(s, shuffled, 42);
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_EQ(a[i].chunk, b[i].chunk);
      EXPECT_EQ(a[i].gev, b[i].gev);
    }
  }
}

TEST(Transmit, ChunkSelectionUniform) {
  const auto s = ChunkingScheme::make(64, 8, 1);
  constexpr std::size_t n = 100000;
  const auto pk = transmit(s, build_worst_case_schedule(1, n, 0), 5);
  std::vector<double> counts(s.q(), 0.0);
  for (const auto& p : pk) counts[p.chunk] += 1.0;
  const double p = 1.0 / static_cast<double>(s.q());
  const double sigma = std::sqrt(p * (1 - p) / n);
  for (double c : counts) EXPECT_NEAR(c / n, p, 3 * sigma);
}

TEST(Transmit, SingleDenseChunkMeetsClassicalBound) {
  constexpr std::size_t k = 16;
  const auto s = ChunkingScheme::make(k, k, 1);
  constexpr int trials = 4000;
  for (std::size_t n : {k + 2, k + 5}) {
    int fails = 0;
    const auto sched = build_worst_case_schedule(1, n, 0);
    for (int t = 0; t < trials; ++t) {
      gf2::BitMatrix m(k, std::vector<gf2::BitVector>{});
      for (const auto& p : transmit(s, sched, static_cast<std::uint64_t>(t))) m.append_row(p.gev);
      if (gf2::rank(m) < k) ++fails;
    }
    const double bound = std::ldexp(1.0, static_cast<int>(k) - static_cast<int>(n));
    EXPECT_LE(static_cast<double>(fails) / trials, bound + 3 * std::sqrt(bound * (1 - bound) / trials));
  }
}
