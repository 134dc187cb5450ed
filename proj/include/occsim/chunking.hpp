#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace occsim {

class DivisibilityError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class IndexOutOfRange : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

class InvalidParameter : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// χ consecutive chunks taken end-around.
struct Hyperchunk {
  std::size_t start_chunk = 0;
  std::size_t chi = 0;
  /// First message index of the hyperchunk; the set is the contiguous arc
  /// [first_index, first_index + size) mod k.
  std::size_t first_index = 0;
  std::vector<std::size_t> message_indices;
};

/// α/τ contiguous message indices. Blocks partition [0, k).
struct Block {
  std::size_t index = 0;
  std::vector<std::size_t> message_indices;
};

/// Chunk geometry for chunked codes (tau = 1) and overlapped chunked codes
/// (tau >= 2). Chunk ω covers the α indices starting at ω(α-γ), end-around,
/// with γ = α(τ-1)/τ and q = kτ/α chunks.
class ChunkingScheme {
 public:
  /// Throws InvalidParameter for zero arguments and DivisibilityError when
  /// τ∤α, (α-γ)∤k or α > k.
  static ChunkingScheme make(std::size_t k, std::size_t alpha, std::size_t tau);

  std::size_t k() const { return k_; }
  std::size_t alpha() const { return alpha_; }
  std::size_t tau() const { return tau_; }
  std::size_t gamma() const { return gamma_; }
  std::size_t q() const { return q_; }
  /// α - γ, the offset between consecutive chunk starts; also the block size.
  std::size_t stride() const { return alpha_ - gamma_; }
  bool overlapped() const { return tau_ >= 2; }

  std::size_t chunk_start(std::size_t omega) const;
  std::vector<std::size_t> chunk_indices(std::size_t omega) const;

  /// Number of distinct message indices in chi consecutive chunks, capped at k.
  std::size_t hyperchunk_size(std::size_t chi) const;
  std::vector<Hyperchunk> hyperchunks(std::size_t chi) const;

  std::size_t block_count() const { return k_ / stride(); }
  std::vector<Block> blocks() const;

  friend bool operator==(const ChunkingScheme&, const ChunkingScheme&) = default;

 private:
  ChunkingScheme() = default;

  std::size_t k_ = 0;
  std::size_t alpha_ = 0;
  std::size_t tau_ = 1;
  std::size_t gamma_ = 0;
  std::size_t q_ = 0;
};

}  // namespace occsim
