#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "occsim/rng.hpp"

namespace occsim::gf2 {

using Word = std::uint64_t;
inline constexpr std::size_t kWordBits = 64;

inline constexpr std::size_t words_for(std::size_t bits) { return (bits + kWordBits - 1) / kWordBits; }

/// Fixed-length vector over GF(2), packed 64 bits per word. Bits past size()
/// are always zero so word-wise equality and popcount are exact.
class BitVector {
 public:
  BitVector() = default;
  explicit BitVector(std::size_t len) : len_(len), words_(words_for(len), 0) {}

  /// Parses a string of '0'/'1' characters, index 0 first.
  static BitVector from_string(std::string_view bits);

  std::size_t size() const { return len_; }
  std::size_t word_count() const { return words_.size(); }

  bool get(std::size_t i) const { return (words_[i / kWordBits] >> (i % kWordBits)) & 1U; }
  void set(std::size_t i, bool v = true) {
    const Word mask = Word{1} << (i % kWordBits);
    if (v)
      words_[i / kWordBits] |= mask;
    else
      words_[i / kWordBits] &= ~mask;
  }
  void flip(std::size_t i) { words_[i / kWordBits] ^= Word{1} << (i % kWordBits); }

  BitVector& operator^=(const BitVector& other);
  friend BitVector operator^(BitVector a, const BitVector& b) { return a ^= b; }

  /// XORs only words [first_word, last_word) of `other` into this vector.
  void xor_words(const BitVector& other, std::size_t first_word, std::size_t last_word);

  bool any() const;
  bool none() const { return !any(); }
  std::size_t count() const;
  /// Inner product over GF(2).
  bool dot(const BitVector& other) const;
  /// Inner product restricted to words [first_word, last_word).
  bool dot_words(const BitVector& other, std::size_t first_word, std::size_t last_word) const;

  std::optional<std::size_t> first_set() const;
  std::optional<std::size_t> last_set() const;
  std::vector<std::size_t> set_bits() const;

  /// Bit i of the result is bit (i + shift) mod size() of this vector.
  BitVector rotated_left(std::size_t shift) const;
  /// Bits [start, start + len) taken end-around.
  BitVector circular_slice(std::size_t start, std::size_t len) const;

  std::span<const Word> words() const { return words_; }
  /// Raw word access. Callers that write here must keep padding bits zero.
  std::span<Word> mutable_words() { return words_; }
  void clear_padding();

  std::string to_string() const;

  friend bool operator==(const BitVector&, const BitVector&) = default;

 private:
  std::size_t len_ = 0;
  std::vector<Word> words_;
};

/// Dense row-major GF(2) matrix; each row is a BitVector of length cols().
class BitMatrix {
 public:
  BitMatrix() = default;
  BitMatrix(std::size_t rows, std::size_t cols) : cols_(cols), rows_(rows, BitVector(cols)) {}
  /// Throws std::invalid_argument if any row length differs from `cols`.
  BitMatrix(std::size_t cols, std::vector<BitVector> rows);

  static BitMatrix identity(std::size_t n);
  /// One string per row, see BitVector::from_string.
  static BitMatrix from_strings(std::size_t cols, const std::vector<std::string>& rows);

  std::size_t rows() const { return rows_.size(); }
  std::size_t cols() const { return cols_; }
  bool empty() const { return rows_.empty() || cols_ == 0; }

  const BitVector& row(std::size_t i) const { return rows_[i]; }
  BitVector& row(std::size_t i) { return rows_[i]; }
  const std::vector<BitVector>& row_data() const { return rows_; }

  bool get(std::size_t i, std::size_t j) const { return rows_[i].get(j); }
  void set(std::size_t i, std::size_t j, bool v = true) { rows_[i].set(j, v); }

  void append_row(BitVector r);

  /// Matrix-vector product M·v.
  BitVector multiply(const BitVector& v) const;

  friend bool operator==(const BitMatrix&, const BitMatrix&) = default;

 private:
  std::size_t cols_ = 0;
  std::vector<BitVector> rows_;
};

struct EliminationReport {
  std::size_t rank = 0;
  /// Pivot columns in increasing order.
  std::vector<std::size_t> pivot_cols;
  /// Number of row-xor operations performed.
  std::uint64_t row_op_count = 0;
  /// Number of 64-bit words touched by those row xors.
  std::uint64_t word_op_count = 0;
  /// Basis of {v : M v = 0}; cols - rank vectors of length cols.
  std::vector<BitVector> null_basis;
};

struct RrefResult {
  BitMatrix matrix;
  EliminationReport report;
};

class BandViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

std::size_t rank(const BitMatrix& m);

/// Gauss-Jordan elimination. Nonzero rows of the result come first, ordered
/// by pivot column; zero rows follow. The null basis has one vector per free
/// column f, with bit f set and all other free bits clear.
RrefResult rref(const BitMatrix& m);

std::vector<BitVector> null_space(const BitMatrix& m);

/// Elimination for matrices whose rows are supported on a window of
/// `band_width` contiguous columns. With `wraparound` the windows are read on
/// the column circle. When `window_starts` is empty each row's window is
/// inferred as the tightest window covering its support; otherwise it must
/// have one entry per row and every row must fit its declared window.
/// Rows need not be sorted; they are ordered by window start internally.
///
/// Each pivot is the candidate whose band ends first, so a row xor only
/// touches the words of the pivot's band. Rows that cross the column seam are
/// tracked as a leading segment plus a tail segment and are pivoted last.
///
/// Throws BandViolation when a row does not fit its window.
EliminationReport banded_eliminate(const BitMatrix& m, std::size_t band_width, bool wraparound,
                                   std::span<const std::size_t> window_starts = {});

/// Coordinates j with v_j = 0 for every v in the null basis, i.e. the
/// unknowns pinned to a unique value by the system.
std::vector<std::size_t> determined_coordinates(std::size_t cols, const std::vector<BitVector>& null_basis);

/// Uniform random bits inside the window of `width` columns starting at
/// `start` (wrapping past len), zero elsewhere. width >= len means the whole
/// vector.
BitVector random_bit_vector(std::size_t len, std::size_t start, std::size_t width, Rng& rng);
BitVector random_bit_vector(std::size_t len, Rng& rng);

}  // namespace occsim::gf2
