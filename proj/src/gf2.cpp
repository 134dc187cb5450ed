#include "occsim/gf2.hpp"

#include <algorithm>
#include <bit>
#include <numeric>

namespace occsim::gf2 {

namespace {

Word tail_mask(std::size_t len) {
  const std::size_t r = len % kWordBits;
  return r == 0 ? ~Word{0} : (Word{1} << r) - 1;
}

}  // namespace

BitVector BitVector::from_string(std::string_view bits) {
  BitVector v(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] == '1')
      v.set(i);
    else if (bits[i] != '0')
      throw std::invalid_argument("bit string may only contain '0' and '1'");
  }
  return v;
}

BitVector& BitVector::operator^=(const BitVector& other) {
  if (other.len_ != len_) throw std::invalid_argument("BitVector length mismatch in xor");
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] ^= other.words_[i];
  return *this;
}

void BitVector::xor_words(const BitVector& other, std::size_t first_word, std::size_t last_word) {
  last_word = std::min(last_word, words_.size());
  for (std::size_t i = first_word; i < last_word; ++i) words_[i] ^= other.words_[i];
}

bool BitVector::any() const {
  return std::any_of(words_.begin(), words_.end(), [](Word w) { return w != 0; });
}

std::size_t BitVector::count() const {
  std::size_t c = 0;
  for (Word w : words_) c += static_cast<std::size_t>(std::popcount(w));
  return c;
}

bool BitVector::dot(const BitVector& other) const { return dot_words(other, 0, words_.size()); }

bool BitVector::dot_words(const BitVector& other, std::size_t first_word, std::size_t last_word) const {
  last_word = std::min(last_word, words_.size());
  Word acc = 0;
  for (std::size_t i = first_word; i < last_word; ++i) acc ^= words_[i] & other.words_[i];
  return std::popcount(acc) & 1;
}

std::optional<std::size_t> BitVector::first_set() const {
  for (std::size_t i = 0; i < words_.size(); ++i)
    if (words_[i] != 0) return i * kWordBits + static_cast<std::size_t>(std::countr_zero(words_[i]));
  return std::nullopt;
}

std::optional<std::size_t> BitVector::last_set() const {
  for (std::size_t i = words_.size(); i-- > 0;)
    if (words_[i] != 0)
      return i * kWordBits + (kWordBits - 1) - static_cast<std::size_t>(std::countl_zero(words_[i]));
  return std::nullopt;
}

std::vector<std::size_t> BitVector::set_bits() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < words_.size(); ++i) {
    Word w = words_[i];
    while (w != 0) {
      out.push_back(i * kWordBits + static_cast<std::size_t>(std::countr_zero(w)));
      w &= w - 1;
    }
  }
  return out;
}

BitVector BitVector::rotated_left(std::size_t shift) const {
  BitVector out(len_);
  if (len_ == 0) return out;
  shift %= len_;
  for (std::size_t j : set_bits()) out.set((j + len_ - shift) % len_);
  return out;
}

BitVector BitVector::circular_slice(std::size_t start, std::size_t len) const {
  BitVector out(len);
  if (len_ == 0) return out;
  start %= len_;
  for (std::size_t j : set_bits()) {
    const std::size_t off = (j + len_ - start) % len_;
    if (off < len) out.set(off);
  }
  return out;
}

void BitVector::clear_padding() {
  if (!words_.empty()) words_.back() &= tail_mask(len_);
}

std::string BitVector::to_string() const {
  std::string s(len_, '0');
  for (std::size_t i = 0; i < len_; ++i)
    if (get(i)) s[i] = '1';
  return s;
}

BitMatrix::BitMatrix(std::size_t cols, std::vector<BitVector> rows) : cols_(cols), rows_(std::move(rows)) {
  for (const auto& r : rows_)
    if (r.size() != cols_) throw std::invalid_argument("BitMatrix row length differs from column count");
}

BitMatrix BitMatrix::identity(std::size_t n) {
  BitMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m.set(i, i);
  return m;
}

BitMatrix BitMatrix::from_strings(std::size_t cols, const std::vector<std::string>& rows) {
  std::vector<BitVector> data;
  data.reserve(rows.size());
  for (const auto& s : rows) data.push_back(BitVector::from_string(s));
  return BitMatrix(cols, std::move(data));
}

void BitMatrix::append_row(BitVector r) {
  if (r.size() != cols_) throw std::invalid_argument("appended row length differs from column count");
  rows_.push_back(std::move(r));
}

BitVector BitMatrix::multiply(const BitVector& v) const {
  if (v.size() != cols_) throw std::invalid_argument("vector length differs from column count");
  BitVector out(rows_.size());
  for (std::size_t i = 0; i < rows_.size(); ++i) out.set(i, rows_[i].dot(v));
  return out;
}

std::size_t rank(const BitMatrix& m) {
  std::vector<BitVector> rows = m.row_data();
  std::size_t r = 0;
  for (std::size_t c = 0; c < m.cols() && r < rows.size(); ++c) {
    std::size_t p = r;
    while (p < rows.size() && !rows[p].get(c)) ++p;
    if (p == rows.size()) continue;
    std::swap(rows[r], rows[p]);
    const std::size_t w0 = c / kWordBits;
    for (std::size_t i = r + 1; i < rows.size(); ++i)
      if (rows[i].get(c)) rows[i].xor_words(rows[r], w0, rows[r].word_count());
    ++r;
  }
  return r;
}

namespace {

// Null basis of a matrix in reduced row echelon form.
std::vector<BitVector> rref_null_basis(const std::vector<BitVector>& rows, const std::vector<std::size_t>& pivots,
                                       std::size_t cols) {
  std::vector<bool> is_pivot(cols, false);
  for (std::size_t p : pivots) is_pivot[p] = true;
  std::vector<BitVector> basis;
  for (std::size_t f = 0; f < cols; ++f) {
    if (is_pivot[f]) continue;
    BitVector v(cols);
    v.set(f);
    for (std::size_t i = 0; i < pivots.size(); ++i)
      if (rows[i].get(f)) v.set(pivots[i]);
    basis.push_back(std::move(v));
  }
  return basis;
}

}  // namespace

RrefResult rref(const BitMatrix& m) {
  std::vector<BitVector> rows = m.row_data();
  EliminationReport rep;
  std::size_t r = 0;
  for (std::size_t c = 0; c < m.cols() && r < rows.size(); ++c) {
    std::size_t p = r;
    while (p < rows.size() && !rows[p].get(c)) ++p;
    if (p == rows.size()) continue;
    std::swap(rows[r], rows[p]);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (i == r || !rows[i].get(c)) continue;
      rows[i] ^= rows[r];
      ++rep.row_op_count;
      rep.word_op_count += rows[r].word_count();
    }
    rep.pivot_cols.push_back(c);
    ++r;
  }
  rep.rank = r;
  rep.null_basis = rref_null_basis(rows, rep.pivot_cols, m.cols());
  return {BitMatrix(m.cols(), std::move(rows)), std::move(rep)};
}

std::vector<BitVector> null_space(const BitMatrix& m) { return rref(m).report.null_basis; }

namespace {

struct BandRow {
  BitVector bits;
  std::size_t lo = 0;  // columns below lo are zero
  std::size_t hi = 0;  // leading segment is [lo, hi)
  std::optional<std::size_t> tail_lo;  // tail segment [tail_lo, cols)
};

// Disjoint word ranges covering a row's segments from column `from` on.
struct WordRanges {
  std::size_t a0, a1, b0, b1;
};

WordRanges word_ranges(const BandRow& row, std::size_t from, std::size_t cols) {
  const std::size_t a0 = from / kWordBits;
  const std::size_t a1 = words_for(std::max(row.hi, from + 1));
  if (!row.tail_lo) return {a0, a1, 0, 0};
  const std::size_t b0 = *row.tail_lo / kWordBits;
  const std::size_t b1 = words_for(cols);
  if (b0 <= a1) return {a0, std::max(a1, b1), 0, 0};
  return {a0, a1, b0, b1};
}

// Tightest window (start, length) covering the set bits of v, on the circle
// when `circular` is set.
std::pair<std::size_t, std::size_t> covering_window(const BitVector& v, bool circular) {
  const auto bits = v.set_bits();
  const std::size_t n = v.size();
  if (!circular || bits.size() == 1) return {bits.front(), bits.back() - bits.front() + 1};
  std::size_t best_gap = bits.front() + n - bits.back();
  std::size_t start = bits.front();
  for (std::size_t i = 1; i < bits.size(); ++i) {
    const std::size_t gap = bits[i] - bits[i - 1];
    if (gap > best_gap) {
      best_gap = gap;
      start = bits[i];
    }
  }
  return {start, n - best_gap + 1};
}

bool fits_window(const BitVector& v, std::size_t start, std::size_t width, bool circular) {
  const std::size_t n = v.size();
  for (std::size_t j : v.set_bits()) {
    const std::size_t off = circular ? (j + n - start) % n : (j >= start ? j - start : n);
    if (off >= width) return false;
  }
  return true;
}

}  // namespace

EliminationReport banded_eliminate(const BitMatrix& m, std::size_t band_width, bool wraparound,
                                   std::span<const std::size_t> window_starts) {
  const std::size_t cols = m.cols();
  EliminationReport rep;
  if (!window_starts.empty() && window_starts.size() != m.rows())
    throw std::invalid_argument("window_starts must have one entry per row");
  if (cols == 0) return rep;
  if (band_width == 0) band_width = 1;
  const bool full_band = band_width >= cols;
  const bool circular = wraparound && !full_band;

  // Resolve each nonzero row's window.
  struct Placed {
    std::size_t row;
    std::size_t start;
  };
  std::vector<Placed> placed;
  placed.reserve(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const BitVector& v = m.row(i);
    if (v.none()) continue;
    std::size_t start = 0;
    if (full_band) {
      start = 0;
    } else if (!window_starts.empty()) {
      start = window_starts[i] % cols;
      if (!fits_window(v, start, band_width, circular))
        throw BandViolation("row " + std::to_string(i) + " has a nonzero entry outside its window");
    } else {
      const auto [s, len] = covering_window(v, circular);
      if (len > band_width)
        throw BandViolation("row " + std::to_string(i) + " spans " + std::to_string(len) +
                            " columns, more than the band width " + std::to_string(band_width));
      start = s;
      if (!circular && start + band_width > cols) start = cols - band_width;
    }
    placed.push_back({i, start});
  }

  // Rotate columns so that as few windows as possible cross the seam.
  std::size_t shift = 0;
  if (circular) {
    auto crossings = [&](std::size_t r) {
      std::size_t n = 0;
      for (const auto& p : placed) {
        const std::size_t off = (r + cols - p.start) % cols;
        if (off > 0 && off < band_width) ++n;
      }
      return n;
    };
    std::vector<std::size_t> candidates{0};
    for (const auto& p : placed) candidates.push_back(p.start);
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    std::size_t best = crossings(0);
    for (std::size_t r : candidates) {
      if (best == 0) break;
      const std::size_t c = crossings(r);
      if (c < best) {
        best = c;
        shift = r;
      }
    }
  }

  std::vector<BandRow> rows;
  rows.reserve(placed.size());
  for (const auto& p : placed) {
    BandRow br;
    br.bits = shift == 0 ? m.row(p.row) : m.row(p.row).rotated_left(shift);
    const std::size_t s = (p.start + cols - shift) % cols;
    if (full_band) {
      br.lo = 0;
      br.hi = cols;
    } else if (s + band_width <= cols || !circular) {
      br.lo = s;
      br.hi = std::min(s + band_width, cols);
    } else {
      br.lo = 0;
      br.hi = s + band_width - cols;
      br.tail_lo = s;
    }
    rows.push_back(std::move(br));
  }
  std::stable_sort(rows.begin(), rows.end(), [](const BandRow& a, const BandRow& b) { return a.lo < b.lo; });

  std::vector<std::size_t> active;
  std::vector<std::size_t> candidates;
  std::vector<std::size_t> pivot_rows;  // indices into rows, in pivot order
  std::vector<std::size_t> pivot_cols;  // rotated columns
  std::size_t next = 0;

  for (std::size_t c = 0; c < cols; ++c) {
    while (next < rows.size() && rows[next].lo <= c) active.push_back(next++);

    candidates.clear();
    std::size_t kept = 0;
    for (std::size_t idx : active) {
      const BandRow& r = rows[idx];
      if (r.hi <= c && !r.tail_lo) continue;  // fully eliminated
      active[kept++] = idx;
      if (r.bits.get(c)) candidates.push_back(idx);
    }
    active.resize(kept);
    if (candidates.empty()) continue;

    auto key = [&](std::size_t idx) { return std::pair{rows[idx].tail_lo.has_value(), rows[idx].hi}; };
    const std::size_t piv = *std::min_element(candidates.begin(), candidates.end(),
                                              [&](std::size_t a, std::size_t b) { return key(a) < key(b); });
    const BandRow& pr = rows[piv];
    const WordRanges wr = word_ranges(pr, c, cols);
    for (std::size_t idx : candidates) {
      if (idx == piv) continue;
      BandRow& t = rows[idx];
      t.bits.xor_words(pr.bits, wr.a0, wr.a1);
      t.bits.xor_words(pr.bits, wr.b0, wr.b1);
      t.hi = std::max(t.hi, pr.hi);
      if (pr.tail_lo) t.tail_lo = t.tail_lo ? std::min(*t.tail_lo, *pr.tail_lo) : *pr.tail_lo;
      ++rep.row_op_count;
      rep.word_op_count += (wr.a1 - wr.a0) + (wr.b1 - wr.b0);
    }
    pivot_rows.push_back(piv);
    pivot_cols.push_back(c);
    active.erase(std::find(active.begin(), active.end(), piv));
  }

  rep.rank = pivot_rows.size();

  // Back substitution, one null vector per free column.
  std::vector<bool> is_pivot(cols, false);
  for (std::size_t c : pivot_cols) is_pivot[c] = true;
  for (std::size_t f = 0; f < cols; ++f) {
    if (is_pivot[f]) continue;
    BitVector v(cols);
    v.set(f);
    for (std::size_t i = pivot_rows.size(); i-- > 0;) {
      const BandRow& r = rows[pivot_rows[i]];
      const WordRanges wr = word_ranges(r, pivot_cols[i], cols);
      const bool bit = r.bits.dot_words(v, wr.a0, wr.a1) ^ r.bits.dot_words(v, wr.b0, wr.b1);
      if (bit) v.set(pivot_cols[i]);
    }
    rep.null_basis.push_back(shift == 0 ? std::move(v) : v.rotated_left(cols - shift));
  }

  for (std::size_t c : pivot_cols) rep.pivot_cols.push_back((c + shift) % cols);
  std::sort(rep.pivot_cols.begin(), rep.pivot_cols.end());
  return rep;
}

std::vector<std::size_t> determined_coordinates(std::size_t cols, const std::vector<BitVector>& null_basis) {
  BitVector free_mask(cols);
  for (const auto& v : null_basis) {
    auto dst = free_mask.mutable_words();
    auto src = v.words();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] |= src[i];
  }
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < cols; ++j)
    if (!free_mask.get(j)) out.push_back(j);
  return out;
}

BitVector random_bit_vector(std::size_t len, std::size_t start, std::size_t width, Rng& rng) {
  BitVector v(len);
  if (len == 0 || width == 0) return v;
  if (width >= len) {
    for (Word& w : v.mutable_words()) w = rng();
    v.clear_padding();
    return v;
  }
  start %= len;
  // Draw the window as a contiguous run of bits, then place it.
  std::size_t j = 0;
  while (j < width) {
    Word w = rng();
    const std::size_t take = std::min(kWordBits, width - j);
    for (std::size_t b = 0; b < take; ++b, ++j)
      if ((w >> b) & 1U) v.set((start + j) % len);
  }
  return v;
}

BitVector random_bit_vector(std::size_t len, Rng& rng) { return random_bit_vector(len, 0, len, rng); }

}  // namespace occsim::gf2
