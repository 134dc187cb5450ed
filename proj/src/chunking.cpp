#include "occsim/chunking.hpp"

#include <algorithm>
#include <string>

namespace occsim {

ChunkingScheme ChunkingScheme::make(std::size_t k, std::size_t alpha, std::size_t tau) {
  if (k == 0 || alpha == 0 || tau == 0) throw InvalidParameter("k, alpha and tau must be positive");
  if (alpha > k) throw DivisibilityError("alpha (" + std::to_string(alpha) + ") exceeds k (" + std::to_string(k) + ")");
  if (alpha % tau != 0)
    throw DivisibilityError("tau (" + std::to_string(tau) + ") does not divide alpha (" + std::to_string(alpha) + ")");
  ChunkingScheme s;
  s.k_ = k;
  s.alpha_ = alpha;
  s.tau_ = tau;
  s.gamma_ = alpha * (tau - 1) / tau;
  const std::size_t stride = alpha - s.gamma_;
  if (k % stride != 0) {
    if (tau == 1)
      throw DivisibilityError("alpha (" + std::to_string(alpha) + ") does not divide k (" + std::to_string(k) + ")");
    throw DivisibilityError("alpha - gamma (" + std::to_string(stride) + ") does not divide k (" + std::to_string(k) +
                            ")");
  }
  s.q_ = k / stride;
  return s;
}

std::size_t ChunkingScheme::chunk_start(std::size_t omega) const {
  if (omega >= q_)
    throw IndexOutOfRange("chunk " + std::to_string(omega) + " out of range [0, " + std::to_string(q_) + ")");
  return omega * stride();
}

std::vector<std::size_t> ChunkingScheme::chunk_indices(std::size_t omega) const {
  const std::size_t s = chunk_start(omega);
  std::vector<std::size_t> out(alpha_);
  for (std::size_t j = 0; j < alpha_; ++j) out[j] = (s + j) % k_;
  return out;
}

std::size_t ChunkingScheme::hyperchunk_size(std::size_t chi) const {
  return std::min(k_, chi * stride() + gamma_);
}

std::vector<Hyperchunk> ChunkingScheme::hyperchunks(std::size_t chi) const {
  if (chi == 0) throw InvalidParameter("hyperchunk size chi must be at least 1");
  const std::size_t size = hyperchunk_size(chi);
  std::vector<Hyperchunk> out;
  out.reserve(q_);
  for (std::size_t i = 0; i < q_; ++i) {
    Hyperchunk h;
    h.start_chunk = i;
    h.chi = chi;
    h.first_index = chunk_start(i);
    h.message_indices.resize(size);
    for (std::size_t j = 0; j < size; ++j) h.message_indices[j] = (h.first_index + j) % k_;
    out.push_back(std::move(h));
  }
  return out;
}

std::vector<Block> ChunkingScheme::blocks() const {
  const std::size_t b = stride();
  std::vector<Block> out(block_count());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].index = i;
    out[i].message_indices.resize(b);
    for (std::size_t j = 0; j < b; ++j) out[i].message_indices[j] = i * b + j;
  }
  return out;
}

}  // namespace occsim
