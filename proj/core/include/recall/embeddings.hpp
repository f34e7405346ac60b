#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>

#include "recall/matrix.hpp"
#include "recall/rng.hpp"

namespace recall {

enum class EmbeddingMode : std::uint64_t { kSphere = 0, kOrthonormal = 1 };

// Frozen token embedding/unembedding substrate. Rows are unit vectors; no
// module ever trains these.
struct EmbeddingTable {
  std::size_t n_tokens = 0;
  std::size_t dim = 0;
  EmbeddingMode mode = EmbeddingMode::kSphere;
  std::uint64_t seed = 0;
  Matrix vectors;  // n_tokens x dim

  std::span<const double> row(std::size_t token) const { return vectors.row_span(token); }
};

// Rows i.i.d. uniform on the unit sphere (Gaussian draws, normalized).
EmbeddingTable sample_sphere_table(std::size_t n, std::size_t d, std::uint64_t seed);

// Standard basis rows; dim = n.
EmbeddingTable orthonormal_table(std::size_t n);

// argmax_y <u_y, output>; ties broken toward the lowest token index.
std::size_t decode_argmax(std::span<const double> output, const EmbeddingTable& unembed);
std::size_t decode_argmax(std::span<const double> output, const EmbeddingTable& unembed,
                          std::span<const std::size_t> candidates);

// Flat binary file: u64 header (n, d, mode, seed) then row-major doubles,
// little-endian.
void save_table(const EmbeddingTable& table, const std::filesystem::path& path);
EmbeddingTable load_table(const std::filesystem::path& path);

}  // namespace recall
