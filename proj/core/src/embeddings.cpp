#include "recall/embeddings.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "recall/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "table serialization assumes a little-endian host");

namespace recall {

EmbeddingTable sample_sphere_table(std::size_t n, std::size_t d, std::uint64_t seed) {
  if (n == 0 || d == 0)
    throw std::invalid_argument("sample_sphere_table: n and d must be >= 1");
  EmbeddingTable t;
  t.n_tokens = n;
  t.dim = d;
  t.mode = EmbeddingMode::kSphere;
  t.seed = seed;
  t.vectors = Matrix(n, d);
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    double* row = t.vectors.row(i);
    double nrm2 = 0.0;
    do {
      nrm2 = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        row[j] = rng.next_gaussian();
        nrm2 += row[j] * row[j];
      }
    } while (nrm2 == 0.0);
    double inv = 1.0 / std::sqrt(nrm2);
    for (std::size_t j = 0; j < d; ++j) row[j] *= inv;
  }
  return t;
}

EmbeddingTable orthonormal_table(std::size_t n) {
  EmbeddingTable t;
  t.n_tokens = n;
  t.dim = n;
  t.mode = EmbeddingMode::kOrthonormal;
  t.seed = 0;
  t.vectors = Matrix(n, n);
  for (std::size_t i = 0; i < n; ++i) t.vectors(i, i) = 1.0;
  return t;
}

std::size_t decode_argmax(std::span<const double> output, const EmbeddingTable& unembed) {
  if (output.size() != unembed.dim)
    throw std::invalid_argument("decode_argmax: output dim mismatch");
  std::size_t best = 0;
  double best_score = dot(unembed.row(0), output);
  for (std::size_t y = 1; y < unembed.n_tokens; ++y) {
    double s = dot(unembed.row(y), output);
    if (s > best_score) {
      best_score = s;
      best = y;
    }
  }
  return best;
}

std::size_t decode_argmax(std::span<const double> output, const EmbeddingTable& unembed,
                          std::span<const std::size_t> candidates) {
  if (candidates.empty())
    throw std::invalid_argument("decode_argmax: empty candidate set");
  if (output.size() != unembed.dim)
    throw std::invalid_argument("decode_argmax: output dim mismatch");
  std::size_t best = candidates[0];
  double best_score = dot(unembed.row(best), output);
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    std::size_t y = candidates[i];
    double s = dot(unembed.row(y), output);
    if (s > best_score || (s == best_score && y < best)) {
      best_score = s;
      best = y;
    }
  }
  return best;
}

void save_table(const EmbeddingTable& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("save_table: cannot open " + path.string());
  std::uint64_t header[4] = {table.n_tokens, table.dim,
                             static_cast<std::uint64_t>(table.mode), table.seed};
  out.write(reinterpret_cast<const char*>(header), sizeof(header));
  out.write(reinterpret_cast<const char*>(table.vectors.data()),
            static_cast<std::streamsize>(table.vectors.size() * sizeof(double)));
  if (!out) throw std::runtime_error("save_table: write failed for " + path.string());
}

EmbeddingTable load_table(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_table: cannot open " + path.string());
  std::uint64_t header[4];
  in.read(reinterpret_cast<char*>(header), sizeof(header));
  if (!in) throw std::runtime_error("load_table: truncated header");
  EmbeddingTable t;
  t.n_tokens = header[0];
  t.dim = header[1];
  t.mode = static_cast<EmbeddingMode>(header[2]);
  t.seed = header[3];
  t.vectors = Matrix(t.n_tokens, t.dim);
  in.read(reinterpret_cast<char*>(t.vectors.data()),
          static_cast<std::streamsize>(t.vectors.size() * sizeof(double)));
  if (!in) throw std::runtime_error("load_table: truncated payload");
  if (!t.vectors.all_finite()) throw NumericError("load_table: non-finite entries");
  return t;
}

}  // namespace recall
