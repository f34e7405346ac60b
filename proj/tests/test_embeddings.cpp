#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "recall/embeddings.hpp"
#include "recall/rng.hpp"

using namespace recall;

TEST_CASE("sphere table rows are unit and seeded-deterministic") {
  EmbeddingTable one = sample_sphere_table(1, 3, 0);
  CHECK(norm2(one.row(0)) == doctest::Approx(1.0).epsilon(1e-12));

  EmbeddingTable tiny = sample_sphere_table(2, 1, 4);
  for (std::size_t i = 0; i < 2; ++i) {
    double v = tiny.vectors(i, 0);
    CHECK((v == doctest::Approx(1.0) || v == doctest::Approx(-1.0)));
  }

  EmbeddingTable a = sample_sphere_table(64, 16, 9);
  EmbeddingTable b = sample_sphere_table(64, 16, 9);
  CHECK(a.vectors == b.vectors);
  EmbeddingTable c = sample_sphere_table(64, 16, 10);
  CHECK(!(a.vectors == c.vectors));

  CHECK_THROWS_AS(sample_sphere_table(4, 0, 0), std::invalid_argument);
}

TEST_CASE("mean pairwise dot concentrates near zero") {
  const std::size_t n = 10000, d = 64;
  EmbeddingTable t = sample_sphere_table(n, d, 21);
  Rng rng(77);
  const int pairs = 10000;
  double mean = 0.0;
  for (int i = 0; i < pairs; ++i) {
    std::size_t a = rng.next_below(n);
    std::size_t b = rng.next_below(n);
    if (a == b) b = (b + 1) % n;
    mean += dot(t.row(a), t.row(b));
  }
  mean /= pairs;
  CHECK(std::abs(mean) < 4.0 / std::sqrt(static_cast<double>(pairs * d)));
}

TEST_CASE("sphere moment bound (Monte Carlo)") {
  const std::size_t d = 32;
  Rng rng(55);
  const int n = 100000;
  for (int p = 1; p <= 3; ++p) {
    double sum = 0.0, sum2 = 0.0;
    EmbeddingTable pairs = sample_sphere_table(2 * n, d, 1000 + p);
    for (int i = 0; i < n; ++i) {
      double dp = dot(pairs.row(2 * i), pairs.row(2 * i + 1));
      double v = std::pow(dp, 2 * p);
      sum += v;
      sum2 += v * v;
    }
    double mean = sum / n;
    double se = std::sqrt((sum2 / n - mean * mean) / n);
    double bound = std::pow(2.0 * p, p) * std::pow(static_cast<double>(d), -p);
    CHECK(mean <= bound + 3.0 * se);
  }
}

TEST_CASE("orthonormal table") {
  EmbeddingTable t = orthonormal_table(3);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      CHECK(t.vectors(i, j) == (i == j ? 1.0 : 0.0));
  for (std::size_t k = 0; k < 3; ++k) {
    Vector e(t.row(k).begin(), t.row(k).end());
    CHECK(decode_argmax(e, t) == k);
  }
}

TEST_CASE("argmax decoding with ties and candidates") {
  EmbeddingTable t = orthonormal_table(4);
  Vector zero(4, 0.0);
  CHECK(decode_argmax(zero, t) == 0);  // all scores equal: lowest index

  Vector blend(4, 0.0);
  blend[1] = 1.0;
  blend[2] = 0.9;
  CHECK(decode_argmax(blend, t) == 1);

  std::vector<std::size_t> cand{2, 3};
  CHECK(decode_argmax(blend, t, cand) == 2);
  CHECK_THROWS_AS(decode_argmax(blend, t, std::vector<std::size_t>{}),
                  std::invalid_argument);

  // invariant to positive rescaling
  EmbeddingTable sph = sample_sphere_table(32, 8, 5);
  Rng rng(6);
  for (int trial = 0; trial < 30; ++trial) {
    Vector out(8);
    for (double& v : out) v = rng.next_gaussian();
    std::size_t base = decode_argmax(out, sph);
    Vector scaled = out;
    for (double& v : scaled) v *= 37.5;
    CHECK(decode_argmax(scaled, sph) == base);
  }
}

TEST_CASE("table serialization round trip") {
  EmbeddingTable t = sample_sphere_table(17, 5, 99);
  auto path = std::filesystem::temp_directory_path() / "recall_emb_test.bin";
  save_table(t, path);
  EmbeddingTable back = load_table(path);
  CHECK(back.n_tokens == t.n_tokens);
  CHECK(back.dim == t.dim);
  CHECK(back.mode == t.mode);
  CHECK(back.seed == t.seed);
  CHECK(back.vectors == t.vectors);
  std::filesystem::remove(path);
}
