#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "recall/matrix.hpp"
#include "recall/rng.hpp"

namespace recall {

// How a*(s, r) is drawn inside relation r's answer block.
enum class AnswerAssignment {
  kUniform,   // uniform over the block (the default generation recipe)
  kBalanced,  // each block answer used by exactly S/D subjects (requires D | S)
  kDistinct,  // a*(s, r) = s-th block answer (requires D = S)
};

// Vocabulary layout: subjects | relations | answers (R blocks of D) | noise |
// EOS. All sections are disjoint by construction; answer sets per relation
// are the disjoint blocks.
struct FactDictionary {
  std::size_t S = 0, R = 0, D = 0;
  std::size_t n_noise = 0;
  std::uint64_t seed = 0;
  AnswerAssignment assignment = AnswerAssignment::kUniform;
  std::vector<std::size_t> answer;  // S*R token ids

  std::size_t n_answers() const { return R * D; }
  std::size_t vocab_size() const { return S + R + n_answers() + n_noise + 1; }
  std::size_t subject_token(std::size_t s) const { return s; }
  std::size_t relation_token(std::size_t r) const { return S + r; }
  std::size_t answer_begin() const { return S + R; }
  std::size_t noise_begin() const { return S + R + n_answers(); }
  std::size_t eos_token() const { return vocab_size() - 1; }

  std::size_t astar(std::size_t s, std::size_t r) const { return answer[s * R + r]; }
  // 0-based index of a*(s,r) within the answer section.
  std::size_t astar_index(std::size_t s, std::size_t r) const {
    return astar(s, r) - answer_begin();
  }

  bool is_subject(std::size_t tok) const { return tok < S; }
  bool is_relation(std::size_t tok) const { return tok >= S && tok < S + R; }
  bool is_answer(std::size_t tok) const {
    return tok >= answer_begin() && tok < noise_begin();
  }
  bool is_noise(std::size_t tok) const {
    return tok >= noise_begin() && tok < eos_token();
  }

  // Distinct answer tokens attained by relation r / subject s.
  std::vector<std::size_t> answers_of_relation(std::size_t r) const;
  std::vector<std::size_t> answers_of_subject(std::size_t s) const;

  // Per-relation disjointness plus layout consistency; throws
  // std::invalid_argument describing the first violation.
  void validate() const;
};

FactDictionary gen_dictionary(std::size_t S, std::size_t R, std::size_t D,
                              std::uint64_t seed,
                              AnswerAssignment assignment = AnswerAssignment::kUniform,
                              std::optional<std::size_t> n_noise = std::nullopt);

struct Sequence {
  std::vector<std::size_t> tokens;  // length T+1; tokens[T-1] = EOS, tokens[T] = answer
  std::size_t subject_pos = 0;      // 0-based, < T-1
  std::size_t relation_pos = 0;
  std::size_t s = 0, r = 0;
};

// Distribution over (s, r): uniform or tabulated.
class SrDistribution {
 public:
  static SrDistribution uniform(std::size_t S, std::size_t R);
  static SrDistribution tabulated(std::size_t S, std::size_t R, Vector probs);

  double prob(std::size_t s, std::size_t r) const;
  std::pair<std::size_t, std::size_t> sample(Rng& rng) const;
  std::size_t S() const { return s_; }
  std::size_t R() const { return r_; }

 private:
  std::size_t s_ = 0, r_ = 0;
  bool uniform_ = true;
  Vector probs_;    // s * R + r
  Vector cumprob_;  // for sampling
};

Sequence sample_sequence(const FactDictionary& dict, std::size_t T,
                         const SrDistribution& p_sr, Rng& rng);

bool validate_sequence(const FactDictionary& dict, const Sequence& seq, std::size_t T);

// p*(. | r) over the answer section (length R*D), supported on relation r's
// attained answers.
Vector relation_conditional(const FactDictionary& dict, const SrDistribution& p_sr,
                            std::size_t r);
// p*(. | s), same indexing.
Vector subject_conditional(const FactDictionary& dict, const SrDistribution& p_sr,
                           std::size_t s);

// Plain-text format: header "S R D n_noise seed", then one "s r a" line per fact.
void save_dictionary(const FactDictionary& dict, const std::filesystem::path& path);
FactDictionary load_dictionary(const std::filesystem::path& path);

}  // namespace recall
