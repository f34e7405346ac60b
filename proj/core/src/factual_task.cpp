#include "recall/factual_task.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

namespace recall {

std::vector<std::size_t> FactDictionary::answers_of_relation(std::size_t r) const {
  std::set<std::size_t> out;
  for (std::size_t s = 0; s < S; ++s) out.insert(astar(s, r));
  return {out.begin(), out.end()};
}

std::vector<std::size_t> FactDictionary::answers_of_subject(std::size_t s) const {
  std::set<std::size_t> out;
  for (std::size_t r = 0; r < R; ++r) out.insert(astar(s, r));
  return {out.begin(), out.end()};
}

void FactDictionary::validate() const {
  if (S == 0 || R == 0 || D == 0)
    throw std::invalid_argument("dictionary: S, R, D must be >= 1");
  if (answer.size() != S * R)
    throw std::invalid_argument("dictionary: answer table size mismatch");
  for (std::size_t s = 0; s < S; ++s)
    for (std::size_t r = 0; r < R; ++r) {
      std::size_t a = astar(s, r);
      std::size_t block_lo = answer_begin() + r * D;
      if (a < block_lo || a >= block_lo + D)
        throw std::invalid_argument(
            "dictionary: a*(s,r) outside relation block (disjointness violated)");
    }
  for (std::size_t r = 0; r < R; ++r)
    if (answers_of_relation(r).size() > D)
      throw std::invalid_argument("dictionary: |A_r| exceeds D");
}

FactDictionary gen_dictionary(std::size_t S, std::size_t R, std::size_t D,
                              std::uint64_t seed, AnswerAssignment assignment,
                              std::optional<std::size_t> n_noise) {
  if (S == 0 || R == 0 || D == 0)
    throw std::invalid_argument("gen_dictionary: S, R, D must be >= 1");
  FactDictionary dict;
  dict.S = S;
  dict.R = R;
  dict.D = D;
  dict.n_noise = n_noise.value_or(S + R);
  dict.seed = seed;
  dict.assignment = assignment;
  dict.answer.resize(S * R);
  Rng rng(seed);
  const std::size_t base = dict.answer_begin();
  switch (assignment) {
    case AnswerAssignment::kUniform:
      for (std::size_t s = 0; s < S; ++s)
        for (std::size_t r = 0; r < R; ++r)
          dict.answer[s * R + r] = base + r * D + rng.next_below(D);
      break;
    case AnswerAssignment::kBalanced: {
      if (S % D != 0)
        throw std::invalid_argument("gen_dictionary: balanced assignment needs D | S");
      for (std::size_t r = 0; r < R; ++r) {
        std::vector<std::size_t> pool(S);
        for (std::size_t i = 0; i < S; ++i) pool[i] = i % D;
        for (std::size_t i = S; i > 1; --i)
          std::swap(pool[i - 1], pool[rng.next_below(i)]);
        for (std::size_t s = 0; s < S; ++s)
          dict.answer[s * R + r] = base + r * D + pool[s];
      }
      break;
    }
    case AnswerAssignment::kDistinct:
      if (D != S)
        throw std::invalid_argument("gen_dictionary: distinct assignment needs D = S");
      for (std::size_t s = 0; s < S; ++s)
        for (std::size_t r = 0; r < R; ++r)
          dict.answer[s * R + r] = base + r * D + s;
      break;
  }
  dict.validate();
  return dict;
}

SrDistribution SrDistribution::uniform(std::size_t S, std::size_t R) {
  SrDistribution d;
  d.s_ = S;
  d.r_ = R;
  d.uniform_ = true;
  return d;
}

SrDistribution SrDistribution::tabulated(std::size_t S, std::size_t R, Vector probs) {
  if (probs.size() != S * R)
    throw std::invalid_argument("SrDistribution: table size mismatch");
  double sum = std::accumulate(probs.begin(), probs.end(), 0.0);
  if (sum <= 0.0) throw std::invalid_argument("SrDistribution: zero mass");
  SrDistribution d;
  d.s_ = S;
  d.r_ = R;
  d.uniform_ = false;
  d.probs_ = std::move(probs);
  for (double& p : d.probs_) p /= sum;
  d.cumprob_.resize(d.probs_.size());
  std::partial_sum(d.probs_.begin(), d.probs_.end(), d.cumprob_.begin());
  return d;
}

double SrDistribution::prob(std::size_t s, std::size_t r) const {
  if (uniform_) return 1.0 / static_cast<double>(s_ * r_);
  return probs_[s * r_ + r];
}

std::pair<std::size_t, std::size_t> SrDistribution::sample(Rng& rng) const {
  if (uniform_) {
    std::size_t idx = rng.next_below(s_ * r_);
    return {idx / r_, idx % r_};
  }
  double u = rng.next_double();
  auto it = std::lower_bound(cumprob_.begin(), cumprob_.end(), u);
  std::size_t idx = std::min<std::size_t>(
      static_cast<std::size_t>(it - cumprob_.begin()), cumprob_.size() - 1);
  return {idx / r_, idx % r_};
}

Sequence sample_sequence(const FactDictionary& dict, std::size_t T,
                         const SrDistribution& p_sr, Rng& rng) {
  if (T < 3) throw std::invalid_argument("sample_sequence: T must be >= 3");
  Sequence seq;
  auto [s, r] = p_sr.sample(rng);
  seq.s = s;
  seq.r = r;
  seq.tokens.resize(T + 1);
  // ordered distinct pair (i, j) in [0, T-2]
  std::size_t i = rng.next_below(T - 1);
  std::size_t j = rng.next_below(T - 2);
  if (j >= i) ++j;
  seq.subject_pos = i;
  seq.relation_pos = j;
  for (std::size_t k = 0; k + 1 < T; ++k)
    seq.tokens[k] = dict.noise_begin() + rng.next_below(dict.n_noise);
  seq.tokens[i] = dict.subject_token(s);
  seq.tokens[j] = dict.relation_token(r);
  seq.tokens[T - 1] = dict.eos_token();
  seq.tokens[T] = dict.astar(s, r);
  return seq;
}

bool validate_sequence(const FactDictionary& dict, const Sequence& seq, std::size_t T) {
  if (seq.tokens.size() != T + 1) return false;
  if (seq.subject_pos == seq.relation_pos) return false;
  if (seq.subject_pos >= T - 1 || seq.relation_pos >= T - 1) return false;
  if (seq.tokens[seq.subject_pos] != dict.subject_token(seq.s)) return false;
  if (seq.tokens[seq.relation_pos] != dict.relation_token(seq.r)) return false;
  if (seq.tokens[T - 1] != dict.eos_token()) return false;
  if (seq.tokens[T] != dict.astar(seq.s, seq.r)) return false;
  for (std::size_t k = 0; k + 1 < T; ++k) {
    if (k == seq.subject_pos || k == seq.relation_pos) continue;
    if (!dict.is_noise(seq.tokens[k])) return false;
  }
  return true;
}

Vector relation_conditional(const FactDictionary& dict, const SrDistribution& p_sr,
                            std::size_t r) {
  double pr = 0.0;
  for (std::size_t s = 0; s < dict.S; ++s) pr += p_sr.prob(s, r);
  if (pr <= 0.0)
    throw std::invalid_argument("relation_conditional: relation has zero mass");
  Vector out(dict.n_answers(), 0.0);
  for (std::size_t s = 0; s < dict.S; ++s)
    out[dict.astar_index(s, r)] += p_sr.prob(s, r) / pr;
  return out;
}

Vector subject_conditional(const FactDictionary& dict, const SrDistribution& p_sr,
                           std::size_t s) {
  double ps = 0.0;
  for (std::size_t r = 0; r < dict.R; ++r) ps += p_sr.prob(s, r);
  if (ps <= 0.0)
    throw std::invalid_argument("subject_conditional: subject has zero mass");
  Vector out(dict.n_answers(), 0.0);
  for (std::size_t r = 0; r < dict.R; ++r)
    out[dict.astar_index(s, r)] += p_sr.prob(s, r) / ps;
  return out;
}

void save_dictionary(const FactDictionary& dict, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("save_dictionary: cannot open " + path.string());
  out << dict.S << ' ' << dict.R << ' ' << dict.D << ' ' << dict.n_noise << ' '
      << dict.seed << '\n';
  for (std::size_t s = 0; s < dict.S; ++s)
    for (std::size_t r = 0; r < dict.R; ++r)
      out << s << ' ' << r << ' ' << dict.astar(s, r) << '\n';
  if (!out) throw std::runtime_error("save_dictionary: write failed");
}

FactDictionary load_dictionary(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_dictionary: cannot open " + path.string());
  FactDictionary dict;
  if (!(in >> dict.S >> dict.R >> dict.D >> dict.n_noise >> dict.seed))
    throw std::invalid_argument("load_dictionary: bad header");
  dict.answer.assign(dict.S * dict.R, 0);
  std::vector<bool> seen(dict.S * dict.R, false);
  std::size_t s, r, a;
  while (in >> s >> r >> a) {
    if (s >= dict.S || r >= dict.R)
      throw std::invalid_argument("load_dictionary: fact indices out of range");
    dict.answer[s * dict.R + r] = a;
    seen[s * dict.R + r] = true;
  }
  if (!std::all_of(seen.begin(), seen.end(), [](bool b) { return b; }))
    throw std::invalid_argument("load_dictionary: missing facts");
  dict.validate();
  return dict;
}

}  // namespace recall
