#include "recall/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "recall/errors.hpp"
#include "recall/numerics.hpp"

namespace recall {

bool LinAttnParams::all_finite() const {
  if (!w_ov.all_finite()) return false;
  for (double v : w_kq)
    if (!std::isfinite(v)) return false;
  return true;
}

LinAttnParams init_balanced(const FactDictionary& dict, double alpha) {
  if (alpha <= 0.0) throw std::invalid_argument("init_balanced: alpha must be > 0");
  LinAttnParams p;
  p.n_answers = dict.n_answers();
  p.vocab = dict.vocab_size();
  p.w_ov = Matrix(p.n_answers, p.vocab, alpha);
  p.w_kq.assign(p.vocab, alpha * std::sqrt(static_cast<double>(p.n_answers) + 1.0));
  return p;
}

LinAttnParams init_constant(const FactDictionary& dict, double alpha) {
  if (alpha <= 0.0) throw std::invalid_argument("init_constant: alpha must be > 0");
  LinAttnParams p;
  p.n_answers = dict.n_answers();
  p.vocab = dict.vocab_size();
  p.w_ov = Matrix(p.n_answers, p.vocab, alpha);
  p.w_kq.assign(p.vocab, alpha);
  return p;
}

Vector balancedness_residual(const LinAttnParams& params) {
  Vector res(params.vocab);
  for (std::size_t z = 0; z < params.vocab; ++z) {
    double s = 0.0;
    for (std::size_t a = 0; a < params.n_answers; ++a)
      s += params.w_ov(a, z) * params.w_ov(a, z);
    res[z] = params.w_kq[z] * params.w_kq[z] - s;
  }
  return res;
}

Vector logits_from_counts(const LinAttnParams& params, const FactDictionary& dict,
                          std::span<const double> counts, std::size_t T) {
  if (counts.size() != params.vocab)
    throw std::invalid_argument("logits_from_counts: counts size mismatch");
  double total = 0.0;
  for (double c : counts) total += c;
  if (std::abs(total - static_cast<double>(T)) > 1e-9 ||
      std::abs(counts[dict.eos_token()] - 1.0) > 1e-12)
    throw std::invalid_argument("logits_from_counts: counts must sum to T with one EOS");
  Vector logits(params.n_answers, 0.0);
  for (std::size_t z = 0; z < params.vocab; ++z) {
    double c = counts[z];
    if (c == 0.0) continue;
    double ck = c * params.w_kq[z];
    for (std::size_t a = 0; a < params.n_answers; ++a)
      logits[a] += ck * params.w_ov(a, z);
  }
  return logits;
}

namespace {

void check_symmetric_noise(const LinAttnParams& params, const FactDictionary& dict) {
  const std::size_t nu0 = dict.noise_begin();
  for (std::size_t z = nu0 + 1; z < dict.eos_token(); ++z) {
    if (params.w_kq[z] != params.w_kq[nu0])
      throw std::invalid_argument("population_grads_exact: asymmetric noise columns");
    for (std::size_t a = 0; a < params.n_answers; ++a)
      if (params.w_ov(a, z) != params.w_ov(a, nu0))
        throw std::invalid_argument("population_grads_exact: asymmetric noise columns");
  }
}

// p_hat(a | s, r) for every pair, deterministic under shared noise columns:
// logits = OV KQ contributions of s, r, EOS plus (T-3) times the noise class.
Matrix phat_table(const LinAttnParams& params, const FactDictionary& dict,
                  std::size_t T) {
  const std::size_t S = dict.S, R = dict.R, A = params.n_answers;
  const std::size_t eos = dict.eos_token(), nu0 = dict.noise_begin();
  Matrix phat(S * R, A);
  Vector base(A);
  const double t_noise = static_cast<double>(T - 3);
  for (std::size_t a = 0; a < A; ++a)
    base[a] = params.w_ov(a, eos) * params.w_kq[eos] +
              t_noise * params.w_ov(a, nu0) * params.w_kq[nu0];
  for (std::size_t s = 0; s < S; ++s) {
    const std::size_t s_tok = dict.subject_token(s);
    for (std::size_t r = 0; r < R; ++r) {
      const std::size_t r_tok = dict.relation_token(r);
      double* row = phat.row(s * R + r);
      for (std::size_t a = 0; a < A; ++a)
        row[a] = base[a] + params.w_ov(a, s_tok) * params.w_kq[s_tok] +
                 params.w_ov(a, r_tok) * params.w_kq[r_tok];
      softmax_inplace(phat.row_span(s * R + r));
    }
  }
  return phat;
}

}  // namespace

GradTables population_grads_exact(const LinAttnParams& params,
                                  const FactDictionary& dict, std::size_t T) {
  if (T < 3) throw std::invalid_argument("population_grads_exact: T must be >= 3");
  check_symmetric_noise(params, dict);
  const std::size_t S = dict.S, R = dict.R, A = params.n_answers;
  const double p_sr = 1.0 / static_cast<double>(S * R);
  Matrix phat = phat_table(params, dict, T);

  // E(a, z) = E[count(z) (1(a = a*) - p_hat(a))] per column class.
  Matrix e_cols(A, params.vocab);
  Vector e_eos(A, 0.0);
  for (std::size_t s = 0; s < S; ++s) {
    for (std::size_t r = 0; r < R; ++r) {
      const double* row = phat.row(s * R + r);
      const std::size_t target = dict.astar_index(s, r);
      const std::size_t s_tok = dict.subject_token(s);
      const std::size_t r_tok = dict.relation_token(r);
      for (std::size_t a = 0; a < A; ++a) {
        double diff = p_sr * ((a == target ? 1.0 : 0.0) - row[a]);
        e_cols(a, s_tok) += diff;
        e_cols(a, r_tok) += diff;
        e_eos[a] += diff;
      }
    }
  }
  const double noise_factor =
      static_cast<double>(T - 3) / static_cast<double>(dict.n_noise);
  for (std::size_t a = 0; a < A; ++a) {
    e_cols(a, dict.eos_token()) = e_eos[a];
    double en = e_eos[a] * noise_factor;
    for (std::size_t z = dict.noise_begin(); z < dict.eos_token(); ++z)
      e_cols(a, z) = en;
  }

  GradTables g;
  g.ov = Matrix(A, params.vocab);
  g.kq.assign(params.vocab, 0.0);
  for (std::size_t z = 0; z < params.vocab; ++z) {
    double kq = params.w_kq[z];
    double acc = 0.0;
    for (std::size_t a = 0; a < A; ++a) {
      g.ov(a, z) = -kq * e_cols(a, z);
      acc += params.w_ov(a, z) * e_cols(a, z);
    }
    g.kq[z] = -acc;
  }
  return g;
}

GradTables population_grads_mc(const LinAttnParams& params, const FactDictionary& dict,
                               const SrDistribution& p_sr, std::size_t T,
                               std::size_t n_samples, Rng& rng,
                               GradTables* standard_error) {
  if (n_samples == 0)
    throw std::invalid_argument("population_grads_mc: n_samples must be >= 1");
  const std::size_t A = params.n_answers;
  GradTables mean{Matrix(A, params.vocab), Vector(params.vocab, 0.0)};
  Matrix ov_sq;
  Vector kq_sq;
  if (standard_error != nullptr) {
    ov_sq = Matrix(A, params.vocab);
    kq_sq.assign(params.vocab, 0.0);
  }
  Vector logits(A), diff(A);
  std::vector<std::size_t> toks;
  std::vector<double> cnts;
  for (std::size_t n = 0; n < n_samples; ++n) {
    Sequence seq = sample_sequence(dict, T, p_sr, rng);
    // distinct tokens of z_{1:T} with counts
    toks.clear();
    cnts.clear();
    for (std::size_t t = 0; t < T; ++t) {
      std::size_t z = seq.tokens[t];
      auto it = std::find(toks.begin(), toks.end(), z);
      if (it == toks.end()) {
        toks.push_back(z);
        cnts.push_back(1.0);
      } else {
        cnts[static_cast<std::size_t>(it - toks.begin())] += 1.0;
      }
    }
    std::fill(logits.begin(), logits.end(), 0.0);
    for (std::size_t i = 0; i < toks.size(); ++i) {
      double ck = cnts[i] * params.w_kq[toks[i]];
      for (std::size_t a = 0; a < A; ++a)
        logits[a] += ck * params.w_ov(a, toks[i]);
    }
    softmax_inplace(logits);
    const std::size_t target = dict.astar_index(seq.s, seq.r);
    for (std::size_t a = 0; a < A; ++a)
      diff[a] = (a == target ? 1.0 : 0.0) - logits[a];
    for (std::size_t i = 0; i < toks.size(); ++i) {
      const std::size_t z = toks[i];
      const double c = cnts[i];
      double acc = 0.0;
      for (std::size_t a = 0; a < A; ++a) {
        double g = -params.w_kq[z] * c * diff[a];
        mean.ov(a, z) += g;
        if (standard_error != nullptr) ov_sq(a, z) += g * g;
        acc += params.w_ov(a, z) * c * diff[a];
      }
      mean.kq[z] += -acc;
      if (standard_error != nullptr) kq_sq[z] += acc * acc;
    }
  }
  const double inv = 1.0 / static_cast<double>(n_samples);
  for (double& v : mean.ov.flat()) v *= inv;
  for (double& v : mean.kq) v *= inv;
  if (standard_error != nullptr) {
    standard_error->ov = Matrix(A, params.vocab);
    standard_error->kq.assign(params.vocab, 0.0);
    for (std::size_t i = 0; i < ov_sq.size(); ++i) {
      double var = ov_sq.data()[i] * inv -
                   mean.ov.data()[i] * mean.ov.data()[i];
      standard_error->ov.data()[i] = std::sqrt(std::max(0.0, var) * inv);
    }
    for (std::size_t z = 0; z < params.vocab; ++z) {
      double var = kq_sq[z] * inv - mean.kq[z] * mean.kq[z];
      standard_error->kq[z] = std::sqrt(std::max(0.0, var) * inv);
    }
  }
  return mean;
}

namespace {

double max_subj_noise_abs(const LinAttnParams& params, const FactDictionary& dict) {
  double m = 0.0;
  auto scan_col = [&](std::size_t z) {
    m = std::max(m, std::abs(params.w_kq[z]));
    for (std::size_t a = 0; a < params.n_answers; ++a)
      m = std::max(m, std::abs(params.w_ov(a, z)));
  };
  for (std::size_t s = 0; s < dict.S; ++s) scan_col(dict.subject_token(s));
  for (std::size_t z = dict.noise_begin(); z < dict.eos_token(); ++z) scan_col(z);
  return m;
}

DynMetricsPoint metrics_impl(const LinAttnParams& params, const FactDictionary& dict,
                             std::size_t T, const Vector* res0, double t_now) {
  check_symmetric_noise(params, dict);
  const std::size_t S = dict.S, R = dict.R;
  const double p_sr = 1.0 / static_cast<double>(S * R);
  Matrix phat = phat_table(params, dict, T);
  SrDistribution uniform = SrDistribution::uniform(S, R);

  DynMetricsPoint pt;
  pt.t = t_now;
  pt.rel_distance.assign(R, 0.0);
  std::vector<Vector> pstar_r(R);
  for (std::size_t r = 0; r < R; ++r)
    pstar_r[r] = relation_conditional(dict, uniform, r);
  // Answer-index sets per relation / subject.
  std::vector<std::vector<std::size_t>> ar(R), as(S);
  for (std::size_t r = 0; r < R; ++r)
    for (std::size_t a : dict.answers_of_relation(r))
      ar[r].push_back(a - dict.answer_begin());
  for (std::size_t s = 0; s < S; ++s)
    for (std::size_t a : dict.answers_of_subject(s))
      as[s].push_back(a - dict.answer_begin());

  for (std::size_t s = 0; s < S; ++s) {
    for (std::size_t r = 0; r < R; ++r) {
      const double* row = phat.row(s * R + r);
      pt.loss += p_sr * (-std::log(row[dict.astar_index(s, r)]));
      double mass_r = 0.0;
      for (std::size_t a : ar[r]) mass_r += row[a];
      pt.rel_loss += p_sr * (-std::log(mass_r));
      double mass_s = 0.0;
      for (std::size_t a : as[s]) mass_s += row[a];
      pt.subj_loss += p_sr * (-std::log(mass_s));
      double dist = 0.0;
      for (std::size_t a = 0; a < params.n_answers; ++a) {
        double dd = pstar_r[r][a] - row[a];
        dist += dd * dd;
      }
      pt.rel_distance[r] = std::max(pt.rel_distance[r], dist);
    }
  }
  pt.max_subj_noise_weight = max_subj_noise_abs(params, dict);
  if (res0 != nullptr) {
    Vector res = balancedness_residual(params);
    double drift = 0.0;
    for (std::size_t z = 0; z < res.size(); ++z)
      drift = std::max(drift, std::abs(res[z] - (*res0)[z]));
    pt.max_bal_drift = drift;
  }
  return pt;
}

struct RkScratch {
  GradTables k1, k2, k3, k4;
  LinAttnParams tmp;
};

void advance(LinAttnParams& out, const LinAttnParams& base, const GradTables& g,
             double c) {
  // out = base - c * g (flow direction is minus the gradient)
  const std::size_t n = base.w_ov.size();
  for (std::size_t i = 0; i < n; ++i)
    out.w_ov.data()[i] = base.w_ov.data()[i] - c * g.ov.data()[i];
  for (std::size_t z = 0; z < base.vocab; ++z)
    out.w_kq[z] = base.w_kq[z] - c * g.kq[z];
}

}  // namespace

DynMetricsPoint metrics(const LinAttnParams& params, const FactDictionary& dict,
                        std::size_t T) {
  return metrics_impl(params, dict, T, nullptr, 0.0);
}

Trajectory integrate_flow(LinAttnParams& params, const FactDictionary& dict,
                          std::size_t T, const FlowOptions& options) {
  if (options.horizon <= 0.0)
    throw std::invalid_argument("integrate_flow: horizon must be > 0");
  Trajectory traj;
  double h = options.step;
  const double record_dt =
      options.record_dt > 0.0 ? options.record_dt : options.horizon / 400.0;
  Vector res0 = balancedness_residual(params);

  traj.points.push_back(metrics_impl(params, dict, T, &res0, 0.0));
  LinAttnParams mid = params, probe = params;
  int halvings = 0;
  double t = 0.0;
  double next_record = record_dt;
  while (t < options.horizon - 1e-12) {
    double step = std::min(h, options.horizon - t);
    GradTables k1 = population_grads_exact(params, dict, T);
    advance(mid, params, k1, 0.5 * step);
    GradTables k2 = population_grads_exact(mid, dict, T);
    advance(mid, params, k2, 0.5 * step);
    GradTables k3 = population_grads_exact(mid, dict, T);
    advance(mid, params, k3, step);
    GradTables k4 = population_grads_exact(mid, dict, T);
    // probe = params - step/6 (k1 + 2k2 + 2k3 + k4)
    const std::size_t n = params.w_ov.size();
    for (std::size_t i = 0; i < n; ++i)
      probe.w_ov.data()[i] =
          params.w_ov.data()[i] -
          step / 6.0 *
              (k1.ov.data()[i] + 2.0 * k2.ov.data()[i] + 2.0 * k3.ov.data()[i] +
               k4.ov.data()[i]);
    for (std::size_t z = 0; z < params.vocab; ++z)
      probe.w_kq[z] = params.w_kq[z] -
                      step / 6.0 *
                          (k1.kq[z] + 2.0 * k2.kq[z] + 2.0 * k3.kq[z] + k4.kq[z]);
    if (!probe.all_finite()) {
      traj.failed = true;
      break;
    }
    Vector res = balancedness_residual(probe);
    double drift = 0.0;
    for (std::size_t z = 0; z < res.size(); ++z)
      drift = std::max(drift, std::abs(res[z] - res0[z]));
    if (drift > options.drift_tol * std::max(t + step, 1.0) &&
        halvings < options.max_halvings) {
      h *= 0.5;
      ++halvings;
      continue;
    }
    std::swap(params.w_ov, probe.w_ov);
    std::swap(params.w_kq, probe.w_kq);
    t += step;
    if (t >= next_record - 1e-9 || t >= options.horizon - 1e-12) {
      traj.points.push_back(metrics_impl(params, dict, T, &res0, t));
      while (next_record <= t + 1e-9) next_record += record_dt;
    }
  }
  traj.final_step = h;
  return traj;
}

Trajectory run_gd(LinAttnParams& params, const FactDictionary& dict, std::size_t T,
                  double lr, int steps, int record_every) {
  if (steps < 1 || lr <= 0.0) throw std::invalid_argument("run_gd: bad arguments");
  Trajectory traj;
  Vector res0 = balancedness_residual(params);
  traj.points.push_back(metrics_impl(params, dict, T, &res0, 0.0));
  for (int step = 1; step <= steps; ++step) {
    GradTables g = population_grads_exact(params, dict, T);
    advance(params, params, g, lr);
    if (!params.all_finite()) {
      traj.failed = true;
      break;
    }
    if (step % record_every == 0 || step == steps) {
      DynMetricsPoint pt =
          metrics_impl(params, dict, T, &res0, static_cast<double>(step) * lr);
      traj.points.push_back(pt);
    }
  }
  traj.final_step = lr;
  return traj;
}

}  // namespace recall
