#pragma once

#include <cstdint>
#include <vector>

#include "recall/factual_task.hpp"
#include "recall/matrix.hpp"
#include "recall/rng.hpp"

namespace recall {

// Scalarized linear-attention parameters: W_OV(a, z) for a in the answer
// section, z in the vocabulary, and W_KQ(z).
struct LinAttnParams {
  std::size_t n_answers = 0;
  std::size_t vocab = 0;
  Matrix w_ov;  // n_answers x vocab
  Vector w_kq;  // vocab

  bool all_finite() const;
};

// W_OV = alpha, W_KQ = alpha sqrt(|A| + 1): the balanced start, whose
// per-column residual W_KQ^2 - sum_a W_OV^2 equals alpha^2.
LinAttnParams init_balanced(const FactDictionary& dict, double alpha);
// Every weight equal to alpha (the empirical figure's initialization).
LinAttnParams init_constant(const FactDictionary& dict, double alpha);

// Per-column residual W_KQ(z)^2 - sum_a W_OV(a, z)^2, the conserved quantity
// of the flow.
Vector balancedness_residual(const LinAttnParams& params);

// logit(a) = sum_z counts(z) W_OV(a, z) W_KQ(z). counts must sum to T with
// exactly one EOS.
Vector logits_from_counts(const LinAttnParams& params, const FactDictionary& dict,
                          std::span<const double> counts, std::size_t T);

struct GradTables {
  Matrix ov;  // n_answers x vocab
  Vector kq;  // vocab
};

// Exact population gradient under uniform p(s, r), using the symmetric-noise
// collapse: requires every noise column of the parameters to be identical
// (throws std::invalid_argument otherwise). With shared noise parameters the
// predicted distribution is deterministic per (s, r) and the expectation over
// noise placements reduces to E[count] factors.
GradTables population_grads_exact(const LinAttnParams& params,
                                  const FactDictionary& dict, std::size_t T);

// Unbiased sampling estimator of the same gradient; works for arbitrary
// states and p(s, r). Optionally returns the per-entry Monte-Carlo standard
// error.
GradTables population_grads_mc(const LinAttnParams& params, const FactDictionary& dict,
                               const SrDistribution& p_sr, std::size_t T,
                               std::size_t n_samples, Rng& rng,
                               GradTables* standard_error = nullptr);

struct DynMetricsPoint {
  double t = 0.0;
  double loss = 0.0;
  double rel_loss = 0.0;
  double subj_loss = 0.0;
  double max_bal_drift = 0.0;          // vs the residual at integration start
  double max_subj_noise_weight = 0.0;  // max |W| over subject and noise entries
  Vector rel_distance;                 // per relation: max_s sum_a (p*(a|r) - p_hat)^2
};

// Exact metrics under symmetric-noise mode and uniform p(s, r).
DynMetricsPoint metrics(const LinAttnParams& params, const FactDictionary& dict,
                        std::size_t T);

struct FlowOptions {
  double horizon = 1000.0;
  double step = 0.5;
  // Halve the step when the balancedness residual drifts more than
  // drift_tol * max(t, 1) from its initial value.
  double drift_tol = 1e-8;
  int max_halvings = 12;
  double record_dt = 0.0;  // 0: horizon / 400
};

struct Trajectory {
  std::vector<DynMetricsPoint> points;
  bool failed = false;
  double final_step = 0.0;
};

// theta' = -grad L(theta) by classical fixed-step RK4 with residual-triggered
// step halving. Advances params in place and records metrics.
Trajectory integrate_flow(LinAttnParams& params, const FactDictionary& dict,
                          std::size_t T, const FlowOptions& options);

// Discrete gradient-descent mirror of the same trajectory.
Trajectory run_gd(LinAttnParams& params, const FactDictionary& dict, std::size_t T,
                  double lr, int steps, int record_every);

}  // namespace recall
