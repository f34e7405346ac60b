#pragma once

#include <cstdint>
#include <vector>

namespace recall {

// Shared training protocol knobs. Paper-protocol values are batch 1024 and
// 2^14 steps; the desk-scale defaults below keep the acceptance suite within
// budget and are overridable from the CLI.
struct TrainConfig {
  int steps = 1 << 12;
  int batch = 256;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  std::vector<double> lrs = {1e-3, 3e-3, 1e-2};
  int eval_interval = 256;
  int eval_noise_fills = 8;
  double acc_threshold = 0.99;
  std::uint64_t seed = 0;
  // Stop a run as soon as the best accuracy seen reaches acc_threshold; the
  // recorded best accuracy is what capacity probes consume.
  bool early_stop = true;

  // steps = 0 is allowed: it records the accuracy at initialization.
  bool valid() const { return steps >= 0 && batch >= 1 && acc_threshold > 0.0 && acc_threshold <= 1.0; }
};

}  // namespace recall
