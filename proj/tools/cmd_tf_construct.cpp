#include <cmath>
#include <cstdio>

#include <json.hpp>

#include "common.hpp"
#include "recall/csv.hpp"
#include "recall/transformer.hpp"

namespace recall::cli {
namespace {

AnswerAssignment parse_assignment(const std::string& name) {
  if (name == "uniform") return AnswerAssignment::kUniform;
  if (name == "balanced") return AnswerAssignment::kBalanced;
  if (name == "distinct") return AnswerAssignment::kDistinct;
  throw std::invalid_argument("assignment must be uniform|balanced|distinct");
}

nlohmann::json report_json(const ConstructionReport& report) {
  nlohmann::json j;
  j["block_size"] = report.block_size;
  j["beta"] = report.beta;
  j["n_heads"] = report.n_heads;
  j["min_filter_margin_in"] = report.min_filter_margin_in;
  j["min_filter_margin_out"] = report.min_filter_margin_out;
  j["max_ov_deviation"] = report.max_ov_deviation;
  nlohmann::json blocks = nlohmann::json::array();
  for (const BlockStat& b : report.blocks) {
    nlohmann::json jb;
    jb["subject_side"] = b.subject_side;
    jb["tokens"] = b.tokens;
    jb["filter_margin_in"] = b.filter_margin_in;
    jb["filter_margin_out"] = b.filter_margin_out;
    jb["max_ov_deviation"] = b.max_ov_deviation;
    blocks.push_back(jb);
  }
  j["blocks"] = blocks;
  return j;
}

}  // namespace

int cmd_tf_construct(RunContext& ctx) {
  const std::string kind = ctx.cfg.get_string("kind", "attn");
  const std::size_t S = ctx.cfg.get_size("S", 16);
  const std::size_t R = ctx.cfg.get_size("R", 16);
  const std::size_t D = ctx.cfg.get_size("D", 4);
  const std::size_t T = ctx.cfg.get_size("T", 32);
  const std::size_t d = ctx.cfg.get_size("d", 128);
  const std::size_t d_h = ctx.cfg.get_size("d_h", 32);
  const double beta = ctx.cfg.get_double("beta", 40.0);
  const int p = ctx.cfg.get_int("p", 3);
  const int k = ctx.cfg.get_int("k", 3);
  const std::size_t m = ctx.cfg.get_size("m", 8192);
  const double v_scale = ctx.cfg.get_double("v_scale", 1e4);
  const std::size_t block_size = ctx.cfg.get_size("block_size", 0);
  const std::size_t n_fills = ctx.cfg.get_size("n_fills", 64);
  const std::size_t n_seeds = ctx.cfg.get_size("n_seeds", 10);
  AnswerAssignment assignment =
      parse_assignment(ctx.cfg.get_string("assignment", "uniform"));
  ctx.cfg.require_all_consumed();
  if (kind != "attn" && kind != "attn-mlp")
    throw std::invalid_argument("tf-construct: kind must be attn|attn-mlp");

  std::optional<std::size_t> block_override;
  if (block_size > 0) block_override = block_size;

  CsvWriter csv({"kind", "seed", "accuracy", "min_filter_mass", "mass_floor",
                 "min_margin_in", "min_margin_out", "max_ov_deviation", "flagged"});
  const double mass_floor =
      1.0 - static_cast<double>(T) * std::exp(-beta / 4.0);
  bool wrote_report = false;
  std::size_t n_ok = 0;
  for (std::size_t i = 0; i < n_seeds; ++i) {
    std::uint64_t run_seed = ctx.seed + 1000 * i;
    FactDictionary dict = gen_dictionary(S, R, D, run_seed, assignment);
    EmbeddingTable emb = sample_sphere_table(dict.vocab_size(), d, run_seed + 1);
    auto built = kind == "attn"
                     ? construct_attention_only(dict, emb, d_h, beta, run_seed + 2,
                                                block_override)
                     : construct_attention_mlp(dict, emb, d_h, m, p, k, beta,
                                               run_seed + 2, v_scale, block_override);
    auto& [params, report] = built;
    Rng eval_rng(run_seed + 3);
    EvalStats stats =
        eval_accuracy_checked(params, dict, emb, T, n_fills, eval_rng, report);
    bool flagged = beta <= 0.0 || stats.accuracy < 1.0 ||
                   stats.min_filter_mass <= mass_floor ||
                   report.max_ov_deviation > 0.2;
    csv.field(kind).field(std::to_string(run_seed)).field(stats.accuracy);
    csv.field(stats.min_filter_mass).field(mass_floor);
    csv.field(report.min_filter_margin_in).field(report.min_filter_margin_out);
    csv.field(report.max_ov_deviation).field(std::size_t(flagged ? 1 : 0));
    csv.end_row();
    n_ok += stats.accuracy == 1.0;
    if (!wrote_report) {
      nlohmann::json j = report_json(report);
      j["kind"] = kind;
      j["d"] = d;
      j["d_h"] = d_h;
      j["m"] = kind == "attn" ? 0 : m;
      j["p"] = p;
      j["k"] = k;
      save_transformer(params, ctx.out("constructed_params.bin"));
      write_file_atomic(ctx.out("construction_report.json"), j.dump(2) + "\n");
      wrote_report = true;
    }
  }
  csv.write_atomic(ctx.out("construct_accuracy.csv"));
  ctx.write_manifest("tf-construct");
  std::printf("tf-construct %s: %zu/%zu seeds at accuracy 1.0\n", kind.c_str(), n_ok,
              n_seeds);
  return kExitOk;
}

}  // namespace recall::cli
