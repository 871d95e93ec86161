#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "qrna/pipeline.hpp"
#include "qrna/rng.hpp"
#include "qrna/solvers.hpp"
#include "qrna/structure.hpp"

namespace qrna {

enum class LossKind {
  OneMinusMeanMcc,        // 1 - mean(MCC)
  MeanSquaredComplement,  // mean((1 - MCC)^2)
};

// SPSA gain sequences: step_k = step_scale / (k+1+stability_offset)^step_decay,
// perturbation_k = perturbation_scale / (k+1)^perturbation_decay.
// Zeroed step_scale is calibrated from gradient probes at the starting point so
// the first update moves no coordinate by more than 0.5; negative
// stability_offset resolves to 0.1 * iterations.
struct SpsaConfig {
  int iterations = 60;
  double step_scale = 0;
  double perturbation_scale = 0.1;
  double stability_offset = -1;
  double step_decay = 0.602;
  double perturbation_decay = 0.101;
  uint64_t seed = 1;
  std::vector<double> initial_params;  // empty -> all ones
  LossKind loss_kind = LossKind::OneMinusMeanMcc;

  void validate() const;
};

struct IterationRecord {
  int iteration = 0;
  std::vector<double> params;
  double loss = 0;
  std::vector<int> delta;  // perturbation signs that produced this update; empty at iteration 0
};

struct TrainRecord {
  std::vector<IterationRecord> iterations;
  std::vector<double> best_params;
  double best_loss = 0;
};

using LossFn = std::function<double(std::span<const double>)>;
using ClampFn = std::function<void(std::vector<double>&)>;

// The SPSA two-point gradient estimate; even in (delta, loss order): negating
// delta and swapping the two losses reproduces the same vector.
std::vector<double> spsa_gradient(double loss_plus, double loss_minus, double perturbation,
                                  std::span<const int> delta);

struct SpsaGains {
  double step_scale = 1;
  double perturbation_scale = 0.1;
  double stability_offset = 6;
  double step_decay = 0.602;
  double perturbation_decay = 0.101;
};

// One SPSA update at iteration k (0-based). Perturbed evaluation points and
// the updated parameters are clamped when a clamp is given. Draws dim sign
// values from the rng.
std::vector<double> spsa_step(std::span<const double> params, int k, const SpsaGains& gains,
                              const LossFn& loss, Rng& rng, const ClampFn& clamp = {},
                              std::vector<int>* delta_out = nullptr);

// Full SPSA run over an arbitrary loss; records every iterate and returns the
// best by recorded loss. Deterministic given the config seed.
TrainRecord spsa_minimize(const LossFn& loss, std::vector<double> initial, const SpsaConfig& cfg,
                          const ClampFn& clamp = {});

struct TrainItem {
  std::string id;
  RnaSequence seq;
  SecondaryStructure truth;
};

// Names, all-ones start and domain clamp of each model's trainable vector:
//   model 1: length_weight, bp_reward >= 0; pk_discount in (0, 1]
//   model 2: stack_reward, pk_penalty >= 0
//   model 3: uniformity_weight, stability_weight, pk_loop_weight, pk_stem_weight >= 0
std::vector<std::string> model_param_names(int model);
std::vector<double> model_initial_params(int model);
void clamp_model_params(int model, std::vector<double>& params);
PipelineConfig apply_model_params(int model, std::span<const double> params,
                                  const PipelineConfig& base);

// Mean-MCC training loss over the dataset. Each structure is predicted with a
// per-structure solver seed derived from (seed, item index), fixed across the
// whole run so loss differences reflect parameter changes only. Per-structure
// failures count as MCC 0 with a warning on stderr.
double dataset_loss(int model, std::span<const double> params, const std::vector<TrainItem>& items,
                    const PipelineConfig& base, const NnTable& nn, const LoopPenaltyTable& loops,
                    const SolveRequest& solver, LossKind kind, uint64_t seed);

TrainRecord train(int model, const std::vector<TrainItem>& items, const SpsaConfig& cfg,
                  const PipelineConfig& base, const NnTable& nn, const LoopPenaltyTable& loops,
                  const SolveRequest& solver);

// Progress log: iteration, loss, then one column per parameter.
std::string serialize_train_log(const TrainRecord& record, const std::vector<std::string>& names);

// KEY<TAB>VALUE parameter file loadable as model defaults.
std::string serialize_params_file(int model, std::span<const double> params);

}  // namespace qrna
