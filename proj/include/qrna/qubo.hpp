#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qrna/stems.hpp"
#include "qrna/thermo.hpp"

namespace qrna {

// H(q) = sum_i bias_i q_i + sum_{i<j} coupling_ij q_i q_j over bits q.
// Absent keys mean zero; quadratic keys are canonical (i < j, no self-pairs).
struct Qubo {
  int num_vars = 0;
  std::map<int, double> linear;
  std::map<std::pair<int, int>, double> quadratic;

  void add_bias(int i, double v);
  void add_coupling(int i, int j, double v);
  double bias(int i) const;
  double coupling(int i, int j) const;

  // Sum of the magnitudes of all negative coefficients: an upper bound on the
  // reward any assignment can collect.
  double reward_mass() const;
};

// Exact evaluation of H(q). Throws LengthMismatchError unless |q| == num_vars.
double energy(const Qubo& qubo, std::span<const uint8_t> q);

struct Model1Params {
  double length_weight = 0.639;    // cost on (k_i - mu)^2, maximizes average stem length
  double bp_reward = 0.223;        // quadratic reward on base-pair count
  double pk_discount = 0.681;      // in (0,1]; smaller penalizes pseudoknots harder
  double overlap_penalty = 1000;   // hard-constraint scale, auto-raised per instance
};

struct Model2Params {
  double stack_reward = 1.748;     // reward for adjacent stacked quartets
  double pk_penalty = 0.386;       // flat penalty for crossing quartets
  double overlap_penalty = 1000;
};

struct Model3Params {
  double uniformity_weight = 1.604;  // cost on (k_i - mu)^2 over stability scores
  double stability_weight = 2.212;   // reward on (k_i - l_i)
  double pk_loop_weight = 1.495;     // weight of the single-stranded-count log term
  double pk_stem_weight = 1.338;     // weight of the in-line stem log term
  double nt_length_scale = 1.0;      // linear dimension of one nucleotide in-strand
  double overlap_penalty = 1000;
};

// All-ones starting points used for training.
Model1Params ones_model1();
Model2Params ones_model2();
Model3Params ones_model3();

// Stem-level model over base-pair lengths:
//   bias_i     = length_weight*(k_i - mu)^2 - bp_reward*k_i^2
//   coupling   = -(2*bp_reward*k_i*k_j*d + 1), d = 1 (plain) or pk_discount
//                (crossing); +overlap_penalty for overlapping pairs.
// Requires BpLength weights and classified relations.
Qubo build_model1(const CandidateSet& set, const Model1Params& p);

// Quartet-level model over stacking stability scores:
//   bias_i = -score_i; coupling = -stack_reward (stacked), +pk_penalty
//   (crossing), +overlap_penalty (overlapping), else absent.
Qubo build_model2(const CandidateSet& set, const Model2Params& p);

// Pseudoknot penalty for a crossing stem pair:
//   pk_loop_weight * ln(e^2 * max(n_ss,1))
//     + pk_stem_weight * ln(lambda(len_i) + lambda(len_j))
double pk_penalty(const PairRelation& rel, const CandidateSet& set, const LoopPenaltyTable& table,
                  const Model3Params& p);

// Stem-level model over stability scores with hairpin-loop penalties:
//   bias_i   = uniformity_weight*(k_i - mu)^2 - stability_weight*(k_i - l_i)
//   coupling = pk_penalty (crossing), +overlap_penalty (overlapping), else 0.
// Requires NnEnergy weights; throws ForbiddenLoopError if a candidate's
// hairpin loop is smaller than 3.
Qubo build_model3(const CandidateSet& set, const LoopPenaltyTable& table, const Model3Params& p);

// JSON interchange document with fields num_vars, linear, quadratic, labels.
std::string qubo_to_json(const Qubo& qubo, const CandidateSet* labels = nullptr);
Qubo qubo_from_json(const std::string& text);

// KEY<TAB>VALUE parameter files, as written by the trainer.
std::map<std::string, double> parse_params_file(const std::string& text);
Model1Params model1_from_kv(const std::map<std::string, double>& kv);
Model2Params model2_from_kv(const std::map<std::string, double>& kv);
Model3Params model3_from_kv(const std::map<std::string, double>& kv);

}  // namespace qrna
