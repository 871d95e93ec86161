#pragma once

#include "qrna/qubo.hpp"
#include "qrna/solvers.hpp"
#include "qrna/stems.hpp"
#include "qrna/structure.hpp"
#include "qrna/thermo.hpp"

namespace qrna {

// Everything needed to turn a sequence into a QUBO: which model, enumeration
// settings, and the per-model parameters.
struct PipelineConfig {
  int model = 3;
  int min_stem = 2;
  int min_loop = 3;
  PairRule rule = PairRule::standard();
  Model1Params m1;
  Model2Params m2;
  Model3Params m3;
};

struct Prediction {
  CandidateSet set;
  Qubo qubo;
  SolveResult solve;
  SecondaryStructure structure;
};

CandidateSet enumerate_for_model(const RnaSequence& seq, const PipelineConfig& cfg,
                                 const NnTable& nn);

Qubo build_for_model(const CandidateSet& set, const PipelineConfig& cfg,
                     const LoopPenaltyTable& loops);

// enumerate -> classify -> build -> solve -> decode.
Prediction predict(const RnaSequence& seq, const PipelineConfig& cfg, const NnTable& nn,
                   const LoopPenaltyTable& loops, const SolveRequest& req);

}  // namespace qrna
