#include "qrna/pipeline.hpp"

#include "qrna/errors.hpp"

namespace qrna {

CandidateSet enumerate_for_model(const RnaSequence& seq, const PipelineConfig& cfg,
                                 const NnTable& nn) {
  CandidateSet set;
  switch (cfg.model) {
    case 1:
      set = enumerate_stems(seq, cfg.rule, cfg.min_stem, cfg.min_loop, WeightMode::BpLength);
      break;
    case 2:
      set = enumerate_quartets(seq, cfg.rule, cfg.min_loop, nn);
      break;
    case 3:
      set = enumerate_stems(seq, cfg.rule, cfg.min_stem, cfg.min_loop, WeightMode::NnEnergy, &nn);
      break;
    default:
      throw DomainError("model must be 1, 2 or 3");
  }
  classify_pairs(set);
  return set;
}

Qubo build_for_model(const CandidateSet& set, const PipelineConfig& cfg,
                     const LoopPenaltyTable& loops) {
  switch (cfg.model) {
    case 1: return build_model1(set, cfg.m1);
    case 2: return build_model2(set, cfg.m2);
    case 3: return build_model3(set, loops, cfg.m3);
    default: throw DomainError("model must be 1, 2 or 3");
  }
}

Prediction predict(const RnaSequence& seq, const PipelineConfig& cfg, const NnTable& nn,
                   const LoopPenaltyTable& loops, const SolveRequest& req) {
  Prediction p;
  p.set = enumerate_for_model(seq, cfg, nn);
  p.qubo = build_for_model(p.set, cfg, loops);
  p.solve = solve(p.qubo, req);
  p.structure = decode(p.set, p.solve.best_q);
  return p;
}

}  // namespace qrna
