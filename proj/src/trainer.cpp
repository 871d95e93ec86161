#include "qrna/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <limits>
#include <sstream>

#include "qrna/errors.hpp"
#include "qrna/scoring.hpp"

namespace qrna {

namespace {

constexpr double kMaxFirstStep = 0.5;
constexpr int kCalibrationProbes = 5;

std::vector<int> draw_delta(size_t dims, Rng& rng) {
  std::vector<int> delta(dims);
  for (size_t i = 0; i < dims; ++i) delta[i] = rng.sign();
  return delta;
}

std::vector<double> perturbed(std::span<const double> params, std::span<const int> delta,
                              double scale, const ClampFn& clamp) {
  std::vector<double> point(params.begin(), params.end());
  for (size_t i = 0; i < point.size(); ++i) point[i] += scale * delta[i];
  if (clamp) clamp(point);
  return point;
}

}  // namespace

void SpsaConfig::validate() const {
  if (iterations < 1) throw DomainError("SPSA needs at least one iteration");
  if (perturbation_scale <= 0) throw DomainError("perturbation scale must be positive");
  if (step_decay <= 0 || step_decay > 1) throw DomainError("step decay exponent must be in (0,1]");
  if (perturbation_decay <= 0 || perturbation_decay > 1)
    throw DomainError("perturbation decay exponent must be in (0,1]");
}

std::vector<double> spsa_gradient(double loss_plus, double loss_minus, double perturbation,
                                  std::span<const int> delta) {
  std::vector<double> grad(delta.size());
  const double scale = (loss_plus - loss_minus) / (2.0 * perturbation);
  for (size_t i = 0; i < delta.size(); ++i) grad[i] = scale * delta[i];  // 1/d == d for d = +-1
  return grad;
}

std::vector<double> spsa_step(std::span<const double> params, int k, const SpsaGains& gains,
                              const LossFn& loss, Rng& rng, const ClampFn& clamp,
                              std::vector<int>* delta_out) {
  const std::vector<int> delta = draw_delta(params.size(), rng);
  const double ck = gains.perturbation_scale / std::pow(k + 1, gains.perturbation_decay);
  const double ak = gains.step_scale / std::pow(k + 1 + gains.stability_offset, gains.step_decay);

  const double loss_plus = loss(perturbed(params, delta, ck, clamp));
  const double loss_minus = loss(perturbed(params, delta, -ck, clamp));
  const std::vector<double> grad = spsa_gradient(loss_plus, loss_minus, ck, delta);

  std::vector<double> next(params.begin(), params.end());
  for (size_t i = 0; i < next.size(); ++i) next[i] -= ak * grad[i];
  if (clamp) clamp(next);
  if (delta_out) *delta_out = delta;
  return next;
}

TrainRecord spsa_minimize(const LossFn& loss, std::vector<double> initial, const SpsaConfig& cfg,
                          const ClampFn& clamp) {
  cfg.validate();
  Rng rng(cfg.seed);

  SpsaGains gains;
  gains.perturbation_scale = cfg.perturbation_scale;
  gains.step_decay = cfg.step_decay;
  gains.perturbation_decay = cfg.perturbation_decay;
  gains.stability_offset =
      cfg.stability_offset >= 0 ? cfg.stability_offset : 0.1 * cfg.iterations;

  if (cfg.step_scale > 0) {
    gains.step_scale = cfg.step_scale;
  } else {
    // Probe the gradient magnitude at the start so the first update moves no
    // coordinate by more than kMaxFirstStep.
    double max_grad = 0;
    for (int probe = 0; probe < kCalibrationProbes; ++probe) {
      const std::vector<int> delta = draw_delta(initial.size(), rng);
      const double lp = loss(perturbed(initial, delta, cfg.perturbation_scale, clamp));
      const double lm = loss(perturbed(initial, delta, -cfg.perturbation_scale, clamp));
      for (double g : spsa_gradient(lp, lm, cfg.perturbation_scale, delta))
        max_grad = std::max(max_grad, std::abs(g));
    }
    gains.step_scale =
        max_grad > 1e-12
            ? kMaxFirstStep * std::pow(1 + gains.stability_offset, gains.step_decay) / max_grad
            : 1.0;
  }

  TrainRecord record;
  record.iterations.push_back({0, initial, loss(initial), {}});

  std::vector<double> params = std::move(initial);
  for (int k = 0; k < cfg.iterations; ++k) {
    std::vector<int> delta;
    params = spsa_step(params, k, gains, loss, rng, clamp, &delta);
    record.iterations.push_back({k + 1, params, loss(params), std::move(delta)});
  }

  record.best_loss = std::numeric_limits<double>::infinity();
  for (const IterationRecord& it : record.iterations) {
    if (it.loss < record.best_loss) {
      record.best_loss = it.loss;
      record.best_params = it.params;
    }
  }
  return record;
}

std::vector<std::string> model_param_names(int model) {
  switch (model) {
    case 1: return {"length_weight", "bp_reward", "pk_discount"};
    case 2: return {"stack_reward", "pk_penalty"};
    case 3: return {"uniformity_weight", "stability_weight", "pk_loop_weight", "pk_stem_weight"};
    default: throw DomainError("model must be 1, 2 or 3");
  }
}

std::vector<double> model_initial_params(int model) {
  return std::vector<double>(model_param_names(model).size(), 1.0);
}

void clamp_model_params(int model, std::vector<double>& params) {
  for (double& p : params) p = std::max(p, 0.0);
  if (model == 1) params[2] = std::clamp(params[2], 1e-6, 1.0);  // pk_discount in (0,1]
}

PipelineConfig apply_model_params(int model, std::span<const double> params,
                                  const PipelineConfig& base) {
  if (params.size() != model_param_names(model).size())
    throw LengthMismatchError("wrong parameter count for model " + std::to_string(model));
  PipelineConfig cfg = base;
  cfg.model = model;
  switch (model) {
    case 1:
      cfg.m1.length_weight = params[0];
      cfg.m1.bp_reward = params[1];
      cfg.m1.pk_discount = params[2];
      break;
    case 2:
      cfg.m2.stack_reward = params[0];
      cfg.m2.pk_penalty = params[1];
      break;
    case 3:
      cfg.m3.uniformity_weight = params[0];
      cfg.m3.stability_weight = params[1];
      cfg.m3.pk_loop_weight = params[2];
      cfg.m3.pk_stem_weight = params[3];
      break;
    default:
      throw DomainError("model must be 1, 2 or 3");
  }
  return cfg;
}

double dataset_loss(int model, std::span<const double> params, const std::vector<TrainItem>& items,
                    const PipelineConfig& base, const NnTable& nn, const LoopPenaltyTable& loops,
                    const SolveRequest& solver, LossKind kind, uint64_t seed) {
  if (items.empty()) throw DomainError("training dataset is empty");
  const PipelineConfig cfg = apply_model_params(model, params, base);

  double total = 0;
  for (size_t idx = 0; idx < items.size(); ++idx) {
    double item_mcc = 0;
    try {
      SolveRequest req = solver;
      req.seed = substream_seed(seed, idx);
      const Prediction p = predict(items[idx].seq, cfg, nn, loops, req);
      item_mcc = mcc(confusion(p.structure, items[idx].truth));
    } catch (const Error& e) {
      std::cerr << "warning: scoring '" << items[idx].id << "' as MCC 0: " << e.what() << "\n";
    }
    total += kind == LossKind::OneMinusMeanMcc ? item_mcc : (1.0 - item_mcc) * (1.0 - item_mcc);
  }
  const double mean = total / static_cast<double>(items.size());
  return kind == LossKind::OneMinusMeanMcc ? 1.0 - mean : mean;
}

TrainRecord train(int model, const std::vector<TrainItem>& items, const SpsaConfig& cfg,
                  const PipelineConfig& base, const NnTable& nn, const LoopPenaltyTable& loops,
                  const SolveRequest& solver) {
  std::vector<double> initial =
      cfg.initial_params.empty() ? model_initial_params(model) : cfg.initial_params;
  if (initial.size() != model_param_names(model).size())
    throw LengthMismatchError("wrong initial parameter count for model " + std::to_string(model));

  const LossFn loss = [&](std::span<const double> params) {
    return dataset_loss(model, params, items, base, nn, loops, solver, cfg.loss_kind, cfg.seed);
  };
  const ClampFn clamp = [model](std::vector<double>& params) {
    clamp_model_params(model, params);
  };
  return spsa_minimize(loss, std::move(initial), cfg, clamp);
}

std::string serialize_train_log(const TrainRecord& record, const std::vector<std::string>& names) {
  std::ostringstream out;
  out << "iteration\tloss";
  for (const std::string& name : names) out << "\t" << name;
  out << "\n";
  char buf[64];
  for (const IterationRecord& it : record.iterations) {
    out << it.iteration;
    std::snprintf(buf, sizeof(buf), "\t%.12g", it.loss);
    out << buf;
    for (double p : it.params) {
      std::snprintf(buf, sizeof(buf), "\t%.12g", p);
      out << buf;
    }
    out << "\n";
  }
  return out.str();
}

std::string serialize_params_file(int model, std::span<const double> params) {
  const std::vector<std::string> names = model_param_names(model);
  if (params.size() != names.size())
    throw LengthMismatchError("wrong parameter count for model " + std::to_string(model));
  std::ostringstream out;
  out << "model\t" << model << "\n";
  char buf[64];
  for (size_t i = 0; i < names.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.12g", params[i]);
    out << names[i] << "\t" << buf << "\n";
  }
  return out.str();
}

}  // namespace qrna
