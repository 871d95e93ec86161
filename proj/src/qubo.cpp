#include "qrna/qubo.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "qrna/errors.hpp"

namespace qrna {

namespace {

using RelationLookup = std::map<std::pair<int, int>, const PairRelation*>;

RelationLookup relation_lookup(const CandidateSet& set) {
  RelationLookup lookup;
  for (const PairRelation& rel : set.relations) lookup[{rel.i, rel.j}] = &rel;
  return lookup;
}

const PairRelation* find_relation(const RelationLookup& lookup, int i, int j) {
  auto it = lookup.find({i, j});
  return it != lookup.end() ? it->second : nullptr;
}

// The overlap term must dominate any achievable reward so that ground states
// never contain overlapping candidates.
double effective_overlap_penalty(double configured, const Qubo& partial) {
  return std::max(configured, 10.0 * partial.reward_mass());
}

}  // namespace

void Qubo::add_bias(int i, double v) {
  if (v != 0.0) linear[i] += v;
}

void Qubo::add_coupling(int i, int j, double v) {
  if (i == j) throw DomainError("self-coupling is not representable");
  if (i > j) std::swap(i, j);
  if (v != 0.0) quadratic[{i, j}] += v;
}

double Qubo::bias(int i) const {
  auto it = linear.find(i);
  return it != linear.end() ? it->second : 0.0;
}

double Qubo::coupling(int i, int j) const {
  if (i > j) std::swap(i, j);
  auto it = quadratic.find({i, j});
  return it != quadratic.end() ? it->second : 0.0;
}

double Qubo::reward_mass() const {
  double mass = 0;
  for (const auto& [i, v] : linear)
    if (v < 0) mass -= v;
  for (const auto& [ij, v] : quadratic)
    if (v < 0) mass -= v;
  return mass;
}

double energy(const Qubo& qubo, std::span<const uint8_t> q) {
  if (static_cast<int>(q.size()) != qubo.num_vars)
    throw LengthMismatchError("bit vector has " + std::to_string(q.size()) + " entries, QUBO has " +
                              std::to_string(qubo.num_vars) + " variables");
  double e = 0;
  for (const auto& [i, v] : qubo.linear)
    if (q[i]) e += v;
  for (const auto& [ij, v] : qubo.quadratic)
    if (q[ij.first] && q[ij.second]) e += v;
  return e;
}

Model1Params ones_model1() { return {1.0, 1.0, 1.0, 1000.0}; }
Model2Params ones_model2() { return {1.0, 1.0, 1000.0}; }
Model3Params ones_model3() { return {1.0, 1.0, 1.0, 1.0, 1.0, 1000.0}; }

Qubo build_model1(const CandidateSet& set, const Model1Params& p) {
  if (set.kind != CandidateKind::Stems)
    throw WrongCandidateKindError("model 1 takes stem candidates");
  if (set.weight_mode != WeightMode::BpLength)
    throw WrongWeightModeError("model 1 takes base-pair-length weights");

  Qubo qubo;
  const int count = static_cast<int>(set.candidates.size());
  qubo.num_vars = count;
  for (int i = 0; i < count; ++i) {
    const double k = set.candidates[i].weight;
    const double d = k - set.mu;
    qubo.add_bias(i, p.length_weight * d * d - p.bp_reward * k * k);
  }

  const RelationLookup lookup = relation_lookup(set);
  std::vector<std::pair<int, int>> overlaps;
  for (int i = 0; i < count; ++i) {
    for (int j = i + 1; j < count; ++j) {
      const PairRelation* rel = find_relation(lookup, i, j);
      if (rel && rel->kind == RelationKind::Overlap) {
        overlaps.emplace_back(i, j);
        continue;
      }
      const double discount = rel && rel->kind == RelationKind::Pseudoknot ? p.pk_discount : 1.0;
      const double ki = set.candidates[i].weight;
      const double kj = set.candidates[j].weight;
      qubo.add_coupling(i, j, -(2.0 * p.bp_reward * ki * kj * discount + 1.0));
    }
  }

  const double penalty = effective_overlap_penalty(p.overlap_penalty, qubo);
  for (const auto& [i, j] : overlaps) qubo.add_coupling(i, j, penalty);
  return qubo;
}

Qubo build_model2(const CandidateSet& set, const Model2Params& p) {
  if (set.kind != CandidateKind::Quartets)
    throw WrongCandidateKindError("model 2 takes stacked-quartet candidates");

  Qubo qubo;
  qubo.num_vars = static_cast<int>(set.candidates.size());
  for (int i = 0; i < qubo.num_vars; ++i) qubo.add_bias(i, -set.candidates[i].weight);

  std::vector<std::pair<int, int>> overlaps;
  for (const PairRelation& rel : set.relations) {
    switch (rel.kind) {
      case RelationKind::Stacked: qubo.add_coupling(rel.i, rel.j, -p.stack_reward); break;
      case RelationKind::Pseudoknot: qubo.add_coupling(rel.i, rel.j, p.pk_penalty); break;
      case RelationKind::Overlap: overlaps.emplace_back(rel.i, rel.j); break;
      case RelationKind::Independent: break;
    }
  }

  const double penalty = effective_overlap_penalty(p.overlap_penalty, qubo);
  for (const auto& [i, j] : overlaps) qubo.add_coupling(i, j, penalty);
  return qubo;
}

double pk_penalty(const PairRelation& rel, const CandidateSet& set, const LoopPenaltyTable& table,
                  const Model3Params& p) {
  if (rel.kind != RelationKind::Pseudoknot)
    throw DomainError("pk_penalty applies to pseudoknot relations");
  const double e = p.nt_length_scale;
  const double n_ss = std::max(rel.n_ss, 1);  // guards ln at n_ss = 0
  const double lambda_sum = table.inline_stem_lambda(set.candidates[rel.i].length) +
                            table.inline_stem_lambda(set.candidates[rel.j].length);
  return p.pk_loop_weight * std::log(e * e * n_ss) + p.pk_stem_weight * std::log(lambda_sum);
}

Qubo build_model3(const CandidateSet& set, const LoopPenaltyTable& table, const Model3Params& p) {
  if (set.kind != CandidateKind::Stems)
    throw WrongCandidateKindError("model 3 takes stem candidates");
  if (set.weight_mode != WeightMode::NnEnergy)
    throw WrongWeightModeError("model 3 takes nearest-neighbor energy weights");

  Qubo qubo;
  const int count = static_cast<int>(set.candidates.size());
  qubo.num_vars = count;
  for (int i = 0; i < count; ++i) {
    const Candidate& cand = set.candidates[i];
    const auto loop = table.hairpin_penalty(cand.loop_size);
    if (!loop) throw ForbiddenLoopError(i, cand.loop_size);
    const double k = cand.weight;
    const double d = k - set.mu;
    qubo.add_bias(i, p.uniformity_weight * d * d - p.stability_weight * (k - *loop));
  }

  std::vector<std::pair<int, int>> overlaps;
  for (const PairRelation& rel : set.relations) {
    if (rel.kind == RelationKind::Overlap)
      overlaps.emplace_back(rel.i, rel.j);
    else if (rel.kind == RelationKind::Pseudoknot)
      qubo.add_coupling(rel.i, rel.j, pk_penalty(rel, set, table, p));
  }

  const double penalty = effective_overlap_penalty(p.overlap_penalty, qubo);
  for (const auto& [i, j] : overlaps) qubo.add_coupling(i, j, penalty);
  return qubo;
}

std::string qubo_to_json(const Qubo& qubo, const CandidateSet* labels) {
  nlohmann::json doc;
  doc["num_vars"] = qubo.num_vars;
  doc["linear"] = nlohmann::json::object();
  for (const auto& [i, v] : qubo.linear) doc["linear"][std::to_string(i)] = v;
  doc["quadratic"] = nlohmann::json::object();
  for (const auto& [ij, v] : qubo.quadratic)
    doc["quadratic"][std::to_string(ij.first) + "," + std::to_string(ij.second)] = v;
  if (labels) {
    doc["labels"] = nlohmann::json::object();
    for (size_t i = 0; i < labels->candidates.size(); ++i) {
      const Candidate& c = labels->candidates[i];
      doc["labels"][std::to_string(i)] = {
          {"first", c.first}, {"last", c.last}, {"length", c.length}, {"weight", c.weight}};
    }
  }
  return doc.dump(2) + "\n";
}

Qubo qubo_from_json(const std::string& text) {
  const auto parse_index = [](const std::string& token) {
    try {
      size_t used = 0;
      const int value = std::stoi(token, &used);
      if (used != token.size()) throw ParseError("bad index '" + token + "'");
      return value;
    } catch (const std::exception&) {
      throw ParseError("bad index '" + token + "'");
    }
  };

  Qubo qubo;
  try {
    const nlohmann::json doc = nlohmann::json::parse(text);
    qubo.num_vars = doc.at("num_vars").get<int>();
    for (const auto& [key, value] : doc.at("linear").items())
      qubo.linear[parse_index(key)] = value.get<double>();
    for (const auto& [key, value] : doc.at("quadratic").items()) {
      const auto comma = key.find(',');
      if (comma == std::string::npos) throw ParseError("bad quadratic key '" + key + "'");
      const int i = parse_index(key.substr(0, comma));
      const int j = parse_index(key.substr(comma + 1));
      if (i >= j) throw ParseError("quadratic key '" + key + "' is not canonical");
      qubo.quadratic[{i, j}] = value.get<double>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad QUBO document: ") + e.what());
  }
  for (const auto& [i, v] : qubo.linear)
    if (i < 0 || i >= qubo.num_vars) throw ParseError("linear index out of range");
  for (const auto& [ij, v] : qubo.quadratic)
    if (ij.first < 0 || ij.second >= qubo.num_vars) throw ParseError("quadratic index out of range");
  return qubo;
}

std::map<std::string, double> parse_params_file(const std::string& text) {
  std::map<std::string, double> kv;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto pos = line.find('#'); pos != std::string::npos) line.resize(pos);
    std::istringstream ss(line);
    std::string key;
    double value;
    if (!(ss >> key)) continue;
    if (!(ss >> value)) throw MalformedRowError(line_no, "expected KEY<TAB>VALUE");
    kv[key] = value;
  }
  return kv;
}

namespace {
double kv_get(const std::map<std::string, double>& kv, const std::string& key, double fallback) {
  auto it = kv.find(key);
  return it != kv.end() ? it->second : fallback;
}
}  // namespace

Model1Params model1_from_kv(const std::map<std::string, double>& kv) {
  Model1Params p;
  p.length_weight = kv_get(kv, "length_weight", p.length_weight);
  p.bp_reward = kv_get(kv, "bp_reward", p.bp_reward);
  p.pk_discount = kv_get(kv, "pk_discount", p.pk_discount);
  p.overlap_penalty = kv_get(kv, "overlap_penalty", p.overlap_penalty);
  return p;
}

Model2Params model2_from_kv(const std::map<std::string, double>& kv) {
  Model2Params p;
  p.stack_reward = kv_get(kv, "stack_reward", p.stack_reward);
  p.pk_penalty = kv_get(kv, "pk_penalty", p.pk_penalty);
  p.overlap_penalty = kv_get(kv, "overlap_penalty", p.overlap_penalty);
  return p;
}

Model3Params model3_from_kv(const std::map<std::string, double>& kv) {
  Model3Params p;
  p.uniformity_weight = kv_get(kv, "uniformity_weight", p.uniformity_weight);
  p.stability_weight = kv_get(kv, "stability_weight", p.stability_weight);
  p.pk_loop_weight = kv_get(kv, "pk_loop_weight", p.pk_loop_weight);
  p.pk_stem_weight = kv_get(kv, "pk_stem_weight", p.pk_stem_weight);
  p.nt_length_scale = kv_get(kv, "nt_length_scale", p.nt_length_scale);
  p.overlap_penalty = kv_get(kv, "overlap_penalty", p.overlap_penalty);
  return p;
}

}  // namespace qrna
