#include "qrna/solvers.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "qrna/errors.hpp"
#include "qrna/rng.hpp"

namespace qrna {

namespace {

constexpr int kDefaultSweeps = 20000;
constexpr int kEnergyResyncSweeps = 64;

// Dense mirror of a Qubo for O(1) coupling access during local search.
struct DenseQubo {
  int n = 0;
  std::vector<double> h;
  std::vector<double> j;  // symmetric, n*n

  explicit DenseQubo(const Qubo& qubo) : n(qubo.num_vars), h(n, 0.0), j(size_t(n) * n, 0.0) {
    for (const auto& [i, v] : qubo.linear) h[i] = v;
    for (const auto& [ij, v] : qubo.quadratic) {
      j[size_t(ij.first) * n + ij.second] = v;
      j[size_t(ij.second) * n + ij.first] = v;
    }
  }

  double coupling(int a, int b) const { return j[size_t(a) * n + b]; }

  double max_abs_coefficient() const {
    double m = 0;
    for (double v : h) m = std::max(m, std::abs(v));
    for (double v : j) m = std::max(m, std::abs(v));
    return m;
  }
};

// Local field g_i = h_i + sum_{k: q_k=1} J_ik; flipping i changes the energy
// by +g_i (0->1) or -g_i (1->0).
struct LocalState {
  const DenseQubo& dense;
  std::vector<uint8_t> q;
  std::vector<double> g;
  double e = 0;  // incrementally tracked, resynced periodically

  LocalState(const DenseQubo& d, std::vector<uint8_t> init) : dense(d), q(std::move(init)) {
    g.assign(dense.n, 0.0);
    for (int i = 0; i < dense.n; ++i) {
      g[i] = dense.h[i];
      for (int k = 0; k < dense.n; ++k)
        if (q[k]) g[i] += dense.coupling(i, k);
    }
    resync();
  }

  double flip_delta(int i) const { return q[i] ? -g[i] : g[i]; }

  void flip(int i) {
    e += flip_delta(i);
    q[i] ^= 1;
    const double sign = q[i] ? 1.0 : -1.0;
    for (int k = 0; k < dense.n; ++k)
      if (k != i) g[k] += sign * dense.coupling(i, k);
  }

  void resync() {
    e = 0;
    for (int i = 0; i < dense.n; ++i)
      if (q[i]) {
        e += dense.h[i];
        for (int k = i + 1; k < dense.n; ++k)
          if (q[k]) e += dense.coupling(i, k);
      }
  }
};

std::vector<uint8_t> random_state(int n, Rng& rng) {
  std::vector<uint8_t> q(n);
  for (int i = 0; i < n; ++i) q[i] = rng.uniform() < 0.5 ? 1 : 0;
  return q;
}

SolveResult trivial_result(const Qubo& qubo) {
  SolveResult result;
  result.best_q.clear();
  result.best_energy = 0;
  result.samples.push_back({{}, 0.0, 1});
  (void)qubo;
  return result;
}

// Collects per-restart bests into a result with exactly re-verified energies.
SolveResult collect_restarts(const Qubo& qubo, std::vector<std::vector<uint8_t>> best_states) {
  SolveResult result;
  result.best_energy = std::numeric_limits<double>::infinity();
  for (auto& state : best_states) {
    const double e = energy(qubo, state);
    bool merged = false;
    for (Sample& sample : result.samples) {
      if (sample.q == state) {
        ++sample.count;
        merged = true;
        break;
      }
    }
    if (!merged) result.samples.push_back({state, e, 1});
    if (e < result.best_energy) {
      result.best_energy = e;
      result.best_q = std::move(state);
    }
  }
  return result;
}

struct StopWatch {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
        .count();
  }
};

}  // namespace

SolveResult solve_exhaustive(const Qubo& qubo, int cap) {
  StopWatch watch;
  const int n = qubo.num_vars;
  if (n > cap)
    throw TooLargeError("exhaustive search over " + std::to_string(n) +
                        " variables exceeds the cap of " + std::to_string(cap));
  if (n == 0) return trivial_result(qubo);

  const DenseQubo dense(qubo);
  LocalState state(dense, std::vector<uint8_t>(n, 0));

  uint64_t best_bits = 0;
  double best_e = state.e;  // empty assignment

  // Gray-code walk: step k flips bit ctz(k), visiting every assignment once.
  uint64_t bits = 0;
  const uint64_t total = 1ull << n;
  for (uint64_t k = 1; k < total; ++k) {
    if ((k & 0xFFFFF) == 0) state.resync();  // bound float drift on long walks
    const int b = std::countr_zero(k);
    state.flip(b);
    bits ^= 1ull << b;
    if (state.e < best_e || (state.e == best_e && bits < best_bits)) {
      best_e = state.e;
      best_bits = bits;
    }
  }

  SolveResult result;
  result.best_q.assign(n, 0);
  for (int i = 0; i < n; ++i) result.best_q[i] = (best_bits >> i) & 1;
  result.best_energy = energy(qubo, result.best_q);
  result.samples.push_back({result.best_q, result.best_energy, 1});
  result.wall_ms = watch.ms();
  return result;
}

SolveResult solve_sa(const Qubo& qubo, const SolveRequest& req) {
  StopWatch watch;
  const int n = qubo.num_vars;
  if (n == 0) return trivial_result(qubo);

  const DenseQubo dense(qubo);
  const double max_coeff = dense.max_abs_coefficient();
  const double t0 = req.schedule.t_initial > 0 ? req.schedule.t_initial
                                               : (max_coeff > 0 ? max_coeff : 1.0);
  const double tf = req.schedule.t_final > 0 ? req.schedule.t_final : 1e-3 * t0;
  const double factor = req.schedule.factor > 0
                            ? req.schedule.factor
                            : std::pow(tf / t0, 1.0 / (kDefaultSweeps - 1));

  std::vector<std::vector<uint8_t>> bests;
  for (int r = 0; r < req.restarts; ++r) {
    Rng rng(substream_seed(req.seed, static_cast<uint64_t>(r)));
    LocalState state(dense, random_state(n, rng));
    std::vector<uint8_t> best_q = state.q;
    double best_e = state.e;

    double t = t0;
    for (int sweep = 0; sweep < req.budget; ++sweep) {
      if (sweep % kEnergyResyncSweeps == 0) state.resync();
      for (int v = 0; v < n; ++v) {
        const double delta = state.flip_delta(v);
        if (delta <= 0 || rng.uniform() < std::exp(-delta / t)) {
          state.flip(v);
          if (state.e < best_e) {
            const double exact = energy(qubo, state.q);
            if (exact < best_e) {
              best_e = exact;
              best_q = state.q;
            }
          }
        }
      }
      t = std::max(tf, t * factor);
    }
    bests.push_back(std::move(best_q));
  }

  SolveResult result = collect_restarts(qubo, std::move(bests));
  result.wall_ms = watch.ms();
  return result;
}

SolveResult solve_tabu(const Qubo& qubo, const SolveRequest& req) {
  StopWatch watch;
  const int n = qubo.num_vars;
  if (n == 0) return trivial_result(qubo);

  const int tenure =
      req.tenure > 0 ? std::min(req.tenure, n) : std::max(1, std::min(n - 1, 7 + n / 8));

  const DenseQubo dense(qubo);
  std::vector<std::vector<uint8_t>> bests;
  for (int r = 0; r < req.restarts; ++r) {
    Rng rng(substream_seed(req.seed, static_cast<uint64_t>(r)));
    LocalState state(dense, random_state(n, rng));
    std::vector<uint8_t> best_q = state.q;
    double best_e = state.e;
    std::vector<int64_t> tabu_until(n, -1);

    for (int64_t iter = 0; iter < req.budget; ++iter) {
      if (iter % (kEnergyResyncSweeps * 4) == 0) state.resync();
      int chosen = -1;
      double chosen_delta = 0;
      bool chosen_admissible = false;
      for (int v = 0; v < n; ++v) {
        const double delta = state.flip_delta(v);
        const bool tabu = tabu_until[v] > iter;
        const bool admissible = !tabu || state.e + delta < best_e;  // aspiration
        if (!admissible && chosen_admissible) continue;
        const bool better = chosen < 0 || (admissible && !chosen_admissible) ||
                            (admissible == chosen_admissible && delta < chosen_delta);
        if (better) {
          chosen = v;
          chosen_delta = delta;
          chosen_admissible = admissible;
        }
      }
      state.flip(chosen);
      tabu_until[chosen] = iter + 1 + tenure;
      if (state.e < best_e) {
        const double exact = energy(qubo, state.q);
        if (exact < best_e) {
          best_e = exact;
          best_q = state.q;
        }
      }
    }
    bests.push_back(std::move(best_q));
  }

  SolveResult result = collect_restarts(qubo, std::move(bests));
  result.wall_ms = watch.ms();
  return result;
}

SolveResult solve(const Qubo& qubo, const SolveRequest& req) {
  switch (req.method) {
    case SolveMethod::Exhaustive: return solve_exhaustive(qubo, req.exhaustive_cap);
    case SolveMethod::SimAnneal: return solve_sa(qubo, req);
    case SolveMethod::Tabu: return solve_tabu(qubo, req);
  }
  throw DomainError("unknown solve method");
}

SecondaryStructure decode(const CandidateSet& set, std::span<const uint8_t> q) {
  if (q.size() != set.candidates.size())
    throw LengthMismatchError("bit vector has " + std::to_string(q.size()) + " entries, set has " +
                              std::to_string(set.candidates.size()) + " candidates");
  SecondaryStructure structure;
  structure.n = set.seq.size();
  std::vector<int> partner(static_cast<size_t>(structure.n) + 1, 0);
  for (size_t idx = 0; idx < q.size(); ++idx) {
    if (!q[idx]) continue;
    const Candidate& cand = set.candidates[idx];
    for (int t = 0; t < cand.length; ++t) {
      const int i = cand.first + t;
      const int j = cand.last - t;
      if (partner[i] != 0 && partner[i] != j) throw ConflictingPairsError(i);
      if (partner[j] != 0 && partner[j] != i) throw ConflictingPairsError(j);
      partner[i] = j;
      partner[j] = i;
      structure.add_pair(i, j);
    }
  }
  return structure;
}

std::string result_to_json(const SolveResult& result) {
  auto bits = [](const std::vector<uint8_t>& q) {
    std::string s;
    s.reserve(q.size());
    for (uint8_t b : q) s.push_back(b ? '1' : '0');
    return s;
  };
  nlohmann::json doc;
  doc["best_q"] = bits(result.best_q);
  doc["best_energy"] = result.best_energy;
  doc["wall_ms"] = result.wall_ms;
  doc["samples"] = nlohmann::json::array();
  for (const Sample& sample : result.samples)
    doc["samples"].push_back(
        {{"q", bits(sample.q)}, {"energy", sample.energy}, {"count", sample.count}});
  return doc.dump(2) + "\n";
}

}  // namespace qrna
