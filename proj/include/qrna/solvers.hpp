#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qrna/qubo.hpp"
#include "qrna/structure.hpp"

namespace qrna {

enum class SolveMethod { Exhaustive, SimAnneal, Tabu };

// Geometric cooling schedule. Zeroed fields are resolved per instance:
// t_initial = max |coefficient|, t_final = 1e-3 * t_initial, and the factor
// walks t_initial down to t_final over the default sweep budget. The factor is
// deliberately not refit to the requested budget: a longer run then replays a
// shorter run as its prefix (with the temperature floored at t_final), so
// raising the budget can only improve the best energy found.
struct AnnealSchedule {
  double t_initial = 0;
  double t_final = 0;
  double factor = 0;
};

struct SolveRequest {
  SolveMethod method = SolveMethod::Exhaustive;
  uint64_t seed = 0;
  int budget = 20000;      // sweeps per restart (SA) or moves per restart (tabu)
  int restarts = 8;
  int tenure = 0;          // tabu tenure; 0 resolves to min(n-1, 7 + n/8)
  int exhaustive_cap = 25; // refuse exhaustive search above this many variables
  AnnealSchedule schedule;
};

struct Sample {
  std::vector<uint8_t> q;
  double energy = 0;
  int count = 1;
};

struct SolveResult {
  std::vector<uint8_t> best_q;
  double best_energy = 0;
  std::vector<Sample> samples;
  double wall_ms = 0;
};

// Ground truth by enumeration over all 2^n assignments. Ties are broken toward
// the lowest value of q read as the integer sum q_i * 2^i (variable 0 is the
// least-significant bit). Throws TooLargeError above the cap.
SolveResult solve_exhaustive(const Qubo& qubo, int cap = 25);

// Metropolis single-bit-flip annealing under the geometric schedule, restarted
// `restarts` times from independent substreams; deterministic given the seed.
SolveResult solve_sa(const Qubo& qubo, const SolveRequest& req);

// Steepest-descent single-flip search with a tabu list and aspiration (a tabu
// flip is admissible when it beats the best energy seen); deterministic given
// the seed.
SolveResult solve_tabu(const Qubo& qubo, const SolveRequest& req);

SolveResult solve(const Qubo& qubo, const SolveRequest& req);

// Expands selected candidates into the union of their base pairs. Throws
// ConflictingPairsError if two selected candidates give one base different
// partners (candidates sharing an identical pair are fine).
SecondaryStructure decode(const CandidateSet& set, std::span<const uint8_t> q);

// JSON result document: best bit string, energy, per-sample table.
std::string result_to_json(const SolveResult& result);

}  // namespace qrna
