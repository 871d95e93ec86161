#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qrna/sequence.hpp"
#include "qrna/thermo.hpp"

namespace qrna {

enum class WeightMode { BpLength, NnEnergy };
enum class CandidateKind { Stems, Quartets };

// A candidate stem: `length` consecutive nested base pairs
// (first,last), (first+1,last-1), ..., occupying bases first..first+length-1
// and last-length+1..last. A stacked quartet is the length == 2 case.
//
// `weight` is the stem length in base pairs (BpLength mode) or the summed
// nearest-neighbor stability score, -sum dG, of its stacks (NnEnergy mode).
struct Candidate {
  int first = 0;
  int last = 0;
  int length = 0;
  double weight = 0;
  int loop_size = 0;  // last - first - 2*length + 1

  bool contains_base(int b) const {
    return (b >= first && b < first + length) || (b > last - length && b <= last);
  }
};

enum class RelationKind { Overlap, Pseudoknot, Stacked, Independent };

const char* relation_name(RelationKind k);

// A non-independent relation between candidates i < j (indices into the
// candidate list). For pseudoknots, n_ss counts the bases strictly inside the
// union span that belong to neither stem. For stacked quartets, stack_dir is
// +1 when candidate j continues candidate i inward and -1 when outward.
struct PairRelation {
  int i = 0;
  int j = 0;
  RelationKind kind = RelationKind::Independent;
  int n_ss = 0;
  int stack_dir = 0;
};

struct CandidateSet {
  RnaSequence seq;
  CandidateKind kind = CandidateKind::Stems;
  WeightMode weight_mode = WeightMode::BpLength;
  int min_stem = 2;
  int min_loop = 0;
  std::vector<Candidate> candidates;
  std::vector<PairRelation> relations;  // non-Independent pairs only
  double mu = 0;                        // max candidate weight, 0 when empty
};

// Strict upper-triangle pairing possibility matrix: entry (i,j), i < j, is
// true iff the bases can pair and j - i > min_loop.
struct PairMatrix {
  int n = 0;
  std::vector<uint8_t> cells;

  bool at(int i, int j) const { return cells[static_cast<size_t>(i - 1) * n + (j - 1)] != 0; }
  int count() const;
};

PairMatrix pair_matrix(const RnaSequence& seq, const PairRule& rule, int min_loop);

// Scans the pairing matrix anti-diagonals for maximal runs of consecutive
// pairs; every maximal run of length L yields all L-l+1 sub-stems of each
// length l >= m. In NnEnergy mode candidates whose summed stability score is
// not positive are dropped. Candidates come out sorted by (first, last, length).
CandidateSet enumerate_stems(const RnaSequence& seq, const PairRule& rule, int m, int min_loop,
                             WeightMode mode, const NnTable* table = nullptr);

// Stems of exactly two base pairs, weighted by the stability score of their
// single stack.
CandidateSet enumerate_quartets(const RnaSequence& seq, const PairRule& rule, int min_loop,
                                const NnTable& table);

// Classifies one unordered candidate pair. For quartet sets, a shared adjacent
// base pair makes the pair Stacked; otherwise intersecting base sets make it
// Overlap; otherwise crossing spans (first_a < first_b < last_a < last_b) make
// it Pseudoknot; anything else is Independent.
PairRelation classify_candidate_pair(const Candidate& a, const Candidate& b, int index_a,
                                     int index_b, bool quartets);

// Fills set.relations with every non-Independent pair. Uses the sweep over
// span-sorted candidates for large sets and the all-pairs check below 512
// candidates; both produce identical output.
void classify_pairs(CandidateSet& set);

std::vector<PairRelation> classify_pairs_brute(const CandidateSet& set);
std::vector<PairRelation> classify_pairs_sweep(const CandidateSet& set);

// Alternating G/C sequence of length n: the candidate-count worst case.
RnaSequence worst_case_sequence(int n);

// Closed-form number of candidate stems of length >= m on the alternating
// worst-case sequence of odd length n (loop constraint ignored). Throws
// DomainError for even n or m < 2.
int64_t stem_count_closed_form(int64_t n, int64_t m);

// Closed-form number of unordered candidate pairs: S(S-1)/2.
int64_t pair_count_closed_form(int64_t n, int64_t m);

// Line serialization for CLI piping:
//   CANDSET <id> <n> <stems|quartets> <bp|nn> <min_stem> <min_loop> <mu>
//   SEQ <bases>
//   STEM <first> <last> <length> <weight>
//   REL <i> <j> <OVERLAP|PSEUDOKNOT|STACKED> [n_ss]
std::string serialize_candidates(const CandidateSet& set);
CandidateSet parse_candidates(const std::string& text);

}  // namespace qrna
