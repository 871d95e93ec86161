#include "qrna/stems.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "qrna/errors.hpp"

namespace qrna {

namespace {

bool candidate_order(const Candidate& a, const Candidate& b) {
  if (a.first != b.first) return a.first < b.first;
  if (a.last != b.last) return a.last < b.last;
  return a.length < b.length;
}

bool relation_order(const PairRelation& a, const PairRelation& b) {
  return a.i != b.i ? a.i < b.i : a.j < b.j;
}

bool intervals_intersect(int a_lo, int a_hi, int b_lo, int b_hi) {
  return a_lo <= b_hi && b_lo <= a_hi;
}

bool base_sets_intersect(const Candidate& a, const Candidate& b) {
  const int a5_lo = a.first, a5_hi = a.first + a.length - 1;
  const int a3_lo = a.last - a.length + 1, a3_hi = a.last;
  const int b5_lo = b.first, b5_hi = b.first + b.length - 1;
  const int b3_lo = b.last - b.length + 1, b3_hi = b.last;
  return intervals_intersect(a5_lo, a5_hi, b5_lo, b5_hi) ||
         intervals_intersect(a5_lo, a5_hi, b3_lo, b3_hi) ||
         intervals_intersect(a3_lo, a3_hi, b5_lo, b5_hi) ||
         intervals_intersect(a3_lo, a3_hi, b3_lo, b3_hi);
}

}  // namespace

const char* relation_name(RelationKind k) {
  switch (k) {
    case RelationKind::Overlap: return "OVERLAP";
    case RelationKind::Pseudoknot: return "PSEUDOKNOT";
    case RelationKind::Stacked: return "STACKED";
    case RelationKind::Independent: return "INDEPENDENT";
  }
  return "?";
}

int PairMatrix::count() const {
  return static_cast<int>(std::count(cells.begin(), cells.end(), uint8_t{1}));
}

PairMatrix pair_matrix(const RnaSequence& seq, const PairRule& rule, int min_loop) {
  if (min_loop < 0) throw DomainError("min_loop must be >= 0");
  PairMatrix m;
  m.n = seq.size();
  m.cells.assign(static_cast<size_t>(m.n) * m.n, 0);
  for (int i = 1; i <= m.n; ++i)
    for (int j = i + min_loop + 1; j <= m.n; ++j)
      if (rule.can_pair(seq.at1(i), seq.at1(j)))
        m.cells[static_cast<size_t>(i - 1) * m.n + (j - 1)] = 1;
  return m;
}

CandidateSet enumerate_stems(const RnaSequence& seq, const PairRule& rule, int m, int min_loop,
                             WeightMode mode, const NnTable* table) {
  if (m < 2) throw DomainError("minimum stem length must be >= 2");
  if (min_loop < 0) throw DomainError("min_loop must be >= 0");
  if (mode == WeightMode::NnEnergy && table == nullptr)
    throw DomainError("NnEnergy weighting requires a stacking table");

  CandidateSet set;
  set.seq = seq;
  set.kind = CandidateKind::Stems;
  set.weight_mode = mode;
  set.min_stem = m;
  set.min_loop = min_loop;

  const int n = seq.size();
  std::vector<double> step;  // stability score of the stack entered at cell i

  // Cells (i, c-i) with fixed i+j = c form one anti-diagonal; moving inward is
  // (i, j) -> (i+1, j-1). A run is a maximal block of consecutive valid cells.
  for (int c = 3; c <= 2 * n - 1; ++c) {
    const int i_lo = std::max(1, c - n);
    const int i_hi = (c - 1) / 2;
    int run_start = -1;
    for (int i = i_lo; i <= i_hi + 1; ++i) {
      bool valid = false;
      if (i <= i_hi) {
        const int j = c - i;
        valid = (j - i) > min_loop && rule.can_pair(seq.at1(i), seq.at1(j));
      }
      if (valid && run_start < 0) run_start = i;
      if (!valid && run_start >= 0) {
        const int run_end = i - 1;
        const int run_len = run_end - run_start + 1;
        if (run_len >= m) {
          step.assign(static_cast<size_t>(run_len), 0.0);
          if (mode == WeightMode::NnEnergy) {
            for (int s = run_start; s < run_end; ++s)
              step[s - run_start] = table->stack_score({seq.at1(s), seq.at1(c - s)},
                                                       {seq.at1(s + 1), seq.at1(c - s - 1)});
          }
          for (int len = m; len <= run_len; ++len) {
            for (int s = run_start; s <= run_end - len + 1; ++s) {
              Candidate cand;
              cand.first = s;
              cand.last = c - s;
              cand.length = len;
              cand.loop_size = cand.last - cand.first - 2 * len + 1;
              if (mode == WeightMode::BpLength) {
                cand.weight = len;
              } else {
                double sum = 0;
                for (int t = 0; t < len - 1; ++t) sum += step[s - run_start + t];
                if (sum <= 0) continue;  // net-destabilizing, cannot carry positive weight
                cand.weight = sum;
              }
              set.candidates.push_back(cand);
            }
          }
        }
        run_start = -1;
      }
    }
  }

  std::sort(set.candidates.begin(), set.candidates.end(), candidate_order);
  for (const Candidate& cand : set.candidates) set.mu = std::max(set.mu, cand.weight);
  return set;
}

CandidateSet enumerate_quartets(const RnaSequence& seq, const PairRule& rule, int min_loop,
                                const NnTable& table) {
  CandidateSet set;
  set.seq = seq;
  set.kind = CandidateKind::Quartets;
  set.weight_mode = WeightMode::NnEnergy;
  set.min_stem = 2;
  set.min_loop = min_loop;

  const int n = seq.size();
  for (int i = 1; i <= n; ++i) {
    for (int j = i + min_loop + 3; j <= n; ++j) {
      // quartet (i,j),(i+1,j-1); the inner pair carries the loop constraint
      if (!rule.can_pair(seq.at1(i), seq.at1(j))) continue;
      if (!rule.can_pair(seq.at1(i + 1), seq.at1(j - 1))) continue;
      Candidate cand;
      cand.first = i;
      cand.last = j;
      cand.length = 2;
      cand.loop_size = j - i - 3;
      cand.weight = table.stack_score({seq.at1(i), seq.at1(j)}, {seq.at1(i + 1), seq.at1(j - 1)});
      set.candidates.push_back(cand);
    }
  }

  std::sort(set.candidates.begin(), set.candidates.end(), candidate_order);
  for (const Candidate& cand : set.candidates) set.mu = std::max(set.mu, cand.weight);
  return set;
}

PairRelation classify_candidate_pair(const Candidate& a, const Candidate& b, int index_a,
                                     int index_b, bool quartets) {
  PairRelation rel;
  rel.i = index_a;
  rel.j = index_b;
  rel.kind = RelationKind::Independent;

  if (quartets && a.length == 2 && b.length == 2) {
    // b continues a inward when b's outer pair equals a's inner pair
    if (b.first == a.first + 1 && b.last == a.last - 1) {
      rel.kind = RelationKind::Stacked;
      rel.stack_dir = +1;
      return rel;
    }
    if (a.first == b.first + 1 && a.last == b.last - 1) {
      rel.kind = RelationKind::Stacked;
      rel.stack_dir = -1;
      return rel;
    }
  }

  if (base_sets_intersect(a, b)) {
    rel.kind = RelationKind::Overlap;
    return rel;
  }

  const Candidate& lo = a.first <= b.first ? a : b;
  const Candidate& hi = a.first <= b.first ? b : a;
  if (lo.first < hi.first && hi.first < lo.last && lo.last < hi.last) {
    rel.kind = RelationKind::Pseudoknot;
    // bases strictly inside [lo.first, hi.last] covered by neither stem
    rel.n_ss = hi.last - lo.first + 1 - 2 * lo.length - 2 * hi.length;
  }
  return rel;
}

std::vector<PairRelation> classify_pairs_brute(const CandidateSet& set) {
  std::vector<PairRelation> rels;
  const bool quartets = set.kind == CandidateKind::Quartets;
  const int count = static_cast<int>(set.candidates.size());
  for (int i = 0; i < count; ++i) {
    for (int j = i + 1; j < count; ++j) {
      PairRelation rel =
          classify_candidate_pair(set.candidates[i], set.candidates[j], i, j, quartets);
      if (rel.kind != RelationKind::Independent) rels.push_back(rel);
    }
  }
  return rels;
}

std::vector<PairRelation> classify_pairs_sweep(const CandidateSet& set) {
  // Sweep over candidates ordered by span start; only candidates whose spans
  // still reach the sweep position can relate to the incoming one.
  const bool quartets = set.kind == CandidateKind::Quartets;
  const int count = static_cast<int>(set.candidates.size());
  std::vector<int> order(count);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int x, int y) {
    const Candidate& cx = set.candidates[x];
    const Candidate& cy = set.candidates[y];
    return cx.first != cy.first ? cx.first < cy.first : x < y;
  });

  std::vector<PairRelation> rels;
  std::vector<int> active;
  for (int idx : order) {
    const Candidate& cand = set.candidates[idx];
    std::erase_if(active, [&](int other) { return set.candidates[other].last < cand.first; });
    for (int other : active) {
      const int i = std::min(other, idx);
      const int j = std::max(other, idx);
      PairRelation rel =
          classify_candidate_pair(set.candidates[i], set.candidates[j], i, j, quartets);
      if (rel.kind != RelationKind::Independent) rels.push_back(rel);
    }
    active.push_back(idx);
  }
  std::sort(rels.begin(), rels.end(), relation_order);
  return rels;
}

void classify_pairs(CandidateSet& set) {
  set.relations = set.candidates.size() < 512 ? classify_pairs_brute(set)
                                              : classify_pairs_sweep(set);
}

RnaSequence worst_case_sequence(int n) {
  if (n < 1) throw DomainError("sequence length must be >= 1");
  std::string text;
  text.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) text.push_back(i % 2 == 0 ? 'G' : 'C');
  return parse_sequence(text, "worst_case_" + std::to_string(n));
}

int64_t stem_count_closed_form(int64_t n, int64_t m) {
  if (n % 2 == 0) throw DomainError("closed form is derived for odd sequence lengths");
  if (n < 1) throw DomainError("sequence length must be >= 1");
  if (m < 2) throw DomainError("minimum stem length must be >= 2");
  // 1/24 (n^3 + n^2(9-6m) + n(12m^2-36m+23) + (-8m^3+36m^2-46m) + 15),
  // equivalently k(k+1)(k+2)/3 with k = (n-1)/2 - m + 1.
  const int64_t k = (n - 1) / 2 - m + 1;
  if (k < 1) return 0;
  return k * (k + 1) * (k + 2) / 3;
}

int64_t pair_count_closed_form(int64_t n, int64_t m) {
  const int64_t s = stem_count_closed_form(n, m);
  return s * (s - 1) / 2;
}

std::string serialize_candidates(const CandidateSet& set) {
  std::ostringstream out;
  char buf[256];
  std::snprintf(buf, sizeof(buf), "CANDSET %s %d %s %s %d %d %.12g\n",
                set.seq.id.empty() ? "-" : set.seq.id.c_str(), set.seq.size(),
                set.kind == CandidateKind::Quartets ? "quartets" : "stems",
                set.weight_mode == WeightMode::NnEnergy ? "nn" : "bp", set.min_stem, set.min_loop,
                set.mu);
  out << buf;
  out << "SEQ " << set.seq.str() << "\n";
  for (const Candidate& c : set.candidates) {
    std::snprintf(buf, sizeof(buf), "STEM %d %d %d %.12g\n", c.first, c.last, c.length, c.weight);
    out << buf;
  }
  for (const PairRelation& r : set.relations) {
    if (r.kind == RelationKind::Pseudoknot)
      std::snprintf(buf, sizeof(buf), "REL %d %d %s %d\n", r.i, r.j, relation_name(r.kind), r.n_ss);
    else
      std::snprintf(buf, sizeof(buf), "REL %d %d %s\n", r.i, r.j, relation_name(r.kind));
    out << buf;
  }
  return out.str();
}

CandidateSet parse_candidates(const std::string& text) {
  CandidateSet set;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  bool have_header = false;
  std::string seq_id = "-";
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string tag;
    ss >> tag;
    if (tag == "CANDSET") {
      std::string kind, mode;
      int n = 0;
      if (!(ss >> seq_id >> n >> kind >> mode >> set.min_stem >> set.min_loop >> set.mu))
        throw MalformedRowError(line_no, "bad CANDSET header");
      set.kind = kind == "quartets" ? CandidateKind::Quartets : CandidateKind::Stems;
      set.weight_mode = mode == "nn" ? WeightMode::NnEnergy : WeightMode::BpLength;
      have_header = true;
    } else if (tag == "SEQ") {
      std::string bases;
      if (!(ss >> bases)) throw MalformedRowError(line_no, "bad SEQ line");
      set.seq = parse_sequence(bases, seq_id == "-" ? "" : seq_id);
    } else if (tag == "STEM") {
      Candidate c;
      if (!(ss >> c.first >> c.last >> c.length >> c.weight))
        throw MalformedRowError(line_no, "bad STEM line");
      c.loop_size = c.last - c.first - 2 * c.length + 1;
      set.candidates.push_back(c);
    } else if (tag == "REL") {
      PairRelation r;
      std::string kind;
      if (!(ss >> r.i >> r.j >> kind)) throw MalformedRowError(line_no, "bad REL line");
      if (kind == "OVERLAP") {
        r.kind = RelationKind::Overlap;
      } else if (kind == "PSEUDOKNOT") {
        r.kind = RelationKind::Pseudoknot;
        if (!(ss >> r.n_ss)) throw MalformedRowError(line_no, "PSEUDOKNOT line lacks n_ss");
      } else if (kind == "STACKED") {
        r.kind = RelationKind::Stacked;
      } else {
        throw MalformedRowError(line_no, "unknown relation kind '" + kind + "'");
      }
      set.relations.push_back(r);
    } else {
      throw MalformedRowError(line_no, "unknown tag '" + tag + "'");
    }
  }
  if (!have_header) throw ParseError("candidate set lacks CANDSET header");
  return set;
}

}  // namespace qrna
