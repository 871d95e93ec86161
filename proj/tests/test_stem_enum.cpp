#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>
#include <tuple>
#include <vector>

#include "qrna/errors.hpp"
#include "qrna/rng.hpp"
#include "qrna/stems.hpp"

using namespace qrna;

namespace {

// Independent enumeration oracle: a stem (first, last, length) is valid iff
// every one of its pairs is allowed and respects the loop bound. No
// anti-diagonal scanning involved.
std::set<std::tuple<int, int, int>> brute_stems(const RnaSequence& seq, const PairRule& rule,
                                                int m, int min_loop) {
  std::set<std::tuple<int, int, int>> stems;
  const int n = seq.size();
  for (int first = 1; first <= n; ++first) {
    for (int last = first + 1; last <= n; ++last) {
      for (int len = m; first + len - 1 < last - len + 1; ++len) {
        bool ok = true;
        for (int t = 0; t < len && ok; ++t) {
          const int i = first + t;
          const int j = last - t;
          ok = i < j && (j - i) > min_loop && rule.can_pair(seq.at1(i), seq.at1(j));
        }
        if (ok) stems.insert({first, last, len});
      }
    }
  }
  return stems;
}

std::set<std::tuple<int, int, int>> as_tuples(const CandidateSet& set) {
  std::set<std::tuple<int, int, int>> stems;
  for (const Candidate& c : set.candidates) stems.insert({c.first, c.last, c.length});
  return stems;
}

// Literal relation oracle built on explicit base sets and pair-by-pair
// crossing checks.
RelationKind brute_kind(const Candidate& a, const Candidate& b, bool quartets) {
  std::set<int> bases_a, bases_b;
  std::set<std::pair<int, int>> pairs_a, pairs_b;
  for (int t = 0; t < a.length; ++t) {
    pairs_a.insert({a.first + t, a.last - t});
    bases_a.insert(a.first + t);
    bases_a.insert(a.last - t);
  }
  for (int t = 0; t < b.length; ++t) {
    pairs_b.insert({b.first + t, b.last - t});
    bases_b.insert(b.first + t);
    bases_b.insert(b.last - t);
  }
  if (quartets) {
    const bool share_pair = pairs_b.count({a.first + 1, a.last - 1}) > 0 ||
                            pairs_a.count({b.first + 1, b.last - 1}) > 0;
    if (share_pair && a.length == 2 && b.length == 2) return RelationKind::Stacked;
  }
  for (int base : bases_a)
    if (bases_b.count(base)) return RelationKind::Overlap;
  for (const auto& [i, j] : pairs_a)
    for (const auto& [k, l] : pairs_b)
      if ((i < k && k < j && j < l) || (k < i && i < l && l < j)) return RelationKind::Pseudoknot;
  return RelationKind::Independent;
}

int brute_n_ss(const Candidate& a, const Candidate& b) {
  const Candidate& lo = a.first <= b.first ? a : b;
  const Candidate& hi = a.first <= b.first ? b : a;
  int count = 0;
  for (int base = lo.first + 1; base < hi.last; ++base)
    if (!lo.contains_base(base) && !hi.contains_base(base)) ++count;
  return count;
}

RnaSequence random_sequence(int length, Rng& rng) {
  std::string text;
  for (int i = 0; i < length; ++i) text.push_back("ACGU"[rng.index(4)]);
  return parse_sequence(text, "random");
}

}  // namespace

TEST_CASE("pair_matrix marks exactly the allowed pairs above the loop bound") {
  const PairRule rule = PairRule::standard();
  const RnaSequence gcgcg = parse_sequence("GCGCG", "gcgcg");
  const PairMatrix m = pair_matrix(gcgcg, rule, 0);
  CHECK(m.count() == 6);

  int brute = 0;
  for (int i = 1; i <= 5; ++i)
    for (int j = i + 1; j <= 5; ++j) {
      const bool expect = (j - i) > 0 && rule.can_pair(gcgcg.at1(i), gcgcg.at1(j));
      CHECK(m.at(i, j) == expect);
      if (expect) ++brute;
    }
  CHECK(brute == 6);

  // strict upper triangle: the diagonal is never set
  const PairMatrix ex18 = pair_matrix(parse_sequence("GGAAGCAAACAUCCCUGU", "ex18"), rule, 3);
  for (int i = 1; i <= ex18.n; ++i) CHECK_FALSE(ex18.at(i, i));
}

TEST_CASE("enumerate_stems matches the brute-force oracle") {
  const PairRule rule = PairRule::standard();

  const CandidateSet gcgcg = enumerate_stems(parse_sequence("GCGCG", "x"), rule, 2, 0,
                                             WeightMode::BpLength);
  CHECK(gcgcg.candidates.size() == 2);
  CHECK(as_tuples(gcgcg) == brute_stems(gcgcg.seq, rule, 2, 0));
  CHECK(gcgcg.mu == 2);

  CHECK(enumerate_stems(parse_sequence("AAAA", "x"), rule, 2, 0, WeightMode::BpLength)
            .candidates.empty());

  Rng rng(20240817);
  for (int trial = 0; trial < 60; ++trial) {
    const RnaSequence seq = random_sequence(6 + static_cast<int>(rng.index(13)), rng);
    const int min_loop = static_cast<int>(rng.index(4));
    const int m = 2 + static_cast<int>(rng.index(2));
    const CandidateSet set = enumerate_stems(seq, rule, m, min_loop, WeightMode::BpLength);
    CHECK(as_tuples(set) == brute_stems(seq, rule, m, min_loop));
    for (const Candidate& c : set.candidates) {
      CHECK(c.weight == c.length);
      CHECK(c.loop_size == c.last - c.first - 2 * c.length + 1);
      CHECK(c.loop_size >= min_loop);
    }
  }
}

TEST_CASE("enumeration is deterministic and order-stable") {
  const PairRule rule = PairRule::standard();
  const RnaSequence seq = parse_sequence("GGAAGCAAACAUCCCUGU", "ex18");
  const CandidateSet a = enumerate_stems(seq, rule, 2, 3, WeightMode::BpLength);
  const CandidateSet b = enumerate_stems(seq, rule, 2, 3, WeightMode::BpLength);
  REQUIRE(a.candidates.size() == b.candidates.size());
  for (size_t i = 0; i < a.candidates.size(); ++i) {
    CHECK(a.candidates[i].first == b.candidates[i].first);
    CHECK(a.candidates[i].last == b.candidates[i].last);
    CHECK(a.candidates[i].length == b.candidates[i].length);
  }
  CHECK(std::is_sorted(a.candidates.begin(), a.candidates.end(),
                       [](const Candidate& x, const Candidate& y) {
                         return std::tuple(x.first, x.last, x.length) <
                                std::tuple(y.first, y.last, y.length);
                       }));
}

TEST_CASE("the worked 18-mer: a length-3 stem and a crossing length-2 pair") {
  const PairRule rule = PairRule::standard();
  CandidateSet set =
      enumerate_stems(parse_sequence("GGAAGCAAACAUCCCUGU", "ex18"), rule, 2, 3,
                      WeightMode::BpLength);
  classify_pairs(set);

  const auto tuples = as_tuples(set);
  CHECK(tuples.count({1, 14, 3}) == 1);  // the length-3 stem

  bool found_crossing_2x2 = false;
  for (const PairRelation& rel : set.relations) {
    if (rel.kind != RelationKind::Pseudoknot) continue;
    if (set.candidates[rel.i].length == 2 && set.candidates[rel.j].length == 2)
      found_crossing_2x2 = true;
  }
  CHECK(found_crossing_2x2);

  // the two stems that realize the crossing
  const auto find = [&](int first, int last, int length) {
    for (size_t i = 0; i < set.candidates.size(); ++i) {
      const Candidate& c = set.candidates[i];
      if (c.first == first && c.last == last && c.length == length) return static_cast<int>(i);
    }
    return -1;
  };
  const int a = find(2, 13, 2);
  const int b = find(5, 18, 2);
  REQUIRE(a >= 0);
  REQUIRE(b >= 0);
  bool classified = false;
  for (const PairRelation& rel : set.relations)
    if (rel.i == std::min(a, b) && rel.j == std::max(a, b)) {
      CHECK(rel.kind == RelationKind::Pseudoknot);
      CHECK(rel.n_ss == brute_n_ss(set.candidates[a], set.candidates[b]));
      classified = true;
    }
  CHECK(classified);
}

TEST_CASE("enumerate_quartets weighs single stacks") {
  const PairRule rule = PairRule::standard();
  const NnTable table = NnTable::load_default();

  const CandidateSet gcgcg = enumerate_quartets(parse_sequence("GCGCG", "x"), rule, 0, table);
  CHECK(gcgcg.candidates.size() == 2);

  CHECK(enumerate_quartets(parse_sequence("AAAA", "x"), rule, 0, table).candidates.empty());

  // every stem of length >= 2 decomposes into its adjacent quartets
  CandidateSet quartets =
      enumerate_quartets(parse_sequence("GGAAGCAAACAUCCCUGU", "ex18"), rule, 3, table);
  const auto tuples = as_tuples(quartets);
  CHECK(tuples.count({1, 14, 2}) == 1);
  CHECK(tuples.count({2, 13, 2}) == 1);  // the two quartets forming the length-3 stem
  for (const Candidate& c : quartets.candidates) {
    CHECK(c.length == 2);
    CHECK(c.weight ==
          table.stack_score({quartets.seq.at1(c.first), quartets.seq.at1(c.last)},
                            {quartets.seq.at1(c.first + 1), quartets.seq.at1(c.last - 1)}));
  }
}

TEST_CASE("stacked quartets share their middle pair") {
  const PairRule rule = PairRule::standard();
  const NnTable table = NnTable::load_default();
  CandidateSet set =
      enumerate_quartets(parse_sequence("GGAAGCAAACAUCCCUGU", "ex18"), rule, 3, table);
  classify_pairs(set);

  const auto find = [&](int first, int last) {
    for (size_t i = 0; i < set.candidates.size(); ++i)
      if (set.candidates[i].first == first && set.candidates[i].last == last)
        return static_cast<int>(i);
    return -1;
  };
  const int outer = find(1, 14);
  const int inner = find(2, 13);
  REQUIRE(outer >= 0);
  REQUIRE(inner >= 0);
  bool stacked = false;
  for (const PairRelation& rel : set.relations)
    if (rel.i == std::min(outer, inner) && rel.j == std::max(outer, inner)) {
      CHECK(rel.kind == RelationKind::Stacked);
      stacked = true;
    }
  CHECK(stacked);
}

TEST_CASE("classification agrees with the literal oracle and partitions") {
  const PairRule rule = PairRule::standard();
  const NnTable table = NnTable::load_default();
  Rng rng(7);
  for (int trial = 0; trial < 40; ++trial) {
    const RnaSequence seq = random_sequence(8 + static_cast<int>(rng.index(13)), rng);
    const bool quartets = trial % 2 == 0;
    CandidateSet set = quartets
                           ? enumerate_quartets(seq, rule, 1 + static_cast<int>(rng.index(3)), table)
                           : enumerate_stems(seq, rule, 2, static_cast<int>(rng.index(4)),
                                             WeightMode::BpLength);
    classify_pairs(set);

    std::map<std::pair<int, int>, RelationKind> listed;
    for (const PairRelation& rel : set.relations) {
      CHECK(rel.kind != RelationKind::Independent);
      listed[{rel.i, rel.j}] = rel.kind;
      if (rel.kind == RelationKind::Pseudoknot)
        CHECK(rel.n_ss == brute_n_ss(set.candidates[rel.i], set.candidates[rel.j]));
    }

    const int count = static_cast<int>(set.candidates.size());
    for (int i = 0; i < count; ++i)
      for (int j = i + 1; j < count; ++j) {
        const RelationKind expect = brute_kind(set.candidates[i], set.candidates[j], quartets);
        auto it = listed.find({i, j});
        const RelationKind got = it == listed.end() ? RelationKind::Independent : it->second;
        CHECK(got == expect);
      }
  }
}

TEST_CASE("sweep and brute classification are identical") {
  const PairRule rule = PairRule::standard();
  Rng rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    CandidateSet set = enumerate_stems(random_sequence(10 + static_cast<int>(rng.index(11)), rng),
                                       rule, 2, 0, WeightMode::BpLength);
    const auto brute = classify_pairs_brute(set);
    const auto sweep = classify_pairs_sweep(set);
    REQUIRE(brute.size() == sweep.size());
    for (size_t r = 0; r < brute.size(); ++r) {
      CHECK(brute[r].i == sweep[r].i);
      CHECK(brute[r].j == sweep[r].j);
      CHECK(brute[r].kind == sweep[r].kind);
      CHECK(brute[r].n_ss == sweep[r].n_ss);
    }
  }
}

TEST_CASE("nested disjoint stems are independent") {
  // one stem strictly inside the other's hairpin loop
  const PairRule rule = PairRule::standard();
  CandidateSet set;
  set.seq = parse_sequence("GGGAAGCAAAGCAACCC", "nested");
  // outer (1,17),(2,16),(3,15); inner (6,12),(7,11) sits in the loop 4..14
  Candidate outer{1, 17, 3, 3, 17 - 1 - 6 + 1};
  Candidate inner{6, 12, 2, 2, 12 - 6 - 4 + 1};
  const PairRelation rel = classify_candidate_pair(outer, inner, 0, 1, false);
  CHECK(rel.kind == RelationKind::Independent);
  CHECK(brute_kind(outer, inner, false) == RelationKind::Independent);
}

TEST_CASE("stems sharing a base overlap") {
  Candidate a{3, 12, 2, 2, 0};
  Candidate b{7, 16, 3, 3, 0};  // b's 5' arm is 7,8,9 -- no sharing with a {3,4,11,12}
  CHECK(classify_candidate_pair(a, b, 0, 1, false).kind == RelationKind::Pseudoknot);
  Candidate c{4, 16, 2, 2, 0};  // shares base 4 with a's 5' arm
  CHECK(classify_candidate_pair(a, c, 0, 1, false).kind == RelationKind::Overlap);
}

TEST_CASE("worst_case_sequence alternates G and C") {
  CHECK(worst_case_sequence(5).str() == "GCGCG");
  CHECK(worst_case_sequence(1).str() == "G");
  CHECK(worst_case_sequence(6).str() == "GCGCGC");
}

TEST_CASE("closed forms match enumeration on worst-case sequences") {
  const PairRule rule = PairRule::standard();

  CHECK(stem_count_closed_form(5, 2) == 2);
  CHECK(stem_count_closed_form(7, 2) == 8);
  CHECK(pair_count_closed_form(5, 2) == 1);
  CHECK(pair_count_closed_form(7, 2) == 28);
  CHECK_THROWS_AS(stem_count_closed_form(6, 2), DomainError);
  CHECK_THROWS_AS(stem_count_closed_form(7, 1), DomainError);

  // the shortest admissible sequence has two full-length anti-diagonals
  for (int m = 2; m <= 4; ++m) {
    const int n = 2 * m + 1;
    const auto set = enumerate_stems(worst_case_sequence(n), rule, m, 0, WeightMode::BpLength);
    CHECK(stem_count_closed_form(n, m) == static_cast<int64_t>(set.candidates.size()));
    CHECK(static_cast<int64_t>(set.candidates.size()) == 2);
  }

  // degenerate cases: S = 0 or 1 never produce pairs
  CHECK(stem_count_closed_form(5, 3) == 0);
  CHECK(pair_count_closed_form(5, 3) == 0);

  for (int n = 5; n <= 21; n += 2) {
    for (int m = 2; m <= 4; ++m) {
      if (n < 2 * m + 1) continue;
      const auto set = enumerate_stems(worst_case_sequence(n), rule, m, 0, WeightMode::BpLength);
      const int64_t s = static_cast<int64_t>(set.candidates.size());
      CHECK(stem_count_closed_form(n, m) == s);
      int64_t pairs = 0;
      for (int64_t i = 0; i < s; ++i)
        for (int64_t j = i + 1; j < s; ++j) ++pairs;
      CHECK(pair_count_closed_form(n, m) == pairs);
    }
  }
}

TEST_CASE("candidate sets serialize and parse back") {
  const PairRule rule = PairRule::standard();
  const NnTable table = NnTable::load_default();
  CandidateSet set =
      enumerate_quartets(parse_sequence("GGAAGCAAACAUCCCUGU", "ex18"), rule, 3, table);
  classify_pairs(set);

  const CandidateSet parsed = parse_candidates(serialize_candidates(set));
  CHECK(parsed.seq.str() == set.seq.str());
  CHECK(parsed.kind == set.kind);
  CHECK(parsed.weight_mode == set.weight_mode);
  CHECK(parsed.mu == doctest::Approx(set.mu));
  REQUIRE(parsed.candidates.size() == set.candidates.size());
  REQUIRE(parsed.relations.size() == set.relations.size());
  for (size_t i = 0; i < set.candidates.size(); ++i) {
    CHECK(parsed.candidates[i].first == set.candidates[i].first);
    CHECK(parsed.candidates[i].last == set.candidates[i].last);
    CHECK(parsed.candidates[i].length == set.candidates[i].length);
    CHECK(parsed.candidates[i].weight == doctest::Approx(set.candidates[i].weight));
  }
}

TEST_CASE("nn-energy stems carry positive summed scores") {
  const PairRule rule = PairRule::standard();
  const NnTable table = NnTable::load_default();
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const CandidateSet set = enumerate_stems(random_sequence(12 + static_cast<int>(rng.index(9)), rng),
                                             rule, 2, 3, WeightMode::NnEnergy, &table);
    for (const Candidate& c : set.candidates) CHECK(c.weight > 0);
  }
  // a pure GU/UG helix is net destabilizing and gets dropped
  const CandidateSet gu = enumerate_stems(parse_sequence("GUAAAAUG", "gu"), rule, 2, 3,
                                          WeightMode::NnEnergy, &table);
  for (const Candidate& c : gu.candidates) CHECK(c.weight > 0);
}

TEST_CASE("stem weights in nn mode sum the stack scores") {
  const PairRule rule = PairRule::standard();
  const NnTable table = NnTable::load_default();
  const RnaSequence seq = parse_sequence("GGGCAAAAGCCC", "hp4");
  const CandidateSet set = enumerate_stems(seq, rule, 2, 3, WeightMode::NnEnergy, &table);
  for (const Candidate& c : set.candidates) {
    double expect = 0;
    for (int t = 0; t < c.length - 1; ++t)
      expect += table.stack_score({seq.at1(c.first + t), seq.at1(c.last - t)},
                                  {seq.at1(c.first + t + 1), seq.at1(c.last - t - 1)});
    CHECK(c.weight == doctest::Approx(expect));
  }
}
