#pragma once

#include <set>
#include <utility>

namespace qrna {

// A secondary structure: a set of unordered base pairs (stored i < j) over a
// sequence of length n. Each base index may appear in at most one pair.
struct SecondaryStructure {
  int n = 0;
  std::set<std::pair<int, int>> pairs;

  void add_pair(int i, int j);
  bool empty() const { return pairs.empty(); }

  // Throws Error if a pair is out of range, self-paired, or a base has two partners.
  void validate() const;
};

}  // namespace qrna
