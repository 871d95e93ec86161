#include "qrna/structure.hpp"

#include <algorithm>
#include <string>
#include <vector>

#include "qrna/errors.hpp"

namespace qrna {

void SecondaryStructure::add_pair(int i, int j) {
  if (i > j) std::swap(i, j);
  pairs.emplace(i, j);
}

void SecondaryStructure::validate() const {
  std::vector<int> partner(static_cast<size_t>(n) + 1, 0);
  for (const auto& [i, j] : pairs) {
    if (i < 1 || j > n || i >= j)
      throw Error("bad base pair (" + std::to_string(i) + "," + std::to_string(j) +
                  ") for length " + std::to_string(n));
    if (partner[i] != 0) throw ConflictingPairsError(i);
    if (partner[j] != 0) throw ConflictingPairsError(j);
    partner[i] = j;
    partner[j] = i;
  }
}

}  // namespace qrna
