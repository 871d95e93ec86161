#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace qrna {

enum class Base : uint8_t { A = 0, C = 1, G = 2, U = 3 };

char base_char(Base b);

// An RNA sequence. Bases are stored 5'->3'; all indexing in this library is
// 1-based, matching the connectivity-table convention.
struct RnaSequence {
  std::string id;
  std::vector<Base> bases;

  int size() const { return static_cast<int>(bases.size()); }
  Base at1(int i) const { return bases[static_cast<size_t>(i - 1)]; }
  std::string str() const;
};

// Normalizes and validates raw sequence text: whitespace is stripped, letters
// are uppercased and T is read as U. Throws InvalidBaseError on anything else;
// the reported position is 1-based within the stripped text.
RnaSequence parse_sequence(std::string_view text, std::string id);

// The set of allowed (unordered) base pairs.
class PairRule {
 public:
  PairRule() = default;

  // {(G,C), (A,U), (G,U)}
  static PairRule standard();

  void allow(Base a, Base b);
  bool can_pair(Base a, Base b) const { return allowed_[idx(a)][idx(b)]; }

 private:
  static int idx(Base b) { return static_cast<int>(b); }
  bool allowed_[4][4] = {};
};

inline bool can_pair(Base a, Base b, const PairRule& rule) { return rule.can_pair(a, b); }

}  // namespace qrna
