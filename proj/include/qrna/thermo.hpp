#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>

#include "qrna/sequence.hpp"

namespace qrna {

// Directory holding the shipped thermodynamic data files. Compile-time default,
// overridable with the QRNA_DATA_DIR environment variable.
std::filesystem::path default_data_dir();

// A helix stack: two adjacent base pairs.
//
//   5'-X Y-3'        top strand 5'->3' is X,Y; bottom strand, written 3'->5'
//   3'-Z W-5'        underneath it, is Z,W. X pairs Z and Y pairs W.
//
// Reading the duplex from the other strand gives WZ/YX, so keys are looked up
// under both orientations.
struct StackKey {
  Base x, y, z, w;

  StackKey flipped() const { return {w, z, y, x}; }
  std::string str() const;
  auto operator<=>(const StackKey&) const = default;
};

// Nearest-neighbor helix stacking free energies, dG at 37 C in kcal/mol.
// Stabilizing stacks have negative dG; the "stability score" consumed by the
// quartet/stem energy models is -dG, so larger means more stable.
class NnTable {
 public:
  static NnTable parse(const std::string& text);
  static NnTable load_file(const std::filesystem::path& path);
  static NnTable load_default();

  void set(const StackKey& key, double dg);
  bool contains(const StackKey& key) const;
  size_t size() const { return entries_.size(); }

  // Free energy of `inner` stacked 3'-adjacent on `outer`: outer = (X,Z) at
  // positions (i, j), inner = (Y,W) at (i+1, j-1). Throws MissingEntryError.
  double stack_energy(std::pair<Base, Base> outer, std::pair<Base, Base> inner) const;
  double stack_score(std::pair<Base, Base> outer, std::pair<Base, Base> inner) const {
    return -stack_energy(outer, inner);
  }

  std::string serialize() const;

 private:
  std::map<StackKey, double> entries_;
};

// Hairpin-loop initiation penalties (kcal/mol scale) plus the in-line stem
// penalty constants used by the pseudoknot term.
//
// Loops of size <= 2 are structurally forbidden. Sizes 3..7 come from the
// table; larger loops reuse the size-7 value. The in-line map is keyed by stem
// length in base pairs and falls back to a configured default.
class LoopPenaltyTable {
 public:
  static LoopPenaltyTable parse(const std::string& text);
  static LoopPenaltyTable load_file(const std::filesystem::path& path);
  static LoopPenaltyTable load_default();

  // nullopt means the loop size is forbidden.
  std::optional<double> hairpin_penalty(int loop_size) const;

  double inline_stem_lambda(int stem_length) const;
  double inline_default() const { return inline_default_; }

  void set_hairpin(int size, double penalty);
  void set_inline(int length, double lambda);
  void set_inline_default(double lambda) { inline_default_ = lambda; }

  std::string serialize() const;

  // Enforces the table shape: sizes 3..7 present, positive, non-increasing.
  void validate() const;

 private:
  std::map<int, double> hairpin_;
  std::map<int, double> inline_;
  double inline_default_ = 1.0;
};

inline std::optional<double> hairpin_penalty(const LoopPenaltyTable& table, int loop_size) {
  return table.hairpin_penalty(loop_size);
}

inline double stack_energy(const NnTable& table, std::pair<Base, Base> outer,
                           std::pair<Base, Base> inner) {
  return table.stack_energy(outer, inner);
}

}  // namespace qrna
