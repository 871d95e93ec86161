#include "qrna/thermo.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "qrna/errors.hpp"

namespace qrna {

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingFileError(path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string format_value(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

Base base_from_char(char c, int line) {
  switch (c) {
    case 'A': return Base::A;
    case 'C': return Base::C;
    case 'G': return Base::G;
    case 'U': return Base::U;
    default: throw MalformedRowError(line, std::string("bad base '") + c + "' in stack key");
  }
}

// Splits a KEY<TAB>VALUE line; tolerates runs of spaces/tabs as the separator.
bool split_kv(const std::string& line, std::string& key, double& value, int line_no) {
  std::string stripped = line;
  if (auto pos = stripped.find('#'); pos != std::string::npos) stripped.resize(pos);
  size_t begin = stripped.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return false;
  size_t end = stripped.find_last_not_of(" \t\r\n");
  stripped = stripped.substr(begin, end - begin + 1);
  std::istringstream ss(stripped);
  std::string value_str;
  if (!(ss >> key >> value_str)) throw MalformedRowError(line_no, "expected KEY<TAB>VALUE");
  char* parse_end = nullptr;
  value = std::strtod(value_str.c_str(), &parse_end);
  if (parse_end == value_str.c_str() || *parse_end != '\0')
    throw MalformedRowError(line_no, "bad numeric value '" + value_str + "'");
  return true;
}

}  // namespace

std::filesystem::path default_data_dir() {
  if (const char* env = std::getenv("QRNA_DATA_DIR")) return env;
#ifdef QRNA_DATA_DIR
  return QRNA_DATA_DIR;
#else
  return "data";
#endif
}

std::string StackKey::str() const {
  std::string s;
  s += base_char(x);
  s += base_char(y);
  s += '/';
  s += base_char(z);
  s += base_char(w);
  return s;
}

NnTable NnTable::parse(const std::string& text) {
  NnTable table;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string key;
    double value;
    if (!split_kv(line, key, value, line_no)) continue;
    if (key.size() != 5 || key[2] != '/')
      throw MalformedRowError(line_no, "stack key must look like XY/ZW, got '" + key + "'");
    StackKey sk{base_from_char(key[0], line_no), base_from_char(key[1], line_no),
                base_from_char(key[3], line_no), base_from_char(key[4], line_no)};
    table.set(sk, value);
  }
  return table;
}

NnTable NnTable::load_file(const std::filesystem::path& path) { return parse(read_file(path)); }

NnTable NnTable::load_default() { return load_file(default_data_dir() / "nn_stack_37.tsv"); }

void NnTable::set(const StackKey& key, double dg) {
  entries_[std::min(key, key.flipped())] = dg;
}

bool NnTable::contains(const StackKey& key) const {
  return entries_.count(std::min(key, key.flipped())) > 0;
}

double NnTable::stack_energy(std::pair<Base, Base> outer, std::pair<Base, Base> inner) const {
  StackKey key{outer.first, inner.first, outer.second, inner.second};
  auto it = entries_.find(std::min(key, key.flipped()));
  if (it == entries_.end()) throw MissingEntryError(key.str());
  return it->second;
}

std::string NnTable::serialize() const {
  std::string out =
      "# Nearest-neighbor helix stacking free energies, dG(37C), kcal/mol.\n"
      "# Key XY/ZW: top strand 5'->3', bottom strand 3'->5'; X pairs Z, Y pairs W.\n";
  for (const auto& [key, value] : entries_) out += key.str() + "\t" + format_value(value) + "\n";
  return out;
}

LoopPenaltyTable LoopPenaltyTable::parse(const std::string& text) {
  LoopPenaltyTable table;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string key;
    double value;
    if (!split_kv(line, key, value, line_no)) continue;
    if (key.rfind("HAIRPIN_", 0) == 0) {
      int size = std::atoi(key.c_str() + 8);
      if (size < 3 || size > 7)
        throw MalformedRowError(line_no, "hairpin sizes outside 3..7 are implied, got " + key);
      table.set_hairpin(size, value);
    } else if (key == "INLINE_DEFAULT") {
      table.set_inline_default(value);
    } else if (key.rfind("INLINE_", 0) == 0) {
      int length = std::atoi(key.c_str() + 7);
      if (length < 2) throw MalformedRowError(line_no, "in-line stem length must be >= 2");
      table.set_inline(length, value);
    } else {
      throw MalformedRowError(line_no, "unknown key '" + key + "'");
    }
  }
  table.validate();
  return table;
}

LoopPenaltyTable LoopPenaltyTable::load_file(const std::filesystem::path& path) {
  return parse(read_file(path));
}

LoopPenaltyTable LoopPenaltyTable::load_default() {
  return load_file(default_data_dir() / "loop_penalties.tsv");
}

std::optional<double> LoopPenaltyTable::hairpin_penalty(int loop_size) const {
  if (loop_size <= 2) return std::nullopt;
  auto it = hairpin_.find(std::min(loop_size, 7));
  if (it == hairpin_.end()) throw MissingEntryError("HAIRPIN_" + std::to_string(loop_size));
  return it->second;
}

double LoopPenaltyTable::inline_stem_lambda(int stem_length) const {
  auto it = inline_.find(stem_length);
  return it != inline_.end() ? it->second : inline_default_;
}

void LoopPenaltyTable::set_hairpin(int size, double penalty) { hairpin_[size] = penalty; }

void LoopPenaltyTable::set_inline(int length, double lambda) { inline_[length] = lambda; }

std::string LoopPenaltyTable::serialize() const {
  std::string out = "# Hairpin-loop initiation penalties (kcal/mol) and in-line stem constants.\n";
  for (const auto& [size, value] : hairpin_)
    out += "HAIRPIN_" + std::to_string(size) + "\t" + format_value(value) + "\n";
  for (const auto& [length, value] : inline_)
    out += "INLINE_" + std::to_string(length) + "\t" + format_value(value) + "\n";
  out += "INLINE_DEFAULT\t" + format_value(inline_default_) + "\n";
  return out;
}

void LoopPenaltyTable::validate() const {
  double prev = 0;
  for (int size = 3; size <= 7; ++size) {
    auto it = hairpin_.find(size);
    if (it == hairpin_.end())
      throw ParseError("loop penalty table lacks HAIRPIN_" + std::to_string(size));
    if (it->second <= 0)
      throw ParseError("hairpin penalty for size " + std::to_string(size) + " must be positive");
    if (size > 3 && it->second > prev)
      throw ParseError("hairpin penalties must be non-increasing over sizes 3..7");
    prev = it->second;
  }
  for (const auto& [length, value] : inline_)
    if (value <= 0)
      throw ParseError("in-line stem constant for length " + std::to_string(length) +
                       " must be positive");
  if (inline_default_ <= 0) throw ParseError("INLINE_DEFAULT must be positive");
}

}  // namespace qrna
