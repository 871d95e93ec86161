#include "qrna/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
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

bool parse_int(const std::string& token, int& out) {
  try {
    size_t used = 0;
    out = std::stoi(token, &used);
    return used == token.size();
  } catch (...) {
    return false;
  }
}

}  // namespace

CtRecord parse_ct_record(const std::string& text) {
  CtRecord record;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ss(line);
    std::vector<std::string> tokens;
    std::string token;
    while (ss >> token) tokens.push_back(token);
    if (tokens.empty() || tokens[0][0] == '#') continue;

    if (!have_header) {
      if (!parse_int(tokens[0], record.n) || record.n < 1)
        throw MalformedRowError(line_no, "header must start with the base count");
      for (size_t t = 1; t < tokens.size(); ++t) {
        if (t > 1) record.title += ' ';
        record.title += tokens[t];
      }
      have_header = true;
      continue;
    }

    if (static_cast<int>(record.rows.size()) == record.n)
      throw LengthMismatchError("more rows than the header count of " + std::to_string(record.n));
    if (tokens.size() < 6) throw MalformedRowError(line_no, "expected 6 columns");
    CtRecord::Row row;
    if (!parse_int(tokens[0], row.index))
      throw MalformedRowError(line_no, "bad base index '" + tokens[0] + "'");
    if (row.index != static_cast<int>(record.rows.size()) + 1)
      throw MalformedRowError(line_no, "base index " + tokens[0] + " out of sequence");
    if (tokens[1].size() != 1) throw MalformedRowError(line_no, "bad base column '" + tokens[1] + "'");
    row.base = tokens[1][0];
    if (!parse_int(tokens[4], row.partner))
      throw MalformedRowError(line_no, "bad partner index '" + tokens[4] + "'");
    record.rows.push_back(row);
  }
  if (!have_header) throw ParseError("empty connectivity table");
  if (static_cast<int>(record.rows.size()) != record.n)
    throw LengthMismatchError("header claims " + std::to_string(record.n) + " bases, found " +
                              std::to_string(record.rows.size()) + " rows");
  return record;
}

std::pair<RnaSequence, SecondaryStructure> parse_ct(const std::string& text) {
  const CtRecord record = parse_ct_record(text);

  std::string bases;
  bases.reserve(record.rows.size());
  for (const auto& row : record.rows) bases.push_back(row.base);
  RnaSequence seq = parse_sequence(bases, record.title.empty() ? "ct" : record.title);

  SecondaryStructure structure;
  structure.n = record.n;
  for (const auto& row : record.rows) {
    const int p = row.partner;
    if (p == 0) continue;
    if (p < 1 || p > record.n || p == row.index) throw InconsistentPairingError(row.index, p);
    if (record.rows[static_cast<size_t>(p - 1)].partner != row.index)
      throw InconsistentPairingError(row.index, p);
    if (p > row.index) structure.add_pair(row.index, p);
  }
  structure.validate();
  return {std::move(seq), std::move(structure)};
}

std::string emit_ct(const RnaSequence& seq, const SecondaryStructure& structure) {
  std::vector<int> partner(static_cast<size_t>(seq.size()) + 1, 0);
  for (const auto& [i, j] : structure.pairs) {
    partner[i] = j;
    partner[j] = i;
  }
  std::ostringstream out;
  out << seq.size() << " " << (seq.id.empty() ? "structure" : seq.id) << "\n";
  char buf[96];
  for (int i = 1; i <= seq.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%d %c %d %d %d %d\n", i, base_char(seq.at1(i)), i - 1,
                  i + 1 <= seq.size() ? i + 1 : 0, partner[i], i);
    out << buf;
  }
  return out.str();
}

std::pair<std::vector<KnownStem>, double> known_stems(const SecondaryStructure& s, int m,
                                                      WeightMode mode, const RnaSequence* seq,
                                                      const NnTable* table) {
  if (m < 2) throw DomainError("minimum stem length must be >= 2");
  if (mode == WeightMode::NnEnergy && (seq == nullptr || table == nullptr))
    throw DomainError("NnEnergy weighting requires the sequence and stacking table");

  std::vector<KnownStem> stems;
  double mu = 0;
  for (const auto& [i, j] : s.pairs) {
    if (s.pairs.count({i - 1, j + 1})) continue;  // not the outermost pair of its run
    int length = 1;
    while (i + length < j - length && s.pairs.count({i + length, j - length})) ++length;
    if (length < m) continue;
    KnownStem stem{i, j, length, 0};
    if (mode == WeightMode::BpLength) {
      stem.weight = length;
    } else {
      for (int t = 0; t < length - 1; ++t)
        stem.weight += table->stack_score({seq->at1(i + t), seq->at1(j - t)},
                                          {seq->at1(i + t + 1), seq->at1(j - t - 1)});
    }
    mu = std::max(mu, stem.weight);
    stems.push_back(stem);
  }
  std::sort(stems.begin(), stems.end(),
            [](const KnownStem& a, const KnownStem& b) { return a.first < b.first; });
  return {std::move(stems), mu};
}

bool is_pseudoknotted(const SecondaryStructure& s) {
  for (const auto& [i, j] : s.pairs)
    for (const auto& [k, l] : s.pairs)
      if (i < k && k < j && j < l) return true;
  return false;
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  DatasetManifest manifest;
  manifest.dir = path.parent_path();

  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  bool have_header = false;
  std::set<std::string> ids;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::vector<std::string> cols;
    std::string col;
    while (std::getline(ss, col, '\t')) cols.push_back(col);
    if (!have_header) {
      if (cols.size() < 5 || cols[0] != "id")
        throw MalformedRowError(line_no, "expected header: id sequence ct pseudoknotted split");
      have_header = true;
      continue;
    }
    if (cols.size() < 5) throw MalformedRowError(line_no, "expected 5 tab-separated columns");

    ManifestEntry entry;
    entry.id = cols[0];
    if (!ids.insert(entry.id).second) throw DuplicateIdError(entry.id);
    entry.sequence_path = manifest.dir / cols[1];
    entry.ct_path = manifest.dir / cols[2];
    if (cols[3] == "true" || cols[3] == "1") {
      entry.pseudoknotted = true;
    } else if (cols[3] == "false" || cols[3] == "0") {
      entry.pseudoknotted = false;
    } else {
      throw MalformedRowError(line_no, "pseudoknotted must be true/false");
    }
    if (cols[4] == "train") {
      entry.split = ManifestEntry::Split::Train;
    } else if (cols[4] == "test") {
      entry.split = ManifestEntry::Split::Test;
    } else {
      throw MalformedRowError(line_no, "split must be train/test");
    }
    if (!std::filesystem::exists(entry.sequence_path))
      throw MissingFileError(entry.sequence_path.string());
    if (!std::filesystem::exists(entry.ct_path)) throw MissingFileError(entry.ct_path.string());

    const auto [seq, structure] = parse_ct(read_file(entry.ct_path));
    if (is_pseudoknotted(structure) != entry.pseudoknotted)
      std::cerr << "warning: manifest flags '" << entry.id << "' as "
                << (entry.pseudoknotted ? "pseudoknotted" : "pseudoknot-free")
                << " but its structure says otherwise\n";
    manifest.entries.push_back(std::move(entry));
  }
  if (!have_header) throw ParseError("manifest lacks a header row");
  return manifest;
}

RnaSequence parse_fasta_text(const std::string& text, const std::string& fallback_id) {
  std::istringstream in(text);
  std::string line;
  std::string id = fallback_id;
  std::string bases;
  bool in_record = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '>') {
      if (in_record) break;  // first record only
      in_record = true;
      std::istringstream header(line.substr(1));
      header >> id;
      continue;
    }
    bases += line;
  }
  return parse_sequence(bases, id);
}

RnaSequence parse_fasta(const std::filesystem::path& path) {
  return parse_fasta_text(read_file(path), path.stem().string());
}

}  // namespace qrna
