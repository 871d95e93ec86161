#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "qrna/sequence.hpp"
#include "qrna/stems.hpp"
#include "qrna/structure.hpp"
#include "qrna/thermo.hpp"

namespace qrna {

// One connectivity-table record: header length/title plus per-base rows.
struct CtRecord {
  struct Row {
    int index = 0;
    char base = 'N';
    int partner = 0;
  };
  int n = 0;
  std::string title;
  std::vector<Row> rows;
};

CtRecord parse_ct_record(const std::string& text);

// Parses a 6-column CT body (index, base, prev, next, partner, natural index)
// with a leading count/title header. Leading whitespace, ragged column widths
// and trailing text after the count are tolerated; modified or unknown bases
// and non-involutive pairings are rejected.
std::pair<RnaSequence, SecondaryStructure> parse_ct(const std::string& text);

std::string emit_ct(const RnaSequence& seq, const SecondaryStructure& structure);

struct KnownStem {
  int first = 0;
  int last = 0;
  int length = 0;
  double weight = 0;
};

// Maximal runs of consecutive nested pairs ((i,j),(i+1,j-1),...) of length
// >= m, weighted like enumerated candidates; isolated shorter runs are
// dropped. Returns the stems plus mu, the largest weight (0 when none).
// NnEnergy weighting needs the sequence and stacking table.
std::pair<std::vector<KnownStem>, double> known_stems(const SecondaryStructure& s, int m,
                                                      WeightMode mode,
                                                      const RnaSequence* seq = nullptr,
                                                      const NnTable* table = nullptr);

// True iff two pairs (i,j), (k,l) cross: i < k < j < l.
bool is_pseudoknotted(const SecondaryStructure& s);

struct ManifestEntry {
  std::string id;
  std::filesystem::path sequence_path;
  std::filesystem::path ct_path;
  bool pseudoknotted = false;
  enum class Split { Train, Test } split = Split::Train;
};

struct DatasetManifest {
  std::filesystem::path dir;
  std::vector<ManifestEntry> entries;
};

// Tab-separated manifest with header `id sequence ct pseudoknotted split`;
// paths resolve relative to the manifest's directory. Checks ids are unique
// and files exist; warns on stderr when the pseudoknotted flag disagrees with
// the parsed structure.
DatasetManifest load_manifest(const std::filesystem::path& path);

// First record of a FASTA file; bare sequence text (no '>') is accepted too,
// with the id falling back to the file stem.
RnaSequence parse_fasta(const std::filesystem::path& path);
RnaSequence parse_fasta_text(const std::string& text, const std::string& fallback_id);

}  // namespace qrna
