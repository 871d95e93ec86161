#include "qrna/sequence.hpp"

#include <cctype>

#include "qrna/errors.hpp"

namespace qrna {

char base_char(Base b) {
  switch (b) {
    case Base::A: return 'A';
    case Base::C: return 'C';
    case Base::G: return 'G';
    case Base::U: return 'U';
  }
  return '?';
}

std::string RnaSequence::str() const {
  std::string s;
  s.reserve(bases.size());
  for (Base b : bases) s.push_back(base_char(b));
  return s;
}

RnaSequence parse_sequence(std::string_view text, std::string id) {
  RnaSequence seq;
  seq.id = std::move(id);
  int position = 0;
  for (char raw : text) {
    if (std::isspace(static_cast<unsigned char>(raw))) continue;
    ++position;
    char c = static_cast<char>(std::toupper(static_cast<unsigned char>(raw)));
    if (c == 'T') c = 'U';
    switch (c) {
      case 'A': seq.bases.push_back(Base::A); break;
      case 'C': seq.bases.push_back(Base::C); break;
      case 'G': seq.bases.push_back(Base::G); break;
      case 'U': seq.bases.push_back(Base::U); break;
      default: throw InvalidBaseError(position, raw);
    }
  }
  if (seq.bases.empty()) throw ParseError("empty sequence" + (seq.id.empty() ? "" : " '" + seq.id + "'"));
  return seq;
}

PairRule PairRule::standard() {
  PairRule rule;
  rule.allow(Base::G, Base::C);
  rule.allow(Base::A, Base::U);
  rule.allow(Base::G, Base::U);
  return rule;
}

void PairRule::allow(Base a, Base b) {
  allowed_[idx(a)][idx(b)] = true;
  allowed_[idx(b)][idx(a)] = true;
}

}  // namespace qrna
