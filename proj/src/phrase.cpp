#include "lba/phrase.hpp"

namespace lba::data {

namespace {

int find_word(const std::array<const char*, 4>& table, const std::string& w, const char* category) {
  for (int i = 0; i < 4; ++i)
    if (w == table[static_cast<size_t>(i)]) return i;
  fail(Error::Kind::Vocabulary, "word '" + w + "' is not a " + category);
}

int find_letter(const std::array<const char*, 4>& table, char c, const char* category) {
  for (int i = 0; i < 4; ++i)
    if (table[static_cast<size_t>(i)][0] == c) return i;
  fail(Error::Kind::Vocabulary, std::string("letter '") + c + "' does not abbreviate any " + category);
}

}  // namespace

PhraseId PhraseId::from_index(int idx) {
  if (idx < 0 || idx >= kPhraseCount) fail(Error::Kind::Vocabulary, "phrase index out of range");
  return {idx / 16, (idx / 4) % 4, idx % 4};
}

std::string PhraseId::abbrev() const {
  std::string s;
  s += kCommands[static_cast<size_t>(command)][0];
  s += kColors[static_cast<size_t>(color)][0];
  s += kPrepositions[static_cast<size_t>(preposition)][0];
  return s;
}

std::string PhraseId::text() const {
  return std::string(kCommands[static_cast<size_t>(command)]) + " " +
         kColors[static_cast<size_t>(color)] + " " + kPrepositions[static_cast<size_t>(preposition)];
}

PhraseId phrase_from_words(const std::string& command, const std::string& color,
                           const std::string& preposition) {
  return {find_word(kCommands, command, "command"), find_word(kColors, color, "color"),
          find_word(kPrepositions, preposition, "preposition")};
}

PhraseId phrase_from_abbrev(const std::string& abbrev) {
  if (abbrev.size() != 3) fail(Error::Kind::Vocabulary, "abbreviation '" + abbrev + "' must have 3 letters");
  return {find_letter(kCommands, abbrev[0], "command"), find_letter(kColors, abbrev[1], "color"),
          find_letter(kPrepositions, abbrev[2], "preposition")};
}

}  // namespace lba::data
