#ifndef LBA_PHRASE_HPP_
#define LBA_PHRASE_HPP_

#include <array>
#include <string>

#include "lba/error.hpp"

// The authentication-phrase space: command x color x preposition, 64 values.
// Each phrase is abbreviated by the first letters of its three words, which
// are distinct within every category, so abbreviations are unique.

namespace lba::data {

inline constexpr std::array<const char*, 4> kCommands = {"bin", "lay", "place", "set"};
inline constexpr std::array<const char*, 4> kColors = {"blue", "green", "red", "white"};
inline constexpr std::array<const char*, 4> kPrepositions = {"at", "by", "in", "with"};
inline constexpr int kPhraseCount = 64;

struct PhraseId {
  int command = 0, color = 0, preposition = 0;  // indices into the tables

  int index() const { return (command * 4 + color) * 4 + preposition; }
  static PhraseId from_index(int idx);

  std::string abbrev() const;
  std::string text() const;  // e.g. "place blue at"

  bool operator==(const PhraseId&) const = default;
};

// Throws Error(Vocabulary) when a word is not in its category.
PhraseId phrase_from_words(const std::string& command, const std::string& color,
                           const std::string& preposition);

// Throws Error(Vocabulary) on an unknown abbreviation.
PhraseId phrase_from_abbrev(const std::string& abbrev);

}  // namespace lba::data

#endif  // LBA_PHRASE_HPP_
