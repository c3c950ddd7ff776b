#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "pivotex/error.hpp"

namespace pivotex {

// Calendar day, stored as days since 1970-01-01.
struct Date {
  int32_t days = 0;
  friend bool operator==(const Date&, const Date&) = default;
  friend auto operator<=>(const Date&, const Date&) = default;
};

Date parse_date(std::string_view iso);  // "YYYY-MM-DD", validated
std::string format_date(Date d);

inline int32_t day_distance(Date a, Date b) {
  return a.days >= b.days ? a.days - b.days : b.days - a.days;
}

using Tokens = std::vector<std::string>;

// Lowercases ASCII and splits on any ASCII byte that is not alphanumeric.
// Bytes >= 0x80 (UTF-8 multibyte sequences) are kept inside tokens
// unchanged, so non-Latin scripts split on spaces and ASCII punctuation.
Tokens tokenize(std::string_view text);

std::string join_tokens(const Tokens& tokens);

struct Sentence {
  int64_t id = -1;      // dense per corpus side, assigned at ingestion
  std::string doc_id;
  std::string lang;
  Date date;
  std::string text;
  Tokens tokens;
};

struct Document {
  std::string id;
  std::string lang;
  Date date;
  std::vector<int64_t> sentence_ids;
};

struct CorpusSide {
  std::string lang;
  std::vector<Document> documents;
  std::vector<Sentence> sentences;  // index == sentence id

  const Sentence& sentence(int64_t id) const;
  bool empty() const { return sentences.empty(); }
};

struct ComparableCorpus {
  CorpusSide source;
  CorpusSide target;
};

// Membership is case-insensitive; words are stored lowercased.
class StopWordList {
 public:
  StopWordList() = default;
  explicit StopWordList(const std::vector<std::string>& words);

  // One token per line; lines starting with '#' are ignored.
  static StopWordList from_file(const std::string& path);

  bool contains(std::string_view token) const;
  bool empty() const { return words_.empty(); }
  size_t size() const { return words_.size(); }

 private:
  std::unordered_set<std::string> words_;
};

// JSONL, one document per line: {"id": optional, "date": "YYYY-MM-DD",
// "lang": optional, "sentences": [ ... ]}. Sentence ids are assigned in
// (line, position) order starting at 0.
CorpusSide ingest_corpus(const std::string& path, const std::string& lang);
CorpusSide ingest_corpus_stream(std::istream& in, const std::string& lang,
                                const std::string& origin);

// Canonical JSONL form; ingest(canonical(x)) == x and the form is a
// fixed point of ingest-then-serialize.
std::string canonical_jsonl(const CorpusSide& side);

Tokens remove_stop_words(const Tokens& tokens, const StopWordList& stops);

}  // namespace pivotex
