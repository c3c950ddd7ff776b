#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "pivotex/corpus.hpp"

namespace pivotex {

struct IrHit {
  int64_t sentence_id = -1;
  double ir_score = 0.0;
};

struct Bm25Params {
  double k1 = 1.2;
  double b = 0.75;
};

// A sentence as presented to the index: pivot tokens plus the date used
// for window restriction.
struct IndexedSentence {
  int64_t id = -1;
  Date date;
  Tokens tokens;
};

// Sentence-level inverted index with BM25 ranking. Stop words are
// excluded at build time; sentences that become empty are still counted
// in n_docs with length 0. Immutable once built, safe for concurrent
// queries.
//
// BM25 here uses idf(t) = ln(1 + (N - df + 0.5)/(df + 0.5)), which is
// nonnegative for every df <= N, so the configured floor at 0 never
// produces negative contributions and single-document indexes keep
// positive scores. Repeated query tokens contribute once per occurrence.
class InvertedIndex {
 public:
  static InvertedIndex build(const std::vector<IndexedSentence>& sentences,
                             const StopWordList& stops);

  double bm25_score(const Tokens& query, int64_t sentence_id,
                    const Bm25Params& params = {}) const;

  // Scores only sentences with |date - query_date| <= window_days (and,
  // when given, ids in restrict_to). Hits are sentences with score > 0,
  // sorted by descending score then ascending id, truncated to top_k.
  std::vector<IrHit> query_window(const Tokens& query, Date query_date,
                                  int window_days, int top_k,
                                  const Bm25Params& params = {},
                                  const std::unordered_set<int64_t>* restrict_to =
                                      nullptr) const;

  // Ids of indexed sentences dated within the window, ascending.
  std::vector<int64_t> ids_in_window(Date query_date, int window_days) const;

  int64_t n_docs() const { return n_docs_; }
  double avg_len() const { return avg_len_; }
  int32_t doc_length(int64_t id) const;
  Date date_of(int64_t id) const;
  bool has(int64_t id) const { return doc_lengths_.count(id) > 0; }

  // Binary cache with a versioned magic header; regeneration is always
  // possible, the cache is just a shortcut.
  void save(const std::string& path) const;
  static InvertedIndex load(const std::string& path);

 private:
  struct Posting {
    int64_t sentence_id;
    int32_t tf;
  };
  std::unordered_map<std::string, std::vector<Posting>> postings_;
  std::unordered_map<int64_t, int32_t> doc_lengths_;
  std::unordered_map<int64_t, Date> date_of_;
  std::vector<std::pair<int32_t, int64_t>> by_date_;  // (days, id), sorted
  double avg_len_ = 0.0;
  int64_t n_docs_ = 0;

  double idf(const std::string& token) const;
};

}  // namespace pivotex
