#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "pivotex/corpus.hpp"
#include "pivotex/translate.hpp"

namespace pivotex {

enum class EditOpKind { kMatch, kSubstitution, kInsertion, kDeletion, kShift };

struct EditOp {
  EditOpKind kind;
  int hyp_pos;  // -1 for insertions
  int ref_pos;  // -1 for deletions
};

// Unit-cost token alignment of hyp against ref. Replaying the ops on the
// hypothesis yields the reference; cost is the number of non-match ops.
// Backtrace ties prefer match, then substitution, deletion, insertion,
// which fixes one canonical alignment for a given pair.
struct EditAlignment {
  std::vector<EditOp> ops;
  int cost = 0;
};

EditAlignment edit_alignment(const Tokens& hyp, const Tokens& ref);

enum class Metric { kWer, kTer, kTerp };

std::string metric_name(Metric m);
Metric metric_from_name(const std::string& name);

struct MetricScore {
  Metric metric;
  double value;  // edits divided by reference length
};

struct TerpWeights {
  double stem = 0.2;
  double synonym = 0.2;
  double insertion = 1.0;
  double deletion = 1.0;
  double substitution = 1.0;
  double shift = 1.0;
};

// Stem map, synonym sets and phrase substitution table. Overlapping
// synonym sets are merged on insertion. Phrase entries apply in both
// orientations at their listed cost.
class TerpResources {
 public:
  void add_stem(const std::string& token, const std::string& stem);
  void add_synonym_set(const std::vector<std::string>& tokens);
  void add_phrase(const Tokens& a, const Tokens& b, double cost);

  // stems: token<TAB>stem per line; synonyms: one comma-separated set
  // per line; phrases: phrase<TAB>phrase<TAB>cost with space-separated
  // phrase tokens. Lines starting with '#' are skipped.
  void load_stems(const std::string& path);
  void load_synonyms(const std::string& path);
  void load_phrases(const std::string& path);

  const std::string& stem_of(const std::string& token) const;  // token itself if unmapped
  bool synonyms(const std::string& a, const std::string& b) const;
  bool empty() const;

  struct PhraseEntry {
    Tokens a;
    Tokens b;
    double cost;
  };
  const std::vector<PhraseEntry>& phrases() const { return phrases_; }

 private:
  std::unordered_map<std::string, std::string> stem_map_;
  std::unordered_map<std::string, int> synonym_id_;
  int next_synonym_id_ = 0;
  std::vector<PhraseEntry> phrases_;
};

// Levenshtein distance over tokens divided by |ref|.
MetricScore wer(const Tokens& hyp, const Tokens& ref);

// (edits + shifts) / |ref| with the greedy block-shift heuristic: a
// block may move only if it exactly matches a reference subsequence and
// currently contains at least one edit; the shift picked is the one
// whose edit-distance reduction most exceeds the shift cost, ties going
// to the earliest (start, length, destination).
MetricScore ter(const Tokens& hyp, const Tokens& ref);

// TER with substitutions discounted for equal stems or synonyms and with
// phrase-table substitutions at their listed cost. Empty resources and
// unit weights reduce it to ter().
MetricScore terp(const Tokens& hyp, const Tokens& ref, const TerpResources& res,
                 const TerpWeights& weights = {});

double metric_value(Metric m, const Tokens& hyp, const Tokens& ref,
                    const TerpResources& res = {}, const TerpWeights& weights = {});

struct BestCandidate {
  int64_t id;
  double score;
};

// Candidate with the minimal metric value against the query (the query
// is the reference), ties by ascending id; nullopt when empty.
std::optional<BestCandidate> best_candidate(
    const Tokens& query, const std::vector<std::pair<int64_t, const Tokens*>>& cands,
    Metric m, const TerpResources& res = {}, const TerpWeights& weights = {});

struct InvertedScore {
  double score = 0.0;
  int hypotheses_used = 0;
};

// Sum of metric(hypothesis_j, candidate) over the n-best translations of
// the source sentence; fewer hypotheses than n just shortens the sum.
InvertedScore inverted_translation_score(const NBestList& translations,
                                         const Tokens& candidate_tokens, Metric m,
                                         const TerpResources& res = {},
                                         const TerpWeights& weights = {});

InvertedScore inverted_translation_score(const TranslationAdapter& st_adapter,
                                         const Sentence& src_sentence,
                                         const Tokens& candidate_tokens, int n_best,
                                         Metric m, uint64_t seed,
                                         const TerpResources& res = {},
                                         const TerpWeights& weights = {});

struct Span {
  int begin = 0;
  int end = 0;
  friend bool operator==(const Span&, const Span&) = default;
};

struct TailTrim {
  bool trimmed = false;
  Span src;  // kept token range of the source pivot sentence
  Span tgt;
};

// Trailing tokens after the last matched token of the canonical
// alignment form each side's tail; if either tail is longer than
// max_tail times its side's length the pair is marked trimmed and both
// spans stop at their last match. Inputs are never mutated.
TailTrim tail_removal(const Tokens& src_pivot, const Tokens& tgt_pivot,
                      double max_tail);

enum class SelectedBy { kCandidateFilter, kInvertedTranslation };

struct ScoredPair {
  int64_t source_id = -1;
  int64_t target_id = -1;
  Metric metric = Metric::kTer;
  double score = 0.0;  // lower is better
  SelectedBy selected_by = SelectedBy::kCandidateFilter;
  bool tail_trimmed = false;
  Span src_span;  // pivot-token spans kept after tail removal
  Span tgt_span;
};

// Pairs with score <= threshold, sorted by ascending score then by
// (source_id, target_id).
std::vector<ScoredPair> accept_pairs(std::vector<ScoredPair> scored, double threshold);

}  // namespace pivotex
