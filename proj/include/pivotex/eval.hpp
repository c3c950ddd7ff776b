#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "pivotex/pipeline.hpp"

namespace pivotex {

struct GoldAlignment {
  std::set<std::pair<int64_t, int64_t>> pairs;  // (source_id, target_id)

  // TSV: source_id<TAB>target_id per line
  static GoldAlignment from_file(const std::string& path);
  void save(const std::string& path) const;
};

enum class Comparability { kHigh, kLow };

// Knobs of the synthetic comparable corpus. Two pseudo-languages with
// disjoint vocabularies are linked through per-token dictionaries into a
// shared pivot vocabulary; planted pairs are dictionary images of each
// other up to per-token noise and a bounded date offset. High
// comparability draws distractors from the same topic pools as the
// planted pairs, low comparability from disjoint per-side pools.
struct SynthSpec {
  int n_parallel = 100;
  int n_distractors_per_side = 900;
  int date_jitter_days = 0;
  double noise_rate = 0.0;  // per-token corruption on the target side
  Comparability comparability = Comparability::kHigh;
  uint64_t seed = 0;

  int date_range_days = 30;
  int min_sentence_len = 4;
  int max_sentence_len = 9;
  int topics = 8;
  int concepts_per_topic = 30;

  void validate() const;
};

struct SynthResult {
  ComparableCorpus corpus;
  GoldAlignment gold;
  ProbDictionary src_pivot;  // source token -> pivot token
  ProbDictionary tgt_pivot;  // target token -> pivot token
  ProbDictionary src_tgt;    // source token -> target token
};

SynthResult generate_synthetic(const SynthSpec& spec);

struct Scores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// precision = |extracted & gold| / |extracted|, recall over |gold|,
// f1 = 2pr/(p+r). Empty-set conventions: nothing extracted scores
// precision 1; both sets empty scores (1, 1, 1); extracted nonempty
// against empty gold scores (0, 0, 0).
Scores score_extraction(const std::vector<std::pair<int64_t, int64_t>>& extracted,
                        const GoldAlignment& gold);

Scores score_extraction(const std::vector<ScoredPair>& extracted,
                        const GoldAlignment& gold);

struct LabeledConfig {
  std::string label;
  PipelineConfig config;
};

struct CompareRow {
  std::string label;
  bool ok = false;
  std::string error;
  Scores scores;
  int64_t pairs = 0;
  double seconds = 0.0;
};

// Runs the pipeline once per config on the same corpus and scores each
// run against the gold alignment. A failing run produces a row with its
// error and the remaining rows still execute. Rows run sequentially so
// the timings are comparable.
std::vector<CompareRow> compare_runs(const ComparableCorpus& corpus,
                                     const TranslationAdapter& src_adapter,
                                     const TranslationAdapter& tgt_adapter,
                                     const TranslationAdapter* st_adapter,
                                     const std::vector<LabeledConfig>& configs,
                                     const GoldAlignment& gold,
                                     const StopWordList& stops = StopWordList());

// Header: label,precision,recall,f1,pairs,seconds
std::string comparison_csv(const std::vector<CompareRow>& rows);
std::string comparison_table(const std::vector<CompareRow>& rows);

}  // namespace pivotex
