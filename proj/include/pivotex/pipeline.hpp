#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "pivotex/corpus.hpp"
#include "pivotex/filter.hpp"
#include "pivotex/select.hpp"
#include "pivotex/translate.hpp"

namespace pivotex {

enum class FilterMode { kCandidateFilter, kInvertedTranslation };

// Defaults follow the modified-IR setup: NGD pruning of the search space
// at x_percent, NGD-blended candidate selection, a 7-day window and 10
// retrieved sentences. plain_ir() switches every NGD feature off and
// narrows to the 5-day / top-5 baseline.
struct PipelineConfig {
  int window_days = 7;
  double x_percent = 0.4;
  int n_top_ngd = 5;
  int m_top_ir = 7;
  int top_k_ir = 10;
  double lambda = 0.5;
  SelectMode mode = SelectMode::kUnion;
  Metric metric = Metric::kTer;
  FilterMode filter_mode = FilterMode::kCandidateFilter;
  int n_best_inverted = 5;
  double max_tail = 0.3;
  double threshold = std::numeric_limits<double>::infinity();
  double top_p_output = 0.5;
  double bm25_k1 = 1.2;
  double bm25_b = 0.75;
  uint64_t seed = 0;
  bool use_ngd_prune = true;
  bool use_modified_ir = true;
  bool one_to_one = false;
  int jobs = 1;
  TerpWeights terp_weights;

  static PipelineConfig plain_ir();
  void validate() const;
};

struct StageTimings {
  double translate_ms = 0.0;
  double stats_ms = 0.0;
  double index_ms = 0.0;
  double query_ms = 0.0;
  double emit_ms = 0.0;
};

// Counters follow the queries through the stages, so each one is at most
// the previous: translated >= pruned >= retrieved >= selected >=
// filtered >= tail_trimmed.
struct ExtractionReport {
  int64_t pairs_emitted = 0;
  int64_t translated = 0;
  int64_t pruned = 0;
  int64_t retrieved = 0;
  int64_t selected = 0;
  int64_t filtered = 0;
  int64_t tail_trimmed = 0;
  uint64_t ngd_denominator_clamps = 0;
  uint64_t ngd_empty_defaults = 0;
  StageTimings timings;
  PipelineConfig config;
};

struct ExtractionResult {
  std::vector<ScoredPair> pairs;
  ExtractionReport report;
};

// Figure-one flow: translate both sides into the pivot language, build
// term statistics and the inverted index over the target side, then per
// source sentence prune, retrieve, select and filter; accepted pairs are
// ranked by score and cut to the best top_p_output fraction.
// st_adapter is required exactly when filter_mode is inverted.
ExtractionResult run_extraction(const ComparableCorpus& corpus,
                                const TranslationAdapter& src_adapter,
                                const TranslationAdapter& tgt_adapter,
                                const TranslationAdapter* st_adapter,
                                const PipelineConfig& cfg,
                                const StopWordList& stops = StopWordList(),
                                const TerpResources& terp_res = TerpResources());

// TSV: source_id, target_id, score, source_text, target_text. Tabs and
// newlines inside text fields become spaces. A sidecar report lands at
// <path>.report.json.
void emit_corpus(const std::vector<ScoredPair>& pairs, const ComparableCorpus& corpus,
                 const ExtractionReport& report, const std::string& path);

std::string report_to_json(const ExtractionReport& report);

}  // namespace pivotex
