#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "pivotex/corpus.hpp"

namespace pivotex {

struct NgdDiagnostics {
  uint64_t denominator_clamps = 0;
  uint64_t empty_sentence_defaults = 0;
};

// Document frequencies over a reference corpus; f(t) is the number of
// reference documents containing t, f(t_i,t_j) the number containing
// both. Pair counts are computed lazily from per-token postings and
// memoized; the memo is internally synchronized, so a built TermStats
// can be shared by concurrent readers.
class TermStats {
 public:
  static TermStats build(const std::vector<Tokens>& reference_docs);
  static TermStats build(const std::vector<Tokens>& reference_docs,
                         const std::unordered_set<std::string>& vocab);

  // Text format: header "#N<TAB>n", then "token<TAB>df" and
  // "token<TAB>token<TAB>co_df" lines. A loaded table treats missing
  // pairs as zero co-occurrence.
  static TermStats load(const std::string& path);
  void save(const std::string& path) const;

  int64_t df(const std::string& token) const;
  int64_t co_df(const std::string& a, const std::string& b) const;
  int64_t n_total() const { return n_total_; }

  NgdDiagnostics diagnostics() const;
  void count_empty_sentence_default() const;
  void count_denominator_clamp() const;

 private:
  static TermStats build_impl(const std::vector<Tokens>& docs,
                              const std::unordered_set<std::string>* vocab);

  // synchronized co_df memo and diagnostic counters, boxed so the stats
  // object stays movable
  struct Shared {
    std::unordered_map<std::string, int64_t> co_memo;  // key "a\tb", a <= b
    std::mutex mu;
    std::atomic<uint64_t> clamps{0};
    std::atomic<uint64_t> empty_defaults{0};
  };

  std::unordered_map<std::string, int64_t> df_;
  std::unordered_map<std::string, std::vector<int32_t>> postings_;  // sorted doc indices
  std::unique_ptr<Shared> shared_ = std::make_unique<Shared>();
  int64_t n_total_ = 0;
  bool lazy_ = true;
};

// NGD(t_i,t_j) = [max(lg f_i, lg f_j) - lg f_ij] / [lg N - min(lg f_i, lg f_j)]
// with base-2 logs and the special cases: equal terms -> 0; all three
// frequencies equal and positive -> 0; a zero-frequency term -> 1; zero
// co-frequency with both frequencies nonzero -> evaluated with f_ij = 1.
// A nonpositive denominator (df = N) is clamped to 1e-12 and counted in
// the diagnostics. Requires n_total >= 2.
double ngd_term(const TermStats& stats, const std::string& t_i, const std::string& t_j);

// Mean pairwise NGD over all ordered token-occurrence pairs, i.e. the
// double sum divided by |s_a|*|s_b|. An empty sentence yields 1 and is
// counted in the diagnostics.
double dis_ngd(const TermStats& stats, const Tokens& s_a, const Tokens& s_b);

using NgdRanked = std::vector<std::pair<int64_t, double>>;  // (id, dis_ngd)

// dis_ngd of every candidate against the query, in input order.
NgdRanked rank_dissimilarity(const TermStats& stats, const Tokens& query,
                             const std::vector<std::pair<int64_t, Tokens>>& candidates);

// Ids of the ceil(x_percent * n) candidates with the smallest values,
// ties by ascending id.
std::unordered_set<int64_t> prune_by_value(const NgdRanked& ranked, double x_percent);

std::unordered_set<int64_t> prune_search_space(
    const TermStats& stats, const Tokens& query,
    const std::vector<std::pair<int64_t, Tokens>>& candidates, double x_percent);

}  // namespace pivotex
