#pragma once

#include <cstdint>
#include <vector>

#include "pivotex/ir.hpp"
#include "pivotex/ngd.hpp"

namespace pivotex {

enum class SelectMode { kUnion, kIntersection };

struct CandidateScore {
  int64_t id = -1;
  double ir_score = 0.0;
  double ngd_value = 1.0;
  double combined = 0.0;
};

struct CandidateSet {
  int64_t query_id = -1;
  SelectMode mode = SelectMode::kUnion;
  std::vector<CandidateScore> candidates;  // descending combined, ties by id
  bool empty() const { return candidates.empty(); }
};

struct SelectOptions {
  int n_top_ngd = 5;
  int m_top_ir = 7;
  SelectMode mode = SelectMode::kUnion;
  double x_percent = 0.4;  // NGD-side list size in intersection mode
  double lambda = 0.5;
};

// (1 - lambda) * ir/max_ir + lambda * (1 - min(ngd, 1)); max_ir <= 0
// normalizes the IR part to 0. Higher is better.
double combined_score(double ir_score, double ngd_value, double lambda,
                      double max_ir_score);

// Union mode: Top(N) by ascending NGD united with Top(M) by combined
// score over the IR hits. Intersection mode: the top ceil(x_percent * n)
// NGD candidates intersected with Top(M). Candidates only present on the
// NGD side carry ir_score 0; hits without an NGD value are treated as
// maximally dissimilar (1).
CandidateSet select_candidates(int64_t query_id, const std::vector<IrHit>& ir_hits,
                               const NgdRanked& ngd_ranked, const SelectOptions& opts);

}  // namespace pivotex
