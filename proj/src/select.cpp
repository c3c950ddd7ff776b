#include "pivotex/select.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace pivotex {

double combined_score(double ir_score, double ngd_value, double lambda,
                      double max_ir_score) {
  if (lambda < 0.0 || lambda > 1.0) throw Error("lambda must be in [0, 1]");
  double norm = max_ir_score > 0.0 ? ir_score / max_ir_score : 0.0;
  double sim = 1.0 - std::min(ngd_value, 1.0);
  return (1.0 - lambda) * norm + lambda * sim;
}

CandidateSet select_candidates(int64_t query_id, const std::vector<IrHit>& ir_hits,
                               const NgdRanked& ngd_ranked, const SelectOptions& opts) {
  if (opts.n_top_ngd < 1) throw Error("n_top_ngd must be >= 1");
  if (opts.m_top_ir < 1) throw Error("m_top_ir must be >= 1");
  if (!(opts.x_percent > 0.0) || opts.x_percent > 1.0)
    throw Error("x_percent must be in (0, 1]");

  std::unordered_map<int64_t, double> ngd_of;
  ngd_of.reserve(ngd_ranked.size());
  for (const auto& [id, value] : ngd_ranked) ngd_of.emplace(id, value);
  auto ngd_for = [&](int64_t id) {
    auto it = ngd_of.find(id);
    return it == ngd_of.end() ? 1.0 : it->second;
  };

  double max_ir = 0.0;
  for (const auto& hit : ir_hits) max_ir = std::max(max_ir, hit.ir_score);

  // Top(M) of the IR hits by combined score
  std::vector<CandidateScore> ir_side;
  ir_side.reserve(ir_hits.size());
  for (const auto& hit : ir_hits) {
    CandidateScore c;
    c.id = hit.sentence_id;
    c.ir_score = hit.ir_score;
    c.ngd_value = ngd_for(hit.sentence_id);
    c.combined = combined_score(c.ir_score, c.ngd_value, opts.lambda, max_ir);
    ir_side.push_back(c);
  }
  std::sort(ir_side.begin(), ir_side.end(),
            [](const CandidateScore& a, const CandidateScore& b) {
              if (a.combined != b.combined) return a.combined > b.combined;
              return a.id < b.id;
            });
  if (static_cast<int>(ir_side.size()) > opts.m_top_ir)
    ir_side.resize(static_cast<size_t>(opts.m_top_ir));

  // NGD-side top list: best N in union mode, the x_percent prune set in
  // intersection mode
  NgdRanked by_ngd = ngd_ranked;
  std::sort(by_ngd.begin(), by_ngd.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second < b.second;
    return a.first < b.first;
  });
  size_t ngd_keep;
  if (opts.mode == SelectMode::kUnion) {
    ngd_keep = static_cast<size_t>(opts.n_top_ngd);
  } else {
    ngd_keep = static_cast<size_t>(
        std::ceil(opts.x_percent * static_cast<double>(by_ngd.size())));
  }
  if (ngd_keep > by_ngd.size()) ngd_keep = by_ngd.size();

  CandidateSet out;
  out.query_id = query_id;
  out.mode = opts.mode;

  if (opts.mode == SelectMode::kUnion) {
    std::unordered_map<int64_t, double> ir_of;
    for (const auto& hit : ir_hits) ir_of.emplace(hit.sentence_id, hit.ir_score);
    std::unordered_map<int64_t, bool> taken;
    for (const auto& c : ir_side) {
      out.candidates.push_back(c);
      taken[c.id] = true;
    }
    for (size_t i = 0; i < ngd_keep; ++i) {
      int64_t id = by_ngd[i].first;
      if (taken.count(id)) continue;
      CandidateScore c;
      c.id = id;
      auto it = ir_of.find(id);
      c.ir_score = it == ir_of.end() ? 0.0 : it->second;
      c.ngd_value = by_ngd[i].second;
      c.combined = combined_score(c.ir_score, c.ngd_value, opts.lambda, max_ir);
      out.candidates.push_back(c);
      taken[id] = true;
    }
  } else {
    std::unordered_map<int64_t, bool> in_ngd;
    for (size_t i = 0; i < ngd_keep; ++i) in_ngd[by_ngd[i].first] = true;
    for (const auto& c : ir_side)
      if (in_ngd.count(c.id)) out.candidates.push_back(c);
  }

  std::sort(out.candidates.begin(), out.candidates.end(),
            [](const CandidateScore& a, const CandidateScore& b) {
              if (a.combined != b.combined) return a.combined > b.combined;
              return a.id < b.id;
            });
  return out;
}

}  // namespace pivotex
