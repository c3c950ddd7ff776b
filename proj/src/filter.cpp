#include "pivotex/filter.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace pivotex {

namespace {

constexpr int kMaxShiftSize = 10;
constexpr int kMaxShiftDist = 50;
constexpr double kGainEps = 1e-9;

int levenshtein(const Tokens& hyp, const Tokens& ref) {
  const int n = static_cast<int>(hyp.size());
  const int m = static_cast<int>(ref.size());
  std::vector<int> prev(m + 1), cur(m + 1);
  for (int j = 0; j <= m; ++j) prev[j] = j;
  for (int i = 1; i <= n; ++i) {
    cur[0] = i;
    for (int j = 1; j <= m; ++j) {
      int sub = prev[j - 1] + (hyp[i - 1] == ref[j - 1] ? 0 : 1);
      cur[j] = std::min({sub, prev[j] + 1, cur[j - 1] + 1});
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

struct CostModel {
  const TerpResources* res = nullptr;  // null means unit-cost TER
  TerpWeights w;                       // all 1.0 for plain TER

  double sub_cost(const std::string& a, const std::string& b) const {
    if (a == b) return 0.0;
    if (res) {
      if (res->stem_of(a) == res->stem_of(b)) return w.stem;
      if (res->synonyms(a, b)) return w.synonym;
    }
    return w.substitution;
  }
};

// Weighted edit distance of hyp against ref; when err is given, marks
// the hyp positions covered by a nonzero-cost op in the canonical
// backtrace (match > substitution > phrase > deletion > insertion).
double weighted_distance(const Tokens& hyp, const Tokens& ref, const CostModel& cm,
                         std::vector<char>* err) {
  const int n = static_cast<int>(hyp.size());
  const int m = static_cast<int>(ref.size());
  const bool phrases = cm.res && !cm.res->phrases().empty();
  std::vector<std::vector<double>> dp(n + 1, std::vector<double>(m + 1, 0.0));
  for (int j = 1; j <= m; ++j) dp[0][j] = dp[0][j - 1] + cm.w.insertion;
  for (int i = 1; i <= n; ++i) dp[i][0] = dp[i - 1][0] + cm.w.deletion;
  auto phrase_matches = [&](const Tokens& side, int end, const Tokens& phrase) {
    int u = static_cast<int>(phrase.size());
    if (u == 0 || end < u) return false;
    for (int k = 0; k < u; ++k)
      if (side[end - u + k] != phrase[k]) return false;
    return true;
  };
  for (int i = 1; i <= n; ++i) {
    for (int j = 1; j <= m; ++j) {
      double best = dp[i - 1][j - 1] + cm.sub_cost(hyp[i - 1], ref[j - 1]);
      best = std::min(best, dp[i - 1][j] + cm.w.deletion);
      best = std::min(best, dp[i][j - 1] + cm.w.insertion);
      if (phrases) {
        for (const auto& e : cm.res->phrases()) {
          const int u = static_cast<int>(e.a.size());
          const int v = static_cast<int>(e.b.size());
          if (phrase_matches(hyp, i, e.a) && phrase_matches(ref, j, e.b))
            best = std::min(best, dp[i - u][j - v] + e.cost);
          if (phrase_matches(hyp, i, e.b) && phrase_matches(ref, j, e.a))
            best = std::min(best, dp[i - v][j - u] + e.cost);
        }
      }
      dp[i][j] = best;
    }
  }
  if (err) {
    err->assign(static_cast<size_t>(n), 0);
    int i = n, j = m;
    while (i > 0 || j > 0) {
      if (i > 0 && j > 0 && hyp[i - 1] == ref[j - 1] && dp[i][j] == dp[i - 1][j - 1]) {
        --i;
        --j;
        continue;
      }
      if (i > 0 && j > 0 &&
          dp[i][j] == dp[i - 1][j - 1] + cm.sub_cost(hyp[i - 1], ref[j - 1])) {
        if (cm.sub_cost(hyp[i - 1], ref[j - 1]) > 0.0) (*err)[i - 1] = 1;
        --i;
        --j;
        continue;
      }
      bool used_phrase = false;
      if (phrases && i > 0 && j > 0) {
        for (const auto& e : cm.res->phrases()) {
          const int u = static_cast<int>(e.a.size());
          const int v = static_cast<int>(e.b.size());
          if (phrase_matches(hyp, i, e.a) && phrase_matches(ref, j, e.b) &&
              dp[i][j] == dp[i - u][j - v] + e.cost) {
            if (e.cost > 0.0)
              for (int k = i - u; k < i; ++k) (*err)[k] = 1;
            i -= u;
            j -= v;
            used_phrase = true;
            break;
          }
          if (phrase_matches(hyp, i, e.b) && phrase_matches(ref, j, e.a) &&
              dp[i][j] == dp[i - v][j - u] + e.cost) {
            if (e.cost > 0.0)
              for (int k = i - v; k < i; ++k) (*err)[k] = 1;
            i -= v;
            j -= u;
            used_phrase = true;
            break;
          }
        }
      }
      if (used_phrase) continue;
      if (i > 0 && dp[i][j] == dp[i - 1][j] + cm.w.deletion) {
        (*err)[i - 1] = 1;
        --i;
        continue;
      }
      --j;  // insertion, no hyp position
    }
  }
  return dp[n][m];
}

bool block_matches_ref(const Tokens& ref, const Tokens& hyp, int start, int len) {
  const int m = static_cast<int>(ref.size());
  for (int p = 0; p + len <= m; ++p) {
    bool ok = true;
    for (int k = 0; k < len; ++k) {
      if (ref[p + k] != hyp[start + k]) {
        ok = false;
        break;
      }
    }
    if (ok) return true;
  }
  return false;
}

Tokens apply_shift(const Tokens& seq, int start, int len, int dest) {
  Tokens out;
  out.reserve(seq.size());
  for (int i = 0; i < static_cast<int>(seq.size()); ++i)
    if (i < start || i >= start + len) out.push_back(seq[i]);
  out.insert(out.begin() + dest, seq.begin() + start, seq.begin() + start + len);
  return out;
}

struct ShiftedDistance {
  double edits = 0.0;
  int shifts = 0;
};

// Greedy shift loop: each round scans every block that matches somewhere
// in the reference and contains at least one edit, tries every landing
// position, and applies the shift with the largest gain over the shift
// cost; stops when no shift strictly pays for itself.
ShiftedDistance shifted_distance(const Tokens& hyp, const Tokens& ref,
                                 const CostModel& cm) {
  Tokens cur = hyp;
  std::vector<char> err;
  double edits = weighted_distance(cur, ref, cm, &err);
  int shifts = 0;
  while (true) {
    const int n = static_cast<int>(cur.size());
    double best_gain = kGainEps;
    int best_start = -1, best_len = 0, best_dest = 0;
    double best_edits = 0.0;
    for (int start = 0; start < n; ++start) {
      bool any_err = false;
      for (int len = 1; len <= kMaxShiftSize && start + len <= n; ++len) {
        any_err = any_err || err[start + len - 1];
        if (!any_err) continue;
        if (!block_matches_ref(ref, cur, start, len)) continue;
        for (int dest = 0; dest + len <= n; ++dest) {
          if (dest == start) continue;
          if (std::abs(dest - start) > kMaxShiftDist) continue;
          Tokens cand = apply_shift(cur, start, len, dest);
          double e2 = weighted_distance(cand, ref, cm, nullptr);
          double gain = edits - cm.w.shift - e2;
          if (gain > best_gain) {
            best_gain = gain;
            best_start = start;
            best_len = len;
            best_dest = dest;
            best_edits = e2;
          }
        }
      }
    }
    if (best_start < 0) break;
    cur = apply_shift(cur, best_start, best_len, best_dest);
    ++shifts;
    edits = best_edits;
    weighted_distance(cur, ref, cm, &err);
  }
  return {edits, shifts};
}

void require_reference(const Tokens& ref) {
  if (ref.empty()) throw Error("empty reference");
}

}  // namespace

EditAlignment edit_alignment(const Tokens& hyp, const Tokens& ref) {
  const int n = static_cast<int>(hyp.size());
  const int m = static_cast<int>(ref.size());
  std::vector<std::vector<int>> dp(n + 1, std::vector<int>(m + 1, 0));
  for (int j = 0; j <= m; ++j) dp[0][j] = j;
  for (int i = 0; i <= n; ++i) dp[i][0] = i;
  for (int i = 1; i <= n; ++i)
    for (int j = 1; j <= m; ++j)
      dp[i][j] = std::min({dp[i - 1][j - 1] + (hyp[i - 1] == ref[j - 1] ? 0 : 1),
                           dp[i - 1][j] + 1, dp[i][j - 1] + 1});

  EditAlignment out;
  int i = n, j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 && hyp[i - 1] == ref[j - 1] && dp[i][j] == dp[i - 1][j - 1]) {
      out.ops.push_back({EditOpKind::kMatch, i - 1, j - 1});
      --i;
      --j;
    } else if (i > 0 && j > 0 && dp[i][j] == dp[i - 1][j - 1] + 1) {
      out.ops.push_back({EditOpKind::kSubstitution, i - 1, j - 1});
      --i;
      --j;
    } else if (i > 0 && dp[i][j] == dp[i - 1][j] + 1) {
      out.ops.push_back({EditOpKind::kDeletion, i - 1, -1});
      --i;
    } else {
      out.ops.push_back({EditOpKind::kInsertion, -1, j - 1});
      --j;
    }
  }
  std::reverse(out.ops.begin(), out.ops.end());
  out.cost = dp[n][m];
  return out;
}

std::string metric_name(Metric m) {
  switch (m) {
    case Metric::kWer: return "wer";
    case Metric::kTer: return "ter";
    case Metric::kTerp: return "terp";
  }
  return "?";
}

Metric metric_from_name(const std::string& name) {
  if (name == "wer") return Metric::kWer;
  if (name == "ter") return Metric::kTer;
  if (name == "terp") return Metric::kTerp;
  throw Error("unknown metric '" + name + "' (expected wer|ter|terp)");
}

void TerpResources::add_stem(const std::string& token, const std::string& stem) {
  stem_map_[token] = stem;
}

void TerpResources::add_synonym_set(const std::vector<std::string>& tokens) {
  int id = -1;
  for (const auto& t : tokens) {
    auto it = synonym_id_.find(t);
    if (it != synonym_id_.end()) {
      id = it->second;
      break;
    }
  }
  if (id < 0) id = next_synonym_id_++;
  // merge: every member of an overlapping set moves to this id
  std::vector<int> old_ids;
  for (const auto& t : tokens) {
    auto it = synonym_id_.find(t);
    if (it != synonym_id_.end() && it->second != id) old_ids.push_back(it->second);
  }
  if (!old_ids.empty())
    for (auto& [tok, sid] : synonym_id_)
      if (std::find(old_ids.begin(), old_ids.end(), sid) != old_ids.end()) sid = id;
  for (const auto& t : tokens) synonym_id_[t] = id;
}

void TerpResources::add_phrase(const Tokens& a, const Tokens& b, double cost) {
  if (a.empty() || b.empty()) throw Error("phrase table entries need non-empty phrases");
  if (cost < 0.0) throw Error("phrase costs must be >= 0");
  phrases_.push_back({a, b, cost});
}

namespace {

std::vector<std::string> read_resource_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open resource file: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    lines.push_back(line);
  }
  return lines;
}

}  // namespace

void TerpResources::load_stems(const std::string& path) {
  for (const auto& line : read_resource_lines(path)) {
    auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw Error(path + ": expected token<TAB>stem: " + line);
    add_stem(line.substr(0, tab), line.substr(tab + 1));
  }
}

void TerpResources::load_synonyms(const std::string& path) {
  for (const auto& line : read_resource_lines(path)) {
    std::vector<std::string> set;
    std::istringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      while (!tok.empty() && tok.front() == ' ') tok.erase(tok.begin());
      while (!tok.empty() && tok.back() == ' ') tok.pop_back();
      if (!tok.empty()) set.push_back(tok);
    }
    if (set.size() >= 2) add_synonym_set(set);
  }
}

void TerpResources::load_phrases(const std::string& path) {
  for (const auto& line : read_resource_lines(path)) {
    std::istringstream ss(line);
    std::string a, b, cost;
    if (!std::getline(ss, a, '\t') || !std::getline(ss, b, '\t') ||
        !std::getline(ss, cost))
      throw Error(path + ": expected phrase<TAB>phrase<TAB>cost: " + line);
    add_phrase(tokenize(a), tokenize(b), std::stod(cost));
  }
}

const std::string& TerpResources::stem_of(const std::string& token) const {
  auto it = stem_map_.find(token);
  return it == stem_map_.end() ? token : it->second;
}

bool TerpResources::synonyms(const std::string& a, const std::string& b) const {
  auto ia = synonym_id_.find(a);
  if (ia == synonym_id_.end()) return false;
  auto ib = synonym_id_.find(b);
  return ib != synonym_id_.end() && ia->second == ib->second;
}

bool TerpResources::empty() const {
  return stem_map_.empty() && synonym_id_.empty() && phrases_.empty();
}

MetricScore wer(const Tokens& hyp, const Tokens& ref) {
  require_reference(ref);
  return {Metric::kWer,
          static_cast<double>(levenshtein(hyp, ref)) / static_cast<double>(ref.size())};
}

MetricScore ter(const Tokens& hyp, const Tokens& ref) {
  require_reference(ref);
  CostModel unit;
  ShiftedDistance r = shifted_distance(hyp, ref, unit);
  return {Metric::kTer, (r.edits + r.shifts) / static_cast<double>(ref.size())};
}

MetricScore terp(const Tokens& hyp, const Tokens& ref, const TerpResources& res,
                 const TerpWeights& weights) {
  require_reference(ref);
  CostModel cm{&res, weights};
  ShiftedDistance r = shifted_distance(hyp, ref, cm);
  return {Metric::kTerp,
          (r.edits + r.shifts * weights.shift) / static_cast<double>(ref.size())};
}

double metric_value(Metric m, const Tokens& hyp, const Tokens& ref,
                    const TerpResources& res, const TerpWeights& weights) {
  switch (m) {
    case Metric::kWer: return wer(hyp, ref).value;
    case Metric::kTer: return ter(hyp, ref).value;
    case Metric::kTerp: return terp(hyp, ref, res, weights).value;
  }
  throw Error("unknown metric");
}

std::optional<BestCandidate> best_candidate(
    const Tokens& query, const std::vector<std::pair<int64_t, const Tokens*>>& cands,
    Metric m, const TerpResources& res, const TerpWeights& weights) {
  std::optional<BestCandidate> best;
  for (const auto& [id, tokens] : cands) {
    double value = metric_value(m, *tokens, query, res, weights);
    if (!best || value < best->score || (value == best->score && id < best->id))
      best = BestCandidate{id, value};
  }
  return best;
}

InvertedScore inverted_translation_score(const NBestList& translations,
                                         const Tokens& candidate_tokens, Metric m,
                                         const TerpResources& res,
                                         const TerpWeights& weights) {
  InvertedScore out;
  for (const auto& hyp : translations) {
    out.score += metric_value(m, hyp.tokens, candidate_tokens, res, weights);
    ++out.hypotheses_used;
  }
  return out;
}

InvertedScore inverted_translation_score(const TranslationAdapter& st_adapter,
                                         const Sentence& src_sentence,
                                         const Tokens& candidate_tokens, int n_best,
                                         Metric m, uint64_t seed,
                                         const TerpResources& res,
                                         const TerpWeights& weights) {
  if (n_best < 1) throw Error("n_best must be >= 1");
  NBestList hyps = translate_sentence(st_adapter, src_sentence, n_best, seed);
  return inverted_translation_score(hyps, candidate_tokens, m, res, weights);
}

TailTrim tail_removal(const Tokens& src_pivot, const Tokens& tgt_pivot,
                      double max_tail) {
  if (max_tail < 0.0 || max_tail > 1.0) throw Error("max_tail must be in [0, 1]");
  TailTrim out;
  out.src = {0, static_cast<int>(src_pivot.size())};
  out.tgt = {0, static_cast<int>(tgt_pivot.size())};

  EditAlignment aln = edit_alignment(src_pivot, tgt_pivot);
  int last_src = -1, last_tgt = -1;
  for (const auto& op : aln.ops) {
    if (op.kind == EditOpKind::kMatch) {
      last_src = op.hyp_pos;
      last_tgt = op.ref_pos;
    }
  }
  const int src_tail = static_cast<int>(src_pivot.size()) - (last_src + 1);
  const int tgt_tail = static_cast<int>(tgt_pivot.size()) - (last_tgt + 1);
  auto exceeds = [max_tail](int tail, size_t len) {
    return len > 0 && static_cast<double>(tail) > max_tail * static_cast<double>(len);
  };
  if (exceeds(src_tail, src_pivot.size()) || exceeds(tgt_tail, tgt_pivot.size())) {
    out.trimmed = true;
    out.src.end = last_src + 1;
    out.tgt.end = last_tgt + 1;
  }
  return out;
}

std::vector<ScoredPair> accept_pairs(std::vector<ScoredPair> scored, double threshold) {
  std::vector<ScoredPair> kept;
  kept.reserve(scored.size());
  for (auto& p : scored)
    if (p.score <= threshold) kept.push_back(std::move(p));
  std::sort(kept.begin(), kept.end(), [](const ScoredPair& a, const ScoredPair& b) {
    if (a.score != b.score) return a.score < b.score;
    if (a.source_id != b.source_id) return a.source_id < b.source_id;
    return a.target_id < b.target_id;
  });
  return kept;
}

}  // namespace pivotex
