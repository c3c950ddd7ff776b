#include "pivotex/ngd.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace pivotex {

namespace {

std::string pair_key(const std::string& a, const std::string& b) {
  if (a <= b) return a + '\t' + b;
  return b + '\t' + a;
}

int64_t intersection_size(const std::vector<int32_t>& a, const std::vector<int32_t>& b) {
  int64_t n = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++n;
      ++ia;
      ++ib;
    }
  }
  return n;
}

}  // namespace

TermStats TermStats::build_impl(const std::vector<Tokens>& docs,
                                const std::unordered_set<std::string>* vocab) {
  if (docs.empty())
    throw Error("term statistics need at least one reference document");
  TermStats stats;
  stats.n_total_ = static_cast<int64_t>(docs.size());
  stats.lazy_ = true;
  for (size_t d = 0; d < docs.size(); ++d) {
    std::unordered_set<std::string> seen;
    for (const auto& t : docs[d]) {
      if (vocab && !vocab->count(t)) continue;
      if (!seen.insert(t).second) continue;  // df counts each doc once
      ++stats.df_[t];
      stats.postings_[t].push_back(static_cast<int32_t>(d));
    }
  }
  return stats;
}

TermStats TermStats::build(const std::vector<Tokens>& reference_docs) {
  return build_impl(reference_docs, nullptr);
}

TermStats TermStats::build(const std::vector<Tokens>& reference_docs,
                           const std::unordered_set<std::string>& vocab) {
  return build_impl(reference_docs, &vocab);
}

int64_t TermStats::df(const std::string& token) const {
  auto it = df_.find(token);
  return it == df_.end() ? 0 : it->second;
}

int64_t TermStats::co_df(const std::string& a, const std::string& b) const {
  std::string key = pair_key(a, b);
  {
    std::lock_guard<std::mutex> lock(shared_->mu);
    auto it = shared_->co_memo.find(key);
    if (it != shared_->co_memo.end()) return it->second;
  }
  int64_t value = 0;
  if (lazy_) {
    auto ia = postings_.find(a);
    auto ib = postings_.find(b);
    if (ia != postings_.end() && ib != postings_.end())
      value = intersection_size(ia->second, ib->second);
  }
  std::lock_guard<std::mutex> lock(shared_->mu);
  shared_->co_memo.emplace(std::move(key), value);
  return value;
}

NgdDiagnostics TermStats::diagnostics() const {
  return {shared_->clamps.load(), shared_->empty_defaults.load()};
}

void TermStats::count_empty_sentence_default() const { ++shared_->empty_defaults; }
void TermStats::count_denominator_clamp() const { ++shared_->clamps; }

TermStats TermStats::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open term statistics: " + path);
  TermStats stats;
  stats.lazy_ = false;
  std::string line;
  int line_no = 0;
  bool have_n = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::istringstream ss(line);
    std::string field;
    while (std::getline(ss, field, '\t')) fields.push_back(field);
    auto fail = [&](const std::string& what) {
      throw Error(path + ": line " + std::to_string(line_no) + ": " + what);
    };
    if (fields.size() == 2 && fields[0] == "#N") {
      stats.n_total_ = std::stoll(fields[1]);
      have_n = true;
    } else if (fields.size() == 2) {
      stats.df_[fields[0]] = std::stoll(fields[1]);
    } else if (fields.size() == 3) {
      stats.shared_->co_memo[pair_key(fields[0], fields[1])] = std::stoll(fields[2]);
    } else {
      fail("expected '#N<TAB>n', 'token<TAB>df' or 'token<TAB>token<TAB>co_df'");
    }
  }
  if (!have_n || stats.n_total_ < 1)
    throw Error(path + ": missing or invalid '#N' header");
  for (const auto& [key, co] : stats.shared_->co_memo) {
    auto tab = key.find('\t');
    int64_t da = stats.df(key.substr(0, tab));
    int64_t db = stats.df(key.substr(tab + 1));
    if (co < 0 || co > std::min(da, db))
      throw Error(path + ": co_df for '" + key + "' exceeds min(df)");
  }
  for (const auto& [token, d] : stats.df_)
    if (d < 0 || d > stats.n_total_)
      throw Error(path + ": df for '" + token + "' out of range");
  return stats;
}

void TermStats::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write term statistics: " + path);
  out << "#N\t" << n_total_ << '\n';
  std::vector<std::string> tokens;
  tokens.reserve(df_.size());
  for (const auto& [t, d] : df_) tokens.push_back(t);
  std::sort(tokens.begin(), tokens.end());
  for (const auto& t : tokens) out << t << '\t' << df_.at(t) << '\n';

  // materialize every co-occurring pair; absent pairs mean zero
  std::map<std::string, int64_t> pairs;
  if (lazy_) {
    std::unordered_map<int32_t, std::vector<const std::string*>> docs;
    for (const auto& [token, posting] : postings_)
      for (int32_t d : posting) docs[d].push_back(&token);
    for (auto& [d, toks] : docs) {
      std::sort(toks.begin(), toks.end(),
                [](const std::string* a, const std::string* b) { return *a < *b; });
      for (size_t i = 0; i < toks.size(); ++i)
        for (size_t j = i + 1; j < toks.size(); ++j)
          ++pairs[*toks[i] + '\t' + *toks[j]];
    }
  } else {
    std::lock_guard<std::mutex> lock(shared_->mu);
    for (const auto& [key, co] : shared_->co_memo)
      if (co > 0) pairs[key] = co;
  }
  for (const auto& [key, co] : pairs) out << key << '\t' << co << '\n';
}

double ngd_term(const TermStats& stats, const std::string& t_i, const std::string& t_j) {
  if (stats.n_total() < 2)
    throw Error("NGD needs a reference corpus with at least 2 documents");
  if (t_i == t_j) return 0.0;
  const int64_t f_i = stats.df(t_i);
  const int64_t f_j = stats.df(t_j);
  if (f_i == 0 || f_j == 0) return 1.0;
  int64_t f_ij = stats.co_df(t_i, t_j);
  if (f_i == f_j && f_j == f_ij) return 0.0;
  if (f_ij == 0) f_ij = 1;

  const double lg_i = std::log2(static_cast<double>(f_i));
  const double lg_j = std::log2(static_cast<double>(f_j));
  const double lg_ij = std::log2(static_cast<double>(f_ij));
  const double lg_n = std::log2(static_cast<double>(stats.n_total()));
  const double num = std::max(lg_i, lg_j) - lg_ij;
  double den = lg_n - std::min(lg_i, lg_j);
  if (den <= 0.0) {
    den = 1e-12;
    stats.count_denominator_clamp();
  }
  return num / den;
}

double dis_ngd(const TermStats& stats, const Tokens& s_a, const Tokens& s_b) {
  if (s_a.empty() || s_b.empty()) {
    stats.count_empty_sentence_default();
    return 1.0;
  }
  // collapse repeated tokens; the double sum weights each unique pair by
  // the product of occurrence counts
  auto collapse = [](const Tokens& s) {
    std::vector<std::pair<std::string, int64_t>> counts;
    Tokens sorted = s;
    std::sort(sorted.begin(), sorted.end());
    for (const auto& t : sorted) {
      if (!counts.empty() && counts.back().first == t)
        ++counts.back().second;
      else
        counts.emplace_back(t, 1);
    }
    return counts;
  };
  const auto ca = collapse(s_a);
  const auto cb = collapse(s_b);
  double sum = 0.0;
  for (const auto& [ta, na] : ca)
    for (const auto& [tb, nb] : cb)
      sum += static_cast<double>(na) * static_cast<double>(nb) * ngd_term(stats, ta, tb);
  return sum / (static_cast<double>(s_a.size()) * static_cast<double>(s_b.size()));
}

NgdRanked rank_dissimilarity(const TermStats& stats, const Tokens& query,
                             const std::vector<std::pair<int64_t, Tokens>>& candidates) {
  NgdRanked ranked;
  ranked.reserve(candidates.size());
  for (const auto& [id, tokens] : candidates)
    ranked.emplace_back(id, dis_ngd(stats, query, tokens));
  return ranked;
}

std::unordered_set<int64_t> prune_by_value(const NgdRanked& ranked, double x_percent) {
  if (!(x_percent > 0.0) || x_percent > 1.0)
    throw Error("x_percent must be in (0, 1]");
  if (ranked.empty()) return {};
  const auto keep = static_cast<size_t>(
      std::ceil(x_percent * static_cast<double>(ranked.size())));
  NgdRanked sorted = ranked;
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second < b.second;
    return a.first < b.first;
  });
  std::unordered_set<int64_t> ids;
  ids.reserve(keep);
  for (size_t i = 0; i < keep && i < sorted.size(); ++i) ids.insert(sorted[i].first);
  return ids;
}

std::unordered_set<int64_t> prune_search_space(
    const TermStats& stats, const Tokens& query,
    const std::vector<std::pair<int64_t, Tokens>>& candidates, double x_percent) {
  return prune_by_value(rank_dissimilarity(stats, query, candidates), x_percent);
}

}  // namespace pivotex
