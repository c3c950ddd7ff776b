#include "pivotex/ir.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

namespace pivotex {

namespace {
constexpr char kMagic[] = "PXIDX001";  // bump on format changes
}

InvertedIndex InvertedIndex::build(const std::vector<IndexedSentence>& sentences,
                                   const StopWordList& stops) {
  InvertedIndex index;
  int64_t total_len = 0;
  for (const auto& s : sentences) {
    if (index.doc_lengths_.count(s.id))
      throw Error("duplicate sentence id " + std::to_string(s.id) + " in index build");
    Tokens kept = remove_stop_words(s.tokens, stops);
    index.doc_lengths_[s.id] = static_cast<int32_t>(kept.size());
    index.date_of_[s.id] = s.date;
    index.by_date_.emplace_back(s.date.days, s.id);
    total_len += static_cast<int64_t>(kept.size());

    std::unordered_map<std::string, int32_t> tf;
    for (const auto& t : kept) ++tf[t];
    for (const auto& [token, count] : tf)
      index.postings_[token].push_back({s.id, count});
  }
  index.n_docs_ = static_cast<int64_t>(sentences.size());
  index.avg_len_ =
      index.n_docs_ > 0 ? static_cast<double>(total_len) / index.n_docs_ : 0.0;
  for (auto& [token, list] : index.postings_)
    std::sort(list.begin(), list.end(),
              [](const Posting& a, const Posting& b) { return a.sentence_id < b.sentence_id; });
  std::sort(index.by_date_.begin(), index.by_date_.end());
  return index;
}

int32_t InvertedIndex::doc_length(int64_t id) const {
  auto it = doc_lengths_.find(id);
  if (it == doc_lengths_.end())
    throw Error("unknown sentence id " + std::to_string(id) + " in index");
  return it->second;
}

Date InvertedIndex::date_of(int64_t id) const {
  auto it = date_of_.find(id);
  if (it == date_of_.end())
    throw Error("unknown sentence id " + std::to_string(id) + " in index");
  return it->second;
}

double InvertedIndex::idf(const std::string& token) const {
  auto it = postings_.find(token);
  if (it == postings_.end()) return 0.0;
  double df = static_cast<double>(it->second.size());
  double n = static_cast<double>(n_docs_);
  return std::max(0.0, std::log(1.0 + (n - df + 0.5) / (df + 0.5)));
}

double InvertedIndex::bm25_score(const Tokens& query, int64_t sentence_id,
                                 const Bm25Params& params) const {
  int32_t len = doc_length(sentence_id);
  double score = 0.0;
  for (const auto& token : query) {
    auto it = postings_.find(token);
    if (it == postings_.end()) continue;
    const auto& list = it->second;
    auto pit = std::lower_bound(
        list.begin(), list.end(), sentence_id,
        [](const Posting& p, int64_t id) { return p.sentence_id < id; });
    if (pit == list.end() || pit->sentence_id != sentence_id) continue;
    double tf = static_cast<double>(pit->tf);
    double norm = params.k1 * (1.0 - params.b + params.b * len / avg_len_);
    score += idf(token) * tf * (params.k1 + 1.0) / (tf + norm);
  }
  return score;
}

std::vector<IrHit> InvertedIndex::query_window(
    const Tokens& query, Date query_date, int window_days, int top_k,
    const Bm25Params& params, const std::unordered_set<int64_t>* restrict_to) const {
  if (top_k < 1) throw Error("top_k must be >= 1");
  if (window_days < 0) throw Error("window_days must be >= 0");

  // term-at-a-time accumulation in query-token order, same summation
  // order as bm25_score
  std::unordered_map<int64_t, double> acc;
  for (const auto& token : query) {
    auto it = postings_.find(token);
    if (it == postings_.end()) continue;
    double token_idf = idf(token);
    for (const Posting& p : it->second) {
      if (day_distance(date_of_.at(p.sentence_id), query_date) > window_days) continue;
      if (restrict_to && !restrict_to->count(p.sentence_id)) continue;
      double tf = static_cast<double>(p.tf);
      double norm = params.k1 *
                    (1.0 - params.b + params.b * doc_lengths_.at(p.sentence_id) / avg_len_);
      acc[p.sentence_id] += token_idf * tf * (params.k1 + 1.0) / (tf + norm);
    }
  }

  std::vector<IrHit> hits;
  hits.reserve(acc.size());
  for (const auto& [id, score] : acc)
    if (score > 0.0) hits.push_back({id, score});
  std::sort(hits.begin(), hits.end(), [](const IrHit& a, const IrHit& b) {
    if (a.ir_score != b.ir_score) return a.ir_score > b.ir_score;
    return a.sentence_id < b.sentence_id;
  });
  if (static_cast<int>(hits.size()) > top_k) hits.resize(static_cast<size_t>(top_k));
  return hits;
}

std::vector<int64_t> InvertedIndex::ids_in_window(Date query_date,
                                                  int window_days) const {
  auto lo = std::lower_bound(by_date_.begin(), by_date_.end(),
                             std::make_pair(query_date.days - window_days,
                                            std::numeric_limits<int64_t>::min()));
  auto hi = std::upper_bound(by_date_.begin(), by_date_.end(),
                             std::make_pair(query_date.days + window_days,
                                            std::numeric_limits<int64_t>::max()));
  std::vector<int64_t> ids;
  ids.reserve(static_cast<size_t>(hi - lo));
  for (auto it = lo; it != hi; ++it) ids.push_back(it->second);
  std::sort(ids.begin(), ids.end());
  return ids;
}

namespace {

template <typename T>
void write_pod(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

template <typename T>
void read_pod(std::istream& in, T& v) {
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
}

void write_string(std::ostream& out, const std::string& s) {
  write_pod(out, static_cast<uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::istream& in) {
  uint32_t n = 0;
  read_pod(in, n);
  std::string s(n, '\0');
  in.read(s.data(), n);
  return s;
}

}  // namespace

void InvertedIndex::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write index cache: " + path);
  out.write(kMagic, 8);
  write_pod(out, n_docs_);
  write_pod(out, avg_len_);

  std::vector<int64_t> ids;
  ids.reserve(doc_lengths_.size());
  for (const auto& [id, len] : doc_lengths_) ids.push_back(id);
  std::sort(ids.begin(), ids.end());
  write_pod(out, static_cast<uint64_t>(ids.size()));
  for (int64_t id : ids) {
    write_pod(out, id);
    write_pod(out, doc_lengths_.at(id));
    write_pod(out, date_of_.at(id).days);
  }

  std::vector<std::string> tokens;
  tokens.reserve(postings_.size());
  for (const auto& [token, list] : postings_) tokens.push_back(token);
  std::sort(tokens.begin(), tokens.end());
  write_pod(out, static_cast<uint64_t>(tokens.size()));
  for (const auto& token : tokens) {
    write_string(out, token);
    const auto& list = postings_.at(token);
    write_pod(out, static_cast<uint64_t>(list.size()));
    for (const Posting& p : list) {
      write_pod(out, p.sentence_id);
      write_pod(out, p.tf);
    }
  }
  if (!out) throw Error("short write to index cache: " + path);
}

InvertedIndex InvertedIndex::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open index cache: " + path);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::string(magic, 8) != kMagic)
    throw Error("bad index cache (wrong magic): " + path);

  InvertedIndex index;
  read_pod(in, index.n_docs_);
  read_pod(in, index.avg_len_);
  uint64_t n_ids = 0;
  read_pod(in, n_ids);
  for (uint64_t i = 0; i < n_ids; ++i) {
    int64_t id;
    int32_t len, days;
    read_pod(in, id);
    read_pod(in, len);
    read_pod(in, days);
    index.doc_lengths_[id] = len;
    index.date_of_[id] = Date{days};
    index.by_date_.emplace_back(days, id);
  }
  std::sort(index.by_date_.begin(), index.by_date_.end());
  uint64_t n_tokens = 0;
  read_pod(in, n_tokens);
  for (uint64_t i = 0; i < n_tokens; ++i) {
    std::string token = read_string(in);
    uint64_t n_postings = 0;
    read_pod(in, n_postings);
    auto& list = index.postings_[token];
    list.reserve(n_postings);
    for (uint64_t j = 0; j < n_postings; ++j) {
      Posting p;
      read_pod(in, p.sentence_id);
      read_pod(in, p.tf);
      list.push_back(p);
    }
  }
  if (!in) throw Error("truncated index cache: " + path);
  return index;
}

}  // namespace pivotex
