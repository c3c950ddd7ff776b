#include "pivotex/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "pivotex/rng.hpp"

namespace pivotex {

GoldAlignment GoldAlignment::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open gold alignment: " + path);
  GoldAlignment gold;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string a, b;
    if (!std::getline(ss, a, '\t') || !std::getline(ss, b))
      throw Error(path + ": line " + std::to_string(line_no) +
                  ": expected source_id<TAB>target_id");
    gold.pairs.emplace(std::stoll(a), std::stoll(b));
  }
  return gold;
}

void GoldAlignment::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write gold alignment: " + path);
  for (const auto& [s, t] : pairs) out << s << '\t' << t << '\n';
}

void SynthSpec::validate() const {
  if (n_parallel < 0 || n_distractors_per_side < 0) throw Error("counts must be >= 0");
  if (date_jitter_days < 0) throw Error("date_jitter_days must be >= 0");
  if (noise_rate < 0.0 || noise_rate >= 1.0) throw Error("noise_rate must be in [0, 1)");
  if (date_range_days < 1) throw Error("date_range_days must be >= 1");
  if (min_sentence_len < 2 || max_sentence_len < min_sentence_len)
    throw Error("sentence length bounds must satisfy 2 <= min <= max");
  if (topics < 1) throw Error("topics must be >= 1");
  if (concepts_per_topic < max_sentence_len)
    throw Error("concepts_per_topic must be >= max_sentence_len");
}

namespace {

constexpr int32_t kBaseDay = 14610;  // 2010-01-01

struct ConceptSpace {
  int topics;
  int per_topic;
  int shared_size;     // [0, shared_size) shared topical concepts
  int side_blocks[2];  // start of per-side distractor topic blocks
  int entity_base;     // entities follow all topic blocks
};

std::string pivot_token(int concept) { return "p" + std::to_string(concept); }
std::string source_token(int concept) { return "s" + std::to_string(concept); }
std::string target_token(int concept) { return "t" + std::to_string(concept); }

struct DraftSentence {
  std::vector<int> concepts;
  int32_t day;
};

// entity at a random position, remaining tokens drawn without
// replacement from one topic block
std::vector<int> draw_concepts(Rng& rng, int topic_start, int per_topic, int entity,
                               int len) {
  std::vector<int> pool(static_cast<size_t>(per_topic));
  for (int i = 0; i < per_topic; ++i) pool[static_cast<size_t>(i)] = topic_start + i;
  for (int i = 0; i < len - 1; ++i) {
    int j = static_cast<int>(rng.uniform(i, per_topic - 1));
    std::swap(pool[static_cast<size_t>(i)], pool[static_cast<size_t>(j)]);
  }
  std::vector<int> concepts(pool.begin(), pool.begin() + (len - 1));
  int entity_pos = static_cast<int>(rng.uniform(0, len - 1));
  concepts.insert(concepts.begin() + entity_pos, entity);
  return concepts;
}

CorpusSide assemble_side(const std::vector<DraftSentence>& drafts,
                         const std::string& lang, bool is_source) {
  CorpusSide side;
  side.lang = lang;
  for (size_t i = 0; i < drafts.size(); ++i) {
    Tokens tokens;
    tokens.reserve(drafts[i].concepts.size());
    for (int c : drafts[i].concepts)
      tokens.push_back(is_source ? source_token(c) : target_token(c));

    Sentence s;
    s.id = static_cast<int64_t>(i);
    s.doc_id = (is_source ? "src-" : "tgt-") + std::to_string(i);
    s.lang = lang;
    s.date = Date{kBaseDay + drafts[i].day};
    s.text = join_tokens(tokens);
    s.tokens = std::move(tokens);

    Document doc;
    doc.id = s.doc_id;
    doc.lang = lang;
    doc.date = s.date;
    doc.sentence_ids.push_back(s.id);
    side.documents.push_back(std::move(doc));
    side.sentences.push_back(std::move(s));
  }
  return side;
}

}  // namespace

SynthResult generate_synthetic(const SynthSpec& spec) {
  spec.validate();
  Rng rng(spec.seed * 0x9e3779b97f4a7c15ULL + 1);

  ConceptSpace space;
  space.topics = spec.topics;
  space.per_topic = spec.concepts_per_topic;
  space.shared_size = spec.topics * spec.concepts_per_topic;
  space.side_blocks[0] = space.shared_size;
  space.side_blocks[1] = 2 * space.shared_size;
  space.entity_base = 3 * space.shared_size;

  const int n_entities = spec.n_parallel + 2 * spec.n_distractors_per_side;
  int next_entity = space.entity_base;

  std::vector<DraftSentence> src_drafts, tgt_drafts;
  std::vector<std::pair<size_t, size_t>> planted;  // draft positions

  // planted pairs: identical concept sequences, noise on the target side
  for (int k = 0; k < spec.n_parallel; ++k) {
    const int topic = static_cast<int>(rng.uniform(0, spec.topics - 1));
    const int len =
        static_cast<int>(rng.uniform(spec.min_sentence_len, spec.max_sentence_len));
    const int entity = next_entity++;
    std::vector<int> concepts = draw_concepts(rng, topic * spec.concepts_per_topic,
                                              spec.concepts_per_topic, entity, len);
    const int32_t src_day = static_cast<int32_t>(rng.uniform(0, spec.date_range_days - 1));
    int32_t tgt_day = src_day;
    if (spec.date_jitter_days > 0)
      tgt_day = src_day + static_cast<int32_t>(
                              rng.uniform(-spec.date_jitter_days, spec.date_jitter_days));

    std::vector<int> tgt_concepts = concepts;
    for (int& c : tgt_concepts) {
      if (spec.noise_rate > 0.0 && rng.chance(spec.noise_rate)) {
        const int noise_topic = static_cast<int>(rng.uniform(0, spec.topics - 1));
        c = noise_topic * spec.concepts_per_topic +
            static_cast<int>(rng.uniform(0, spec.concepts_per_topic - 1));
      }
    }
    planted.emplace_back(src_drafts.size(), tgt_drafts.size());
    src_drafts.push_back({std::move(concepts), src_day});
    tgt_drafts.push_back({std::move(tgt_concepts), tgt_day});
  }

  // distractors: per-side sentences that never have a planted partner
  for (int side = 0; side < 2; ++side) {
    auto& drafts = side == 0 ? src_drafts : tgt_drafts;
    for (int j = 0; j < spec.n_distractors_per_side; ++j) {
      const int topic = static_cast<int>(rng.uniform(0, spec.topics - 1));
      const int topic_start = spec.comparability == Comparability::kHigh
                                  ? topic * spec.concepts_per_topic
                                  : space.side_blocks[side] + topic * spec.concepts_per_topic;
      const int len =
          static_cast<int>(rng.uniform(spec.min_sentence_len, spec.max_sentence_len));
      const int entity = next_entity++;
      std::vector<int> concepts =
          draw_concepts(rng, topic_start, spec.concepts_per_topic, entity, len);
      const int32_t day = static_cast<int32_t>(rng.uniform(0, spec.date_range_days - 1));
      drafts.push_back({std::move(concepts), day});
    }
  }

  // shuffle each side so ids carry no alignment signal
  auto shuffle_map = [&rng](size_t n) {
    std::vector<size_t> perm(n);
    for (size_t i = 0; i < n; ++i) perm[i] = i;
    for (size_t i = n; i > 1; --i) {
      size_t j = static_cast<size_t>(rng.uniform(0, static_cast<int64_t>(i) - 1));
      std::swap(perm[i - 1], perm[j]);
    }
    // position_of[draft index] = final sentence id
    std::vector<size_t> position_of(n);
    for (size_t i = 0; i < n; ++i) position_of[perm[i]] = i;
    return std::make_pair(perm, position_of);
  };
  auto [src_perm, src_pos] = shuffle_map(src_drafts.size());
  auto [tgt_perm, tgt_pos] = shuffle_map(tgt_drafts.size());

  std::vector<DraftSentence> src_final, tgt_final;
  src_final.reserve(src_drafts.size());
  tgt_final.reserve(tgt_drafts.size());
  for (size_t i = 0; i < src_perm.size(); ++i) src_final.push_back(src_drafts[src_perm[i]]);
  for (size_t i = 0; i < tgt_perm.size(); ++i) tgt_final.push_back(tgt_drafts[tgt_perm[i]]);

  SynthResult result;
  result.corpus.source = assemble_side(src_final, "src", true);
  result.corpus.target = assemble_side(tgt_final, "tgt", false);
  for (const auto& [si, ti] : planted)
    result.gold.pairs.emplace(static_cast<int64_t>(src_pos[si]),
                              static_cast<int64_t>(tgt_pos[ti]));

  const int total_concepts = space.entity_base + n_entities;
  for (int c = 0; c < total_concepts; ++c) {
    result.src_pivot.add(source_token(c), pivot_token(c), 1.0);
    result.tgt_pivot.add(target_token(c), pivot_token(c), 1.0);
    result.src_tgt.add(source_token(c), target_token(c), 1.0);
  }
  result.src_pivot.finalize();
  result.tgt_pivot.finalize();
  result.src_tgt.finalize();
  return result;
}

Scores score_extraction(const std::vector<std::pair<int64_t, int64_t>>& extracted,
                        const GoldAlignment& gold) {
  std::set<std::pair<int64_t, int64_t>> ext(extracted.begin(), extracted.end());
  int64_t correct = 0;
  for (const auto& p : ext) correct += gold.pairs.count(p);

  Scores s;
  if (ext.empty() && gold.pairs.empty()) return {1.0, 1.0, 1.0};
  if (ext.empty()) return {1.0, 0.0, 0.0};
  if (gold.pairs.empty()) return {0.0, 0.0, 0.0};
  s.precision = static_cast<double>(correct) / static_cast<double>(ext.size());
  s.recall = static_cast<double>(correct) / static_cast<double>(gold.pairs.size());
  s.f1 = (s.precision + s.recall) > 0.0
             ? 2.0 * s.precision * s.recall / (s.precision + s.recall)
             : 0.0;
  return s;
}

Scores score_extraction(const std::vector<ScoredPair>& extracted,
                        const GoldAlignment& gold) {
  std::vector<std::pair<int64_t, int64_t>> ids;
  ids.reserve(extracted.size());
  for (const auto& p : extracted) ids.emplace_back(p.source_id, p.target_id);
  return score_extraction(ids, gold);
}

std::vector<CompareRow> compare_runs(const ComparableCorpus& corpus,
                                     const TranslationAdapter& src_adapter,
                                     const TranslationAdapter& tgt_adapter,
                                     const TranslationAdapter* st_adapter,
                                     const std::vector<LabeledConfig>& configs,
                                     const GoldAlignment& gold,
                                     const StopWordList& stops) {
  if (configs.size() < 2) throw Error("compare_runs needs at least 2 configurations");
  std::vector<CompareRow> rows;
  rows.reserve(configs.size());
  for (const auto& lc : configs) {
    CompareRow row;
    row.label = lc.label;
    auto start = std::chrono::steady_clock::now();
    try {
      ExtractionResult res =
          run_extraction(corpus, src_adapter, tgt_adapter, st_adapter, lc.config, stops);
      row.scores = score_extraction(res.pairs, gold);
      row.pairs = res.report.pairs_emitted;
      row.ok = true;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    row.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string comparison_csv(const std::vector<CompareRow>& rows) {
  std::ostringstream out;
  out << "label,precision,recall,f1,pairs,seconds\n";
  char buf[160];
  for (const auto& r : rows) {
    if (r.ok) {
      std::snprintf(buf, sizeof(buf), "%s,%.6f,%.6f,%.6f,%lld,%.3f", r.label.c_str(),
                    r.scores.precision, r.scores.recall, r.scores.f1,
                    static_cast<long long>(r.pairs), r.seconds);
    } else {
      std::snprintf(buf, sizeof(buf), "%s,nan,nan,nan,0,%.3f", r.label.c_str(),
                    r.seconds);
    }
    out << buf << '\n';
  }
  return out.str();
}

std::string comparison_table(const std::vector<CompareRow>& rows) {
  std::ostringstream out;
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%-24s %10s %10s %10s %8s %9s\n", "label", "precision",
                "recall", "f1", "pairs", "seconds");
  out << buf;
  for (const auto& r : rows) {
    if (r.ok) {
      std::snprintf(buf, sizeof(buf), "%-24s %10.4f %10.4f %10.4f %8lld %9.3f\n",
                    r.label.c_str(), r.scores.precision, r.scores.recall, r.scores.f1,
                    static_cast<long long>(r.pairs), r.seconds);
      out << buf;
    } else {
      out << r.label << "  ERROR: " << r.error << '\n';
    }
  }
  return out.str();
}

}  // namespace pivotex
