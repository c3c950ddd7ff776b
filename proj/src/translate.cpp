#include "pivotex/translate.hpp"

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace pivotex {

std::vector<NBestList> TranslationAdapter::translate_batch(
    const std::vector<const Sentence*>& batch, int n_best, uint64_t seed) const {
  std::vector<NBestList> out;
  out.reserve(batch.size());
  for (const Sentence* s : batch) out.push_back(translate(*s, n_best, seed));
  return out;
}

void ProbDictionary::add(const std::string& source, const std::string& translation,
                         double prob) {
  entries_[source].push_back({translation, prob});
  finalized_ = false;
}

void ProbDictionary::finalize() {
  for (auto& [source, alts] : entries_) {
    std::sort(alts.begin(), alts.end(), [](const DictEntry& a, const DictEntry& b) {
      if (a.prob != b.prob) return a.prob > b.prob;
      return a.token < b.token;
    });
    double sum = 0.0;
    for (const auto& e : alts) {
      if (!(e.prob > 0.0))
        throw Error("dictionary entry for '" + source + "' has non-positive probability");
      sum += e.prob;
    }
    if (std::abs(sum - 1.0) > 1e-9)
      throw Error("dictionary probabilities for '" + source + "' sum to " +
                  std::to_string(sum) + ", expected 1");
  }
  finalized_ = true;
}

ProbDictionary ProbDictionary::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open dictionary: " + path);
  ProbDictionary dict;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string src, tgt, prob_str;
    if (!std::getline(ss, src, '\t') || !std::getline(ss, tgt, '\t') ||
        !std::getline(ss, prob_str))
      throw Error(path + ": line " + std::to_string(line_no) +
                  ": expected source<TAB>translation<TAB>probability");
    dict.add(src, tgt, std::stod(prob_str));
  }
  dict.finalize();
  return dict;
}

void ProbDictionary::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write dictionary: " + path);
  std::vector<std::string> keys;
  keys.reserve(entries_.size());
  for (const auto& [k, v] : entries_) keys.push_back(k);
  std::sort(keys.begin(), keys.end());
  char buf[64];
  for (const auto& k : keys) {
    for (const auto& e : entries_.at(k)) {
      std::snprintf(buf, sizeof(buf), "%.9g", e.prob);
      out << k << '\t' << e.token << '\t' << buf << '\n';
    }
  }
}

const std::vector<DictEntry>* ProbDictionary::lookup(const std::string& token) const {
  auto it = entries_.find(token);
  return it == entries_.end() ? nullptr : &it->second;
}

NBestList IdentityTranslator::translate(const Sentence& s, int n_best,
                                        uint64_t /*seed*/) const {
  if (n_best < 1) throw Error("n_best must be >= 1");
  return {TranslationHypothesis{s.id, s.tokens, 0.0}};
}

DictionaryTranslator::DictionaryTranslator(ProbDictionary dict, std::string output_lang,
                                           OovPolicy oov)
    : dict_(std::move(dict)), lang_(std::move(output_lang)), oov_(oov) {}

NBestList DictionaryTranslator::translate(const Sentence& s, int n_best,
                                          uint64_t /*seed*/) const {
  if (n_best < 1) throw Error("n_best must be >= 1");

  struct Option {
    const std::string* token;  // null means the position emits nothing
    double logp;
  };
  std::vector<std::vector<Option>> positions;
  positions.reserve(s.tokens.size());
  static const std::string kEmpty;
  for (const auto& tok : s.tokens) {
    const std::vector<DictEntry>* alts = dict_.lookup(tok);
    std::vector<Option> opts;
    if (alts) {
      opts.reserve(alts->size());
      for (const auto& e : *alts) opts.push_back({&e.token, std::log(e.prob)});
    } else if (oov_ == OovPolicy::kCopyThrough) {
      opts.push_back({&tok, 0.0});
    } else {
      opts.push_back({nullptr, 0.0});
    }
    positions.push_back(std::move(opts));
  }

  struct Partial {
    double score;
    std::vector<const std::string*> picks;
  };
  std::vector<Partial> beam{{0.0, {}}};
  for (const auto& opts : positions) {
    std::vector<Partial> next;
    next.reserve(beam.size() * opts.size());
    for (const auto& p : beam) {
      for (const auto& o : opts) {
        Partial q{p.score + o.logp, p.picks};
        q.picks.push_back(o.token);
        next.push_back(std::move(q));
      }
    }
    // options and beam are each ranked, so a stable sort keeps ties in a
    // fixed (choice-index lexicographic) order
    std::stable_sort(next.begin(), next.end(),
                     [](const Partial& a, const Partial& b) { return a.score > b.score; });
    if (static_cast<int>(next.size()) > n_best) next.resize(static_cast<size_t>(n_best));
    beam = std::move(next);
  }

  NBestList out;
  out.reserve(beam.size());
  for (const auto& p : beam) {
    TranslationHypothesis hyp;
    hyp.origin_id = s.id;
    hyp.score = p.score;
    for (const std::string* t : p.picks)
      if (t) hyp.tokens.push_back(*t);
    out.push_back(std::move(hyp));
  }
  return out;
}

CommandTranslator::CommandTranslator(std::string command, std::string output_lang)
    : command_(std::move(command)), lang_(std::move(output_lang)) {}

NBestList CommandTranslator::translate(const Sentence& s, int n_best,
                                       uint64_t seed) const {
  return translate_batch({&s}, n_best, seed).front();
}

std::vector<NBestList> CommandTranslator::translate_batch(
    const std::vector<const Sentence*>& batch, int n_best, uint64_t /*seed*/) const {
  if (n_best < 1) throw Error("n_best must be >= 1");
  if (batch.empty()) return {};

  namespace fs = std::filesystem;
  static std::atomic<uint64_t> counter{0};
  const fs::path dir = fs::temp_directory_path();
  const std::string tag =
      std::to_string(::getpid()) + "-" + std::to_string(counter.fetch_add(1));
  const fs::path in_path = dir / ("pivotex-mt-" + tag + ".in");
  const fs::path out_path = dir / ("pivotex-mt-" + tag + ".out");

  {
    std::ofstream in_file(in_path);
    if (!in_file) throw Error("cannot write adapter input: " + in_path.string());
    for (const Sentence* s : batch) {
      std::string line = s->text;
      for (char& c : line)
        if (c == '\n' || c == '\r' || c == '\t') c = ' ';
      in_file << line << '\n';
    }
  }

  const std::string shell = "( " + command_ + " ) < '" + in_path.string() + "' > '" +
                            out_path.string() + "'";
  int rc = std::system(shell.c_str());
  std::vector<std::string> lines;
  if (rc == 0) {
    std::ifstream out_file(out_path);
    std::string line;
    while (std::getline(out_file, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      lines.push_back(line);
    }
  }
  fs::remove(in_path);
  fs::remove(out_path);
  if (rc != 0)
    throw Error("translation failed for sentence " + std::to_string(batch[0]->id) +
                ": command exited with status " + std::to_string(rc));
  if (lines.size() != batch.size()) {
    int64_t missing = batch[std::min(lines.size(), batch.size() - 1)]->id;
    throw Error("translation failed for sentence " + std::to_string(missing) +
                ": command produced " + std::to_string(lines.size()) + " lines for " +
                std::to_string(batch.size()) + " inputs");
  }

  std::vector<NBestList> out;
  out.reserve(batch.size());
  for (size_t i = 0; i < batch.size(); ++i) {
    NBestList hyps;
    std::istringstream ss(lines[i]);
    std::string field;
    int rank = 0;
    while (rank < n_best && std::getline(ss, field, '\t')) {
      TranslationHypothesis hyp;
      hyp.origin_id = batch[i]->id;
      hyp.tokens = tokenize(field);
      hyp.score = -static_cast<double>(rank);
      hyps.push_back(std::move(hyp));
      ++rank;
    }
    if (hyps.empty())
      hyps.push_back(TranslationHypothesis{batch[i]->id, {}, 0.0});
    out.push_back(std::move(hyps));
  }
  return out;
}

namespace {

void check_contract(const NBestList& hyps, const Sentence& s) {
  if (hyps.empty())
    throw Error("adapter returned no hypotheses for sentence " + std::to_string(s.id));
  for (size_t i = 0; i < hyps.size(); ++i) {
    if (hyps[i].origin_id != s.id)
      throw Error("adapter returned origin id " + std::to_string(hyps[i].origin_id) +
                  " for sentence " + std::to_string(s.id));
    if (i > 0 && hyps[i].score > hyps[i - 1].score + 1e-12)
      throw Error("adapter hypotheses not ranked by descending score for sentence " +
                  std::to_string(s.id));
  }
}

}  // namespace

NBestList translate_sentence(const TranslationAdapter& adapter, const Sentence& s,
                             int n_best, uint64_t seed) {
  if (n_best < 1) throw Error("n_best must be >= 1");
  NBestList hyps = adapter.translate(s, n_best, seed);
  if (static_cast<int>(hyps.size()) > n_best) hyps.resize(static_cast<size_t>(n_best));
  check_contract(hyps, s);
  return hyps;
}

std::vector<NBestList> translate_corpus(const TranslationAdapter& adapter,
                                        const CorpusSide& side, int n_best,
                                        uint64_t seed) {
  if (n_best < 1) throw Error("n_best must be >= 1");
  std::vector<const Sentence*> batch;
  batch.reserve(side.sentences.size());
  for (const auto& s : side.sentences) batch.push_back(&s);
  std::vector<NBestList> result = adapter.translate_batch(batch, n_best, seed);
  if (result.size() != batch.size())
    throw Error("adapter returned " + std::to_string(result.size()) +
                " n-best lists for " + std::to_string(batch.size()) + " sentences");
  for (size_t i = 0; i < batch.size(); ++i) {
    if (static_cast<int>(result[i].size()) > n_best)
      result[i].resize(static_cast<size_t>(n_best));
    check_contract(result[i], *batch[i]);
  }
  return result;
}

}  // namespace pivotex
