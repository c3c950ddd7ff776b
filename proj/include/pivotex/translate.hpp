#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "pivotex/corpus.hpp"

namespace pivotex {

struct TranslationHypothesis {
  int64_t origin_id = -1;
  Tokens tokens;
  double score = 0.0;  // higher is better, arbitrary scale
};

using NBestList = std::vector<TranslationHypothesis>;

class TranslationAdapter {
 public:
  virtual ~TranslationAdapter() = default;

  virtual std::string output_lang() const = 0;

  // Whether translate() may be called from several threads at once.
  virtual bool concurrent_safe() const = 0;

  // At least 1 and at most n_best hypotheses, ranked by descending score,
  // deterministic given (sentence, seed).
  virtual NBestList translate(const Sentence& s, int n_best, uint64_t seed) const = 0;

  // Batch hook; the default loops over translate(). One result per input.
  virtual std::vector<NBestList> translate_batch(
      const std::vector<const Sentence*>& batch, int n_best, uint64_t seed) const;
};

enum class OovPolicy { kCopyThrough, kDrop };

struct DictEntry {
  std::string token;
  double prob;
};

// Token-for-token translation table. Per source token the alternatives
// are kept sorted by descending probability (ties by token), and their
// probabilities must be positive and sum to 1 within 1e-9.
class ProbDictionary {
 public:
  void add(const std::string& source, const std::string& translation, double prob);
  void finalize();  // sorts alternatives and checks the probability sums

  // Lines: source<TAB>translation<TAB>probability
  static ProbDictionary from_file(const std::string& path);
  void save(const std::string& path) const;

  const std::vector<DictEntry>* lookup(const std::string& token) const;
  size_t size() const { return entries_.size(); }

 private:
  std::unordered_map<std::string, std::vector<DictEntry>> entries_;
  bool finalized_ = false;
};

// Echoes the input tokens back as the single hypothesis, score 0.
class IdentityTranslator : public TranslationAdapter {
 public:
  explicit IdentityTranslator(std::string output_lang = "pivot")
      : lang_(std::move(output_lang)) {}
  std::string output_lang() const override { return lang_; }
  bool concurrent_safe() const override { return true; }
  NBestList translate(const Sentence& s, int n_best, uint64_t seed) const override;

 private:
  std::string lang_;
};

// Per-token dictionary translation with n-best enumeration: hypotheses
// are combinations of per-token alternatives, scored by the sum of log
// probabilities; a beam of width n_best yields the exact top n.
class DictionaryTranslator : public TranslationAdapter {
 public:
  DictionaryTranslator(ProbDictionary dict, std::string output_lang,
                       OovPolicy oov = OovPolicy::kCopyThrough);
  std::string output_lang() const override { return lang_; }
  bool concurrent_safe() const override { return true; }
  NBestList translate(const Sentence& s, int n_best, uint64_t seed) const override;

 private:
  ProbDictionary dict_;
  std::string lang_;
  OovPolicy oov_;
};

// Runs a shell command over a batch: one sentence per input line on the
// command's stdin, one output line per sentence with up to n_best
// tab-separated translations. Hypothesis scores are -rank.
class CommandTranslator : public TranslationAdapter {
 public:
  CommandTranslator(std::string command, std::string output_lang);
  std::string output_lang() const override { return lang_; }
  bool concurrent_safe() const override { return false; }
  NBestList translate(const Sentence& s, int n_best, uint64_t seed) const override;
  std::vector<NBestList> translate_batch(const std::vector<const Sentence*>& batch,
                                         int n_best, uint64_t seed) const override;

 private:
  std::string command_;
  std::string lang_;
};

// Wraps adapter.translate with contract checks (n_best >= 1, descending
// scores, origin ids); truncates to n_best.
NBestList translate_sentence(const TranslationAdapter& adapter, const Sentence& s,
                             int n_best, uint64_t seed);

// One n-best list per sentence, indexed by sentence id.
std::vector<NBestList> translate_corpus(const TranslationAdapter& adapter,
                                        const CorpusSide& side, int n_best,
                                        uint64_t seed);

}  // namespace pivotex
