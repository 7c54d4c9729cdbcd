#pragma once
// Fixtures and reference oracles shared by the unit tests and the acceptance
// binary.

#include <algorithm>
#include <cctype>
#include <memory>
#include <string>
#include <vector>

#include "factcheck/factcheck.hpp"

namespace fctest {

using namespace factcheck;

inline std::string data_path(const std::string& name) { return std::string(FACTCHECK_TEST_DATA) + "/" + name; }

// ---------------------------------------------------------------------------
// Reference oracles, written from the definitions independently of the
// production code paths.

/// Claim rule as a severity maximum over Supports < NEI < Refutes; empty is NEI.
inline VerdictLabel claim_rule_oracle(const std::vector<VerdictLabel>& labels) {
  if (labels.empty()) return VerdictLabel::NotEnoughInfo;
  auto severity = [](VerdictLabel l) {
    return l == VerdictLabel::Supports ? 0 : l == VerdictLabel::NotEnoughInfo ? 1 : 2;
  };
  int worst = 0;
  for (auto l : labels) worst = std::max(worst, severity(l));
  return worst == 0 ? VerdictLabel::Supports : worst == 1 ? VerdictLabel::NotEnoughInfo : VerdictLabel::Refutes;
}

/// Label of the first entry after sorting by probability descending, then
/// label ascending.
inline VerdictLabel max_vote_oracle(std::vector<ScoredVerdict> xs) {
  if (xs.empty()) return VerdictLabel::NotEnoughInfo;
  std::sort(xs.begin(), xs.end(), [](const ScoredVerdict& a, const ScoredVerdict& b) {
    if (a.probability != b.probability) return a.probability > b.probability;
    return label_index(a.label) < label_index(b.label);
  });
  return xs.front().label;
}

/// Lexicographic maximum of (count, max probability, -label index).
inline VerdictLabel majority_vote_oracle(const std::vector<ScoredVerdict>& xs) {
  if (xs.empty()) return VerdictLabel::NotEnoughInfo;
  struct Key {
    std::size_t count;
    double max_p;
    int neg_label;
  };
  std::optional<std::pair<Key, VerdictLabel>> best;
  for (VerdictLabel l : {VerdictLabel::Supports, VerdictLabel::NotEnoughInfo, VerdictLabel::Refutes}) {
    Key k{0, -1.0, -static_cast<int>(label_index(l))};
    for (const auto& x : xs) {
      if (x.label != l) continue;
      ++k.count;
      k.max_p = std::max(k.max_p, x.probability);
    }
    if (k.count == 0) continue;
    auto as_tuple = [](const Key& q) { return std::make_tuple(q.count, q.max_p, q.neg_label); };
    if (!best || as_tuple(k) > as_tuple(best->first)) best = {k, l};
  }
  return best->second;
}

/// Fraction of (positive, negative) pairs ordered correctly; ties count half.
inline double auc_oracle(const std::vector<double>& pos, const std::vector<double>& neg) {
  double wins = 0.0;
  for (double p : pos) {
    for (double n : neg) wins += p > n ? 1.0 : p == n ? 0.5 : 0.0;
  }
  return wins / static_cast<double>(pos.size() * neg.size());
}

inline Triple evidence_triple(const std::string& text) { return make_triple("E", "says", text); }

/// Random scored list of the given size with probabilities on a coarse grid
/// so ties occur.
inline std::vector<ScoredVerdict> random_verdicts(Rng& rng, std::size_t n) {
  std::vector<ScoredVerdict> out;
  for (std::size_t i = 0; i < n; ++i) {
    ScoredVerdict v;
    v.label = kAllLabels[rng.index(3)];
    v.probability = static_cast<double>(rng.index(21)) / 20.0;
    v.evidence = evidence_triple("e" + std::to_string(i));
    out.push_back(v);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Planted knowledge graph: two tuple blocks, three relations per block. A
// tuple is a positive for each relation of its own block with probability
// `density`; 10% of positives are held out. Entity names share a small
// per-block vocabulary of type words, the way titles and person names share
// surface cues, plus a unique token each.

struct PlantedKg {
  std::vector<Fact> train;
  std::vector<Fact> held_out;   // unseen true facts
  std::vector<Fact> negatives;  // cross-block cells, false by construction
};

inline std::string planted_word(Rng& rng, int syllables) {
  static const char* kSyllables[] = {"ka", "lo", "mi", "re", "su", "ta", "vo", "ne", "pi", "da",
                                     "ro", "ze", "fu", "gi", "ha", "ju", "ke", "li", "mo", "nu"};
  std::string w;
  for (int i = 0; i < syllables; ++i) w += kSyllables[rng.index(20)];
  w[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(w[0])));
  return w;
}

inline PlantedKg make_planted_kg(std::uint64_t seed, std::size_t tuples = 200, std::size_t relations = 6,
                                 double density = 0.8) {
  Rng rng(seed);
  std::vector<std::string> type_words[2];
  for (auto& pool : type_words) {
    for (int i = 0; i < 8; ++i) pool.push_back(planted_word(rng, 3));
  }
  struct T {
    std::string s, o;
    std::size_t block;
  };
  std::vector<T> ts;
  for (std::size_t t = 0; t < tuples; ++t) {
    const std::size_t b = t % 2;
    const auto& pool = type_words[b];
    ts.push_back({pool[rng.index(4)] + " " + planted_word(rng, 3), pool[4 + rng.index(4)] + " " + planted_word(rng, 2), b});
  }
  std::vector<std::string> rels;
  for (std::size_t r = 0; r < relations; ++r) rels.push_back("rel " + planted_word(rng, 2) + " of");

  PlantedKg kg;
  for (const auto& t : ts) {
    for (std::size_t r = 0; r < relations; ++r) {
      Fact f{rels[r], t.s, t.o};
      const bool same_block = (r < relations / 2) == (t.block == 0);
      if (!same_block) {
        kg.negatives.push_back(f);
      } else if (rng.uniform() < density) {
        (rng.uniform() < 0.1 ? kg.held_out : kg.train).push_back(f);
      }
    }
  }
  return kg;
}

inline TrainConfig planted_train_config(std::uint64_t seed) {
  TrainConfig cfg;
  cfg.learning_rate = 0.01;
  cfg.batch_size = 16;
  cfg.max_epochs = 3;
  cfg.seed = seed;
  return cfg;
}

// ---------------------------------------------------------------------------
// Film knowledge graph and the mutual-exclusivity fixture.

inline TrainConfig film_train_config() {
  TrainConfig cfg;
  cfg.learning_rate = 0.01;
  cfg.batch_size = 16;
  cfg.max_epochs = 20;
  cfg.early_stopping = false;
  cfg.seed = 3;
  return cfg;
}

inline std::shared_ptr<const EmbeddingProvider> hashed64() {
  static const auto p = std::make_shared<const HashedEmbedder>(64);
  return p;
}

inline std::shared_ptr<const USchemaModel> film_model() {
  static const auto m = std::make_shared<const USchemaModel>(
      train(load_kg_tsv(data_path("film_kg.tsv")), {}, film_train_config(), hashed64()));
  return m;
}

inline std::shared_ptr<const BaselineScorer> fixture_scorer() {
  static const auto s = std::make_shared<const BaselineScorer>(load_exclusive_pairs(data_path("exclusive_pairs.tsv")));
  return s;
}

inline Claim pluto_claim() { return {1, "The Adventures of Pluto Nash was reviewed by Ron Underwood.", VerdictLabel::Refutes, {}}; }

inline EvidenceSet pluto_evidence() {
  EvidenceSet ev;
  ev.entries = {make_evidence_entry("The_Adventures_of_Pluto_Nash", 0,
                                    "The Adventures of Pluto Nash is a 2002 science fiction comedy film starring "
                                    "Eddie Murphy."),
                make_evidence_entry("The_Adventures_of_Pluto_Nash", 1, "The film was directed by Ron Underwood.")};
  return ev;
}

/// Max voting, t_s = 0.5, t_r = 0.95, universal schema threshold 0.8.
inline PipelineConfig pluto_config(bool with_uschema) {
  PipelineConfig cfg;
  cfg.verify.threshold_supports = 0.5;
  cfg.verify.threshold_refutes = 0.95;
  cfg.train = film_train_config();
  if (with_uschema) cfg.uschema = USchemaSettings{"", 0.8, 1, CandidateScope::Both};
  return cfg;
}

inline Pipeline pluto_pipeline(bool with_uschema) {
  return Pipeline(pluto_config(with_uschema), fixture_scorer(), std::make_shared<PatternExtractor>(),
                  with_uschema ? film_model() : nullptr);
}

inline Claim manning_claim() {
  return {2,
          "Manning is a member of Stanford, works on natural language processing, teaches linguistics and was "
          "born in Australia.",
          VerdictLabel::Refutes,
          {}};
}

inline EvidenceSet manning_evidence() {
  EvidenceSet ev;
  ev.entries = {make_evidence_entry("Christopher_Manning", 0, "Manning is a professor of Stanford."),
                make_evidence_entry("Christopher_Manning", 1, "Manning works on natural language processing."),
                make_evidence_entry("Christopher_Manning", 2, "Manning teaches linguistics.")};
  return ev;
}

// ---------------------------------------------------------------------------
// Ten-claim fixture

inline std::shared_ptr<const SentenceIndex> fixture_index() {
  static const auto idx = std::make_shared<const SentenceIndex>(build_index(load_corpus_jsonl(data_path("corpus.jsonl"))));
  return idx;
}

inline std::vector<Claim> fixture_claims() { return load_fever_jsonl(data_path("fever_fixture.jsonl")); }

/// Retrieval k = 3, t_s = 0.5, t_r = 0.9, max voting.
inline PipelineConfig fixture_config() {
  PipelineConfig cfg;
  cfg.k = 3;
  cfg.verify.threshold_supports = 0.5;
  cfg.verify.threshold_refutes = 0.9;
  cfg.verify.seed = 11;
  return cfg;
}

inline Pipeline fixture_pipeline(PipelineConfig cfg = fixture_config(),
                                 std::shared_ptr<const USchemaModel> model = nullptr) {
  return Pipeline(std::move(cfg), fixture_scorer(), std::make_shared<PatternExtractor>(), std::move(model),
                  fixture_index());
}

/// Predictions on the ten-claim fixture in the Retrieved regime, by claim id.
inline const std::vector<VerdictLabel>& frozen_fixture_predictions() {
  using L = VerdictLabel;
  static const std::vector<L> v = {L::Supports, L::Supports,      L::Refutes,  L::NotEnoughInfo, L::Supports,
                                   L::Refutes,  L::Supports,      L::NotEnoughInfo, L::Supports, L::Supports};
  return v;
}

}  // namespace fctest
