#pragma once
// End-to-end claim verification: evidence -> triples -> per-triple verdicts
// -> optional gap filling for NEI triples -> claim verdict.

#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "factcheck/claim_verify.hpp"
#include "factcheck/core.hpp"
#include "factcheck/embedding.hpp"
#include "factcheck/nli.hpp"
#include "factcheck/remote.hpp"
#include "factcheck/retrieval.hpp"
#include "factcheck/triple_extract.hpp"
#include "factcheck/triple_verify.hpp"
#include "factcheck/uschema.hpp"

namespace factcheck {

enum class ScorerKind : std::uint8_t { Baseline, Remote };
enum class EmbedderKind : std::uint8_t { Hashed, Remote };

struct USchemaSettings {
  std::string model_path;  // empty when the model is supplied in code
  double threshold = 0.5;
  std::size_t session_steps = 1;
  CandidateScope scope = CandidateScope::Both;
};

struct PipelineConfig {
  VerifyConfig verify;
  RetrievalMode retrieval_mode = RetrievalMode::TfIdfOnly;
  std::size_t k = 5;
  std::optional<USchemaSettings> uschema;
  TrainConfig train;

  ScorerKind scorer = ScorerKind::Baseline;
  EmbedderKind embedder = EmbedderKind::Hashed;
  std::size_t hashed_dim = 64;
  std::string endpoint = "http://127.0.0.1:8765";

  std::string verb_lexicon_path;
  std::string exclusive_pairs_path;
  std::string corpus_path;
  std::string index_path;
  std::string dataset_path;
  std::string kg_path;

  void validate() const {
    verify.validate();
    train.validate();
    if (k == 0) throw ConfigError("retrieval k must be >= 1");
    if (uschema && !(uschema->threshold >= 0.0 && uschema->threshold <= 1.0)) {
      throw ConfigError("universal schema threshold must lie in [0, 1]");
    }
  }
};

namespace detail {

template <typename T>
void read_opt(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

inline std::string resolve_path(const nlohmann::json& j, const char* key,
                                const std::filesystem::path& base, bool must_exist) {
  if (!j.contains(key)) return {};
  std::filesystem::path p = j.at(key).get<std::string>();
  if (p.is_relative()) p = base / p;
  if (must_exist && !std::filesystem::exists(p)) {
    throw ConfigError(std::string("config '") + key + "': no such file: " + p.string());
  }
  return p.string();
}

}  // namespace detail

/// Parses a JSON config. Relative paths resolve against `base_dir`. Input
/// files must exist; "index" and "uschema.model" may be outputs and are not
/// checked.
inline PipelineConfig parse_pipeline_config(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  PipelineConfig cfg;
  try {
    if (j.contains("verify")) {
      const auto& v = j["verify"];
      detail::read_opt(v, "t_s", cfg.verify.threshold_supports);
      detail::read_opt(v, "t_r", cfg.verify.threshold_refutes);
      detail::read_opt(v, "seed", cfg.verify.seed);
      if (v.contains("voting")) {
        auto m = parse_voting(v["voting"].get<std::string>());
        if (!m) throw ConfigError("unknown voting method: " + v["voting"].get<std::string>());
        cfg.verify.voting = *m;
      }
    }
    if (j.contains("retrieval")) {
      const auto& r = j["retrieval"];
      detail::read_opt(r, "k", cfg.k);
      if (r.contains("mode")) {
        auto m = parse_retrieval_mode(r["mode"].get<std::string>());
        if (!m) throw ConfigError("unknown retrieval mode: " + r["mode"].get<std::string>());
        cfg.retrieval_mode = *m;
      }
    }
    if (j.contains("scorer")) {
      const auto& s = j["scorer"];
      const std::string kind = s.value("kind", "baseline");
      if (kind == "baseline") {
        cfg.scorer = ScorerKind::Baseline;
      } else if (kind == "remote") {
        cfg.scorer = ScorerKind::Remote;
      } else {
        throw ConfigError("unknown scorer: " + kind);
      }
      detail::read_opt(s, "endpoint", cfg.endpoint);
      cfg.exclusive_pairs_path = detail::resolve_path(s, "exclusive_pairs", base_dir, true);
    }
    if (j.contains("embedder")) {
      const auto& e = j["embedder"];
      const std::string kind = e.value("kind", "hashed");
      if (kind == "hashed") {
        cfg.embedder = EmbedderKind::Hashed;
      } else if (kind == "remote") {
        cfg.embedder = EmbedderKind::Remote;
      } else {
        throw ConfigError("unknown embedder: " + kind);
      }
      detail::read_opt(e, "dim", cfg.hashed_dim);
    }
    if (j.contains("extractor")) {
      cfg.verb_lexicon_path = detail::resolve_path(j["extractor"], "verb_lexicon", base_dir, true);
    }
    if (j.contains("uschema") && !j["uschema"].is_null()) {
      const auto& u = j["uschema"];
      USchemaSettings us;
      us.model_path = detail::resolve_path(u, "model", base_dir, false);
      detail::read_opt(u, "threshold", us.threshold);
      detail::read_opt(u, "session_steps", us.session_steps);
      if (u.contains("scope")) {
        const auto scope = u["scope"].get<std::string>();
        if (scope == "claim_relations") {
          us.scope = CandidateScope::ClaimRelations;
        } else if (scope == "both") {
          us.scope = CandidateScope::Both;
        } else {
          throw ConfigError("unknown candidate scope: " + scope);
        }
      }
      if (u.value("enabled", true)) cfg.uschema = us;
    }
    if (j.contains("train")) {
      const auto& t = j["train"];
      detail::read_opt(t, "batch_size", cfg.train.batch_size);
      detail::read_opt(t, "learning_rate", cfg.train.learning_rate);
      detail::read_opt(t, "adam_epsilon", cfg.train.adam_epsilon);
      detail::read_opt(t, "weight_decay", cfg.train.weight_decay);
      detail::read_opt(t, "max_grad_norm", cfg.train.max_grad_norm);
      detail::read_opt(t, "max_epochs", cfg.train.max_epochs);
      detail::read_opt(t, "early_stopping", cfg.train.early_stopping);
      detail::read_opt(t, "shard_size", cfg.train.shard_size);
      detail::read_opt(t, "seed", cfg.train.seed);
    }
    cfg.corpus_path = detail::resolve_path(j, "corpus", base_dir, true);
    cfg.dataset_path = detail::resolve_path(j, "dataset", base_dir, true);
    cfg.kg_path = detail::resolve_path(j, "kg", base_dir, true);
    cfg.index_path = detail::resolve_path(j, "index", base_dir, false);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

inline PipelineConfig load_pipeline_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config: " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config " + path + ": " + e.what());
  }
  return parse_pipeline_config(j, std::filesystem::path(path).parent_path());
}

// ---------------------------------------------------------------------------
// Trace types

struct TripleTrace {
  Triple triple;
  std::vector<ScoredVerdict> scored;
  VerdictLabel initial_label = VerdictLabel::NotEnoughInfo;
  /// Universal-schema triples used to re-verify an NEI triple.
  std::vector<Triple> filled;
  std::vector<ScoredVerdict> filled_scored;
  VerdictLabel label = VerdictLabel::NotEnoughInfo;
};

struct ClaimResult {
  std::int64_t claim_id = 0;
  VerdictLabel label = VerdictLabel::NotEnoughInfo;
  ClaimRule rule = ClaimRule::NoTriples;
  EvidenceSet evidence;
  std::vector<Triple> evidence_triples;
  std::vector<TripleTrace> triples;
  bool uschema_consulted = false;
  std::optional<std::string> error;
};

namespace detail {

inline nlohmann::json triple_json(const Triple& t) {
  nlohmann::json j{{"subject", t.subject},
                   {"relation", t.relation},
                   {"object", t.object},
                   {"origin", to_string(t.origin)}};
  if (t.provenance) {
    const auto& p = *t.provenance;
    j["source"] = {{"doc_id", p.source.doc_id},
                   {"sentence", p.source.sentence_index},
                   {"span", {p.source.span.start, p.source.span.end}}};
  }
  return j;
}

inline nlohmann::json verdicts_json(const std::vector<ScoredVerdict>& vs) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& v : vs) {
    arr.push_back({{"label", to_string(v.label)}, {"probability", v.probability},
                   {"evidence", linearize_triple(v.evidence)}});
  }
  return arr;
}

}  // namespace detail

inline nlohmann::json to_json(const ClaimResult& r) {
  nlohmann::json j;
  j["claim_id"] = r.claim_id;
  j["label"] = to_string(r.label);
  j["rule"] = to_string(r.rule);
  j["uschema_consulted"] = r.uschema_consulted;
  if (r.error) j["error"] = *r.error;
  nlohmann::json ev = nlohmann::json::array();
  for (const auto& e : r.evidence.entries) {
    ev.push_back({{"doc_id", e.source.doc_id},
                  {"sentence", e.source.sentence_index},
                  {"score", e.score},
                  {"text", e.text}});
  }
  j["evidence"] = std::move(ev);
  nlohmann::json et = nlohmann::json::array();
  for (const auto& t : r.evidence_triples) et.push_back(detail::triple_json(t));
  j["evidence_triples"] = std::move(et);
  nlohmann::json ts = nlohmann::json::array();
  for (const auto& t : r.triples) {
    nlohmann::json filled = nlohmann::json::array();
    for (const auto& f : t.filled) filled.push_back(detail::triple_json(f));
    ts.push_back({{"triple", detail::triple_json(t.triple)},
                  {"scored", detail::verdicts_json(t.scored)},
                  {"initial_label", to_string(t.initial_label)},
                  {"filled", std::move(filled)},
                  {"filled_scored", detail::verdicts_json(t.filled_scored)},
                  {"label", to_string(t.label)}});
  }
  j["triples"] = std::move(ts);
  return j;
}

// ---------------------------------------------------------------------------
// Pipeline

/// Observed facts for a session update: the binary evidence triples.
inline std::vector<Fact> observed_facts(std::span<const Triple> evidence_triples) {
  std::vector<Fact> out;
  for (const auto& t : evidence_triples) {
    if (!t.unary()) out.push_back(fact_from_triple(t));
  }
  return out;
}

class Pipeline {
 public:
  /// `model` may be null when `cfg.uschema` is unset. `index` is only needed
  /// when verifying against retrieved evidence; `retrieval_embedder` only
  /// for the cosine and product retrieval modes.
  Pipeline(PipelineConfig cfg, std::shared_ptr<const NliScorer> scorer,
           std::shared_ptr<const TripleExtractor> extractor,
           std::shared_ptr<const USchemaModel> model = nullptr,
           std::shared_ptr<const SentenceIndex> index = nullptr,
           std::shared_ptr<const EmbeddingProvider> retrieval_embedder = nullptr)
      : cfg_(std::move(cfg)),
        scorer_(std::move(scorer)),
        extractor_(std::move(extractor)),
        model_(std::move(model)),
        index_(std::move(index)),
        retrieval_embedder_(std::move(retrieval_embedder)) {
    cfg_.validate();
    if (!scorer_ || !extractor_) throw ConfigError("pipeline needs a scorer and an extractor");
    if (cfg_.uschema && !model_) throw ConfigError("universal schema enabled but no model supplied");
  }

  const PipelineConfig& config() const { return cfg_; }
  const NliScorer& scorer() const { return *scorer_; }
  const TripleExtractor& extractor() const { return *extractor_; }
  const USchemaModel* model() const { return model_.get(); }
  const SentenceIndex* index() const { return index_.get(); }
  const EmbeddingProvider* retrieval_embedder() const { return retrieval_embedder_.get(); }

  /// Same components, different configuration.
  Pipeline with_config(PipelineConfig cfg) const {
    return Pipeline(std::move(cfg), scorer_, extractor_, model_, index_, retrieval_embedder_);
  }

  EvidenceSet retrieve(const Claim& claim) const {
    if (!index_) throw ConfigError("retrieval needs a sentence index");
    return retrieve_top_k(claim, *index_, cfg_.k, cfg_.retrieval_mode, retrieval_embedder_.get());
  }

  /// Verifies against retrieved evidence.
  ClaimResult verify_claim(const Claim& claim) const { return verify_claim(claim, retrieve(claim)); }

  /// Verifies against the supplied evidence; no retrieval happens.
  ClaimResult verify_claim(const Claim& claim, const EvidenceSet& evidence) const {
    ClaimResult out;
    out.claim_id = claim.id;
    out.evidence = evidence;

    ClaimEvidenceTriples triples;
    try {
      triples = extract_for_claim_and_evidence(claim, evidence, *extractor_);
    } catch (const EmptyClaimExtraction&) {
      out.label = VerdictLabel::NotEnoughInfo;
      out.rule = ClaimRule::NoTriples;
      return out;
    }
    out.evidence_triples = triples.evidence;

    std::vector<VerdictLabel> labels;
    for (std::size_t i = 0; i < triples.claim.size(); ++i) {
      TripleTrace tt;
      tt.triple = triples.claim[i];
      auto v = verify_triple_detailed(tt.triple, triples.evidence, *scorer_, cfg_.verify,
                                      VoteStream{claim.id, i, 0});
      tt.scored = std::move(v.scored);
      tt.initial_label = tt.label = v.label;
      labels.push_back(v.label);
      out.triples.push_back(std::move(tt));
    }

    const bool any_nei =
        std::find(labels.begin(), labels.end(), VerdictLabel::NotEnoughInfo) != labels.end();
    if (cfg_.uschema && any_nei) {
      out.uschema_consulted = true;
      const auto& us = *cfg_.uschema;
      const auto observed = observed_facts(triples.evidence);
      const SessionUpdate session =
          session_update(*model_, observed, us.session_steps, cfg_.train, static_cast<std::uint64_t>(claim.id));
      const auto filled =
          fill_gaps(session.model, triples.claim, triples.evidence, labels, us.threshold, us.scope);
      for (std::size_t i = 0; i < out.triples.size(); ++i) {
        if (filled[i].empty()) continue;
        TripleTrace& tt = out.triples[i];
        tt.filled = filled[i];
        // Re-verify against the extracted evidence plus the filled triples.
        std::vector<Triple> augmented = triples.evidence;
        augmented.insert(augmented.end(), tt.filled.begin(), tt.filled.end());
        auto v = verify_triple_detailed(tt.triple, augmented, *scorer_, cfg_.verify,
                                        VoteStream{claim.id, i, 1});
        tt.filled_scored.assign(v.scored.begin() + static_cast<std::ptrdiff_t>(triples.evidence.size()),
                                v.scored.end());
        tt.label = v.label;
        labels[i] = v.label;
      }
    }

    const ClaimDecision d = aggregate_claim_detailed(labels);
    out.label = d.label;
    out.rule = d.rule;
    return out;
  }

 private:
  PipelineConfig cfg_;
  std::shared_ptr<const NliScorer> scorer_;
  std::shared_ptr<const TripleExtractor> extractor_;
  std::shared_ptr<const USchemaModel> model_;
  std::shared_ptr<const SentenceIndex> index_;
  std::shared_ptr<const EmbeddingProvider> retrieval_embedder_;
};

// ---------------------------------------------------------------------------
// Component construction from a config

inline std::shared_ptr<const NliScorer> make_scorer(const PipelineConfig& cfg) {
  if (cfg.scorer == ScorerKind::Remote) return std::make_shared<RemoteScorer>(cfg.endpoint);
  ExclusivePairs pairs;
  if (!cfg.exclusive_pairs_path.empty()) pairs = load_exclusive_pairs(cfg.exclusive_pairs_path);
  return std::make_shared<BaselineScorer>(std::move(pairs));
}

inline std::shared_ptr<const EmbeddingProvider> make_embedder(const PipelineConfig& cfg) {
  if (cfg.embedder == EmbedderKind::Remote) return std::make_shared<RemoteEmbedder>(cfg.endpoint);
  return std::make_shared<HashedEmbedder>(cfg.hashed_dim);
}

inline std::shared_ptr<const TripleExtractor> make_extractor(const PipelineConfig& cfg) {
  ExtractorConfig ec = default_extractor_config();
  if (!cfg.verb_lexicon_path.empty()) ec.verbs = load_verb_lexicon(cfg.verb_lexicon_path);
  return std::make_shared<PatternExtractor>(std::move(ec));
}

}  // namespace factcheck
