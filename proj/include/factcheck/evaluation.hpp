#pragma once
// Dataset-level evaluation: evidence regimes, metrics, a parallel batch
// runner, and threshold grid search.

#include <algorithm>
#include <array>
#include <atomic>
#include <fstream>
#include <mutex>
#include <ostream>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "factcheck/pipeline.hpp"

namespace factcheck {

enum class EvidenceRegime : std::uint8_t { GoldRandom, GoldRetrieved, Retrieved };

inline std::string_view to_string(EvidenceRegime r) {
  switch (r) {
    case EvidenceRegime::GoldRandom:
      return "gold+random";
    case EvidenceRegime::GoldRetrieved:
      return "gold+retrieved";
    case EvidenceRegime::Retrieved:
      return "retrieved";
  }
  return "retrieved";
}

inline std::optional<EvidenceRegime> parse_regime(std::string_view s) {
  if (s == "gold+random") return EvidenceRegime::GoldRandom;
  if (s == "gold+retrieved") return EvidenceRegime::GoldRetrieved;
  if (s == "retrieved") return EvidenceRegime::Retrieved;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Evidence construction

/// Sentences of every gold group, first occurrence order, looked up in the
/// index.
inline EvidenceSet gold_evidence(const Claim& claim, const SentenceIndex& index) {
  EvidenceSet out;
  std::set<SentenceKey> seen;
  for (const auto& group : claim.gold_evidence) {
    for (const auto& key : group) {
      if (!seen.insert(key).second) continue;
      const auto sid = index.find(key);
      if (!sid) {
        throw ConfigError("gold sentence " + key.doc_id + ":" + std::to_string(key.sentence_index) +
                          " of claim " + std::to_string(claim.id) + " is not in the corpus");
      }
      const auto& s = index.sentence(*sid);
      out.entries.push_back({s.source, s.text, 1.0});
    }
  }
  return out;
}

/// k sentences drawn uniformly without replacement from those outside the
/// claim's gold groups, on a substream keyed by the claim id.
inline EvidenceSet random_evidence(const Claim& claim, const SentenceIndex& index, std::size_t k,
                                   std::uint64_t seed) {
  std::set<SentenceKey> gold;
  for (const auto& g : claim.gold_evidence) gold.insert(g.begin(), g.end());
  std::vector<std::size_t> pool;
  for (std::size_t sid = 0; sid < index.size(); ++sid) {
    if (!gold.contains(index.sentence(sid).source.key())) pool.push_back(sid);
  }
  Rng rng(seed, {0x72616e646f6d, static_cast<std::uint64_t>(claim.id)});
  const std::size_t take = std::min(k, pool.size());
  for (std::size_t i = 0; i < take; ++i) {
    std::swap(pool[i], pool[i + rng.index(pool.size() - i)]);
  }
  EvidenceSet out;
  for (std::size_t i = 0; i < take; ++i) {
    const auto& s = index.sentence(pool[i]);
    out.entries.push_back({s.source, s.text, 0.0});
  }
  return out;
}

/// Supports/Refutes claims get gold evidence in both gold regimes; NEI claims
/// get random sentences (Gold+Random) or retrieved ones (Gold+Retrieved).
/// The Retrieved regime retrieves for every claim.
inline EvidenceSet regime_evidence(const Claim& claim, const Pipeline& pipeline, EvidenceRegime regime,
                                   std::uint64_t seed) {
  const bool gold_claim = claim.gold_label && *claim.gold_label != VerdictLabel::NotEnoughInfo;
  if (regime == EvidenceRegime::Retrieved || (!gold_claim && regime == EvidenceRegime::GoldRetrieved)) {
    return pipeline.retrieve(claim);
  }
  if (!pipeline.index()) throw ConfigError("evidence regimes need a sentence index");
  if (gold_claim) return gold_evidence(claim, *pipeline.index());
  return random_evidence(claim, *pipeline.index(), pipeline.config().k, seed);
}

/// True when some gold group is entirely inside the evidence.
inline bool covers_gold_group(const Claim& claim, const EvidenceSet& evidence) {
  std::set<SentenceKey> have;
  for (const auto& e : evidence.entries) have.insert(e.source.key());
  return std::any_of(claim.gold_evidence.begin(), claim.gold_evidence.end(), [&](const EvidenceGroup& g) {
    return std::all_of(g.begin(), g.end(), [&](const SentenceKey& k) { return have.contains(k); });
  });
}

// ---------------------------------------------------------------------------
// Metrics

struct ClaimOutcome {
  std::int64_t claim_id = 0;
  std::optional<VerdictLabel> gold;
  std::optional<VerdictLabel> predicted;  // empty when the claim failed
  bool evidence_complete = false;
  std::optional<std::string> error;
};

struct MetricsReport {
  std::size_t claims = 0;
  std::size_t failures = 0;
  double accuracy = 0.0;
  double fever_score = 0.0;
  double macro_f1 = 0.0;
  std::array<double, 3> precision{};
  std::array<double, 3> recall{};
  std::array<double, 3> f1{};
  /// confusion[gold][predicted], indexed by label_index.
  std::array<std::array<std::size_t, 3>, 3> confusion{};
  std::string trace_path;
};

/// Failed claims count as incorrect and are left out of the confusion
/// matrix. Claims without a gold label are ignored.
inline MetricsReport compute_metrics(std::span<const ClaimOutcome> outcomes) {
  MetricsReport r;
  std::size_t correct = 0;
  std::size_t fever = 0;
  for (const auto& o : outcomes) {
    if (!o.gold) continue;
    ++r.claims;
    if (!o.predicted) {
      ++r.failures;
      continue;
    }
    ++r.confusion[label_index(*o.gold)][label_index(*o.predicted)];
    if (*o.predicted != *o.gold) continue;
    ++correct;
    if (*o.gold == VerdictLabel::NotEnoughInfo || o.evidence_complete) ++fever;
  }
  if (r.claims == 0) return r;
  r.accuracy = static_cast<double>(correct) / static_cast<double>(r.claims);
  r.fever_score = static_cast<double>(fever) / static_cast<double>(r.claims);
  double f1_sum = 0.0;
  for (std::size_t c = 0; c < 3; ++c) {
    std::size_t predicted = 0;
    std::size_t actual = 0;
    for (std::size_t o = 0; o < 3; ++o) {
      predicted += r.confusion[o][c];
      actual += r.confusion[c][o];
    }
    const double tp = static_cast<double>(r.confusion[c][c]);
    r.precision[c] = predicted ? tp / static_cast<double>(predicted) : 0.0;
    r.recall[c] = actual ? tp / static_cast<double>(actual) : 0.0;
    const double pr = r.precision[c] + r.recall[c];
    r.f1[c] = pr > 0.0 ? 2.0 * r.precision[c] * r.recall[c] / pr : 0.0;
    f1_sum += r.f1[c];
  }
  r.macro_f1 = f1_sum / 3.0;
  return r;
}

inline nlohmann::json to_json(const MetricsReport& r) {
  nlohmann::json per_class;
  for (VerdictLabel l : kAllLabels) {
    const auto i = label_index(l);
    per_class[std::string(to_string(l))] = {
        {"precision", r.precision[i]}, {"recall", r.recall[i]}, {"f1", r.f1[i]}};
  }
  nlohmann::json confusion = nlohmann::json::array();
  for (const auto& row : r.confusion) confusion.push_back(row);
  nlohmann::json j{{"claims", r.claims},         {"failures", r.failures},
                   {"accuracy", r.accuracy},     {"fever_score", r.fever_score},
                   {"macro_f1", r.macro_f1},     {"per_class", per_class},
                   {"confusion", confusion},     {"label_order", {"REFUTES", "NOT ENOUGH INFO", "SUPPORTS"}}};
  if (!r.trace_path.empty()) j["trace"] = r.trace_path;
  return j;
}

inline void print_report(std::ostream& out, const MetricsReport& r) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "claims %zu  failures %zu\naccuracy %.4f  fever %.4f  macro-F1 %.4f\n",
                r.claims, r.failures, r.accuracy, r.fever_score, r.macro_f1);
  out << buf;
  out << "class             precision  recall  f1\n";
  for (VerdictLabel l : kAllLabels) {
    const auto i = label_index(l);
    std::snprintf(buf, sizeof buf, "%-17s %9.4f  %6.4f  %6.4f\n", std::string(to_string(l)).c_str(),
                  r.precision[i], r.recall[i], r.f1[i]);
    out << buf;
  }
  out << "confusion (rows gold, cols predicted; R NEI S)\n";
  for (const auto& row : r.confusion) {
    std::snprintf(buf, sizeof buf, "  %6zu %6zu %6zu\n", row[0], row[1], row[2]);
    out << buf;
  }
  if (!r.trace_path.empty()) out << "trace " << r.trace_path << '\n';
}

// ---------------------------------------------------------------------------
// Batch runner

struct EvalOptions {
  EvidenceRegime regime = EvidenceRegime::Retrieved;
  std::size_t workers = 1;
  std::uint64_t seed = 0;
  std::string trace_path;  // JSONL, one object per claim; empty for none
};

struct EvaluationResult {
  MetricsReport report;
  std::vector<ClaimOutcome> outcomes;  // sorted by claim id
  std::vector<ClaimResult> results;    // aligned with outcomes
};

/// Runs every claim, optionally on a bounded worker pool. Per-claim errors
/// are recorded and do not stop the run. Output order is by claim id
/// regardless of completion order.
inline EvaluationResult evaluate(std::span<const Claim> dataset, const Pipeline& pipeline,
                                 const EvalOptions& opts = {}) {
  if (dataset.empty()) throw std::invalid_argument("evaluation dataset is empty");
  std::vector<ClaimOutcome> outcomes(dataset.size());
  std::vector<ClaimResult> results(dataset.size());

  auto run_one = [&](std::size_t i) {
    const Claim& c = dataset[i];
    ClaimOutcome& o = outcomes[i];
    o.claim_id = c.id;
    o.gold = c.gold_label;
    try {
      const EvidenceSet ev = regime_evidence(c, pipeline, opts.regime, opts.seed);
      results[i] = pipeline.verify_claim(c, ev);
      o.predicted = results[i].label;
      o.evidence_complete = covers_gold_group(c, ev);
    } catch (const std::exception& e) {
      o.error = e.what();
      results[i].claim_id = c.id;
      results[i].error = e.what();
    }
  };

  const std::size_t workers = std::max<std::size_t>(1, std::min(opts.workers, dataset.size()));
  if (workers == 1) {
    for (std::size_t i = 0; i < dataset.size(); ++i) run_one(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < dataset.size(); i = next++) run_one(i);
      });
    }
  }

  std::vector<std::size_t> order(dataset.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return dataset[a].id < dataset[b].id; });
  EvaluationResult out;
  for (std::size_t i : order) {
    out.outcomes.push_back(std::move(outcomes[i]));
    out.results.push_back(std::move(results[i]));
  }
  out.report = compute_metrics(out.outcomes);

  if (!opts.trace_path.empty()) {
    std::ofstream trace(opts.trace_path);
    if (!trace) throw ConfigError("cannot write trace: " + opts.trace_path);
    for (std::size_t i = 0; i < out.results.size(); ++i) {
      nlohmann::json j = to_json(out.results[i]);
      if (out.outcomes[i].gold) j["gold"] = to_string(*out.outcomes[i].gold);
      j["regime"] = to_string(opts.regime);
      trace << j.dump() << '\n';
    }
    out.report.trace_path = opts.trace_path;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Threshold grid search

struct ThresholdGrid {
  std::vector<double> t_supports;
  std::vector<double> t_refutes;
  std::vector<double> t_uschema;
};

struct GridPoint {
  double t_supports = 0.0;
  double t_refutes = 0.0;
  double t_uschema = 0.0;
  double accuracy = 0.0;
};

struct GridSearchResult {
  PipelineConfig best_config;
  GridPoint best;
  /// Every grid point, t_s major, then t_r, then t_us.
  std::vector<GridPoint> surface;
};

inline void write_surface_csv(std::ostream& out, std::span<const GridPoint> surface) {
  out << "t_s,t_r,t_us,accuracy\n";
  char buf[128];
  for (const auto& p : surface) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", p.t_supports, p.t_refutes, p.t_uschema,
                  p.accuracy);
    out << buf;
  }
}

/// Everything about one claim that does not depend on the three thresholds.
struct ClaimScoreCache {
  std::int64_t claim_id = 0;
  std::optional<VerdictLabel> gold;
  bool failed = false;
  bool no_triples = false;
  std::vector<std::vector<ScoredVerdict>> base;        // [claim triple][evidence triple]
  std::vector<double> candidate_probability;           // [candidate]
  std::vector<std::vector<ScoredVerdict>> candidates;  // [claim triple][candidate]
};

/// Extracts triples and runs every scorer call the grid could need: each
/// claim triple against the evidence and against every gap-filling
/// candidate, plus the session model's candidate probabilities.
inline ClaimScoreCache build_score_cache(const Claim& claim, const EvidenceSet& evidence,
                                         const Pipeline& pipeline) {
  ClaimScoreCache cache;
  cache.claim_id = claim.id;
  cache.gold = claim.gold_label;
  ClaimEvidenceTriples triples;
  try {
    triples = extract_for_claim_and_evidence(claim, evidence, pipeline.extractor());
  } catch (const EmptyClaimExtraction&) {
    cache.no_triples = true;
    return cache;
  }
  for (const auto& t : triples.claim) {
    cache.base.push_back(score_against_evidence(t, triples.evidence, pipeline.scorer()));
  }
  const auto& cfg = pipeline.config();
  if (!cfg.uschema) return cache;
  const auto& us = *cfg.uschema;
  const auto observed = observed_facts(triples.evidence);
  const SessionUpdate session = session_update(*pipeline.model(), observed, us.session_steps, cfg.train,
                                               static_cast<std::uint64_t>(claim.id));
  const auto facts = generate_candidates(triples.claim, triples.evidence, us.scope);
  std::vector<Triple> candidate_triples;
  for (const auto& f : facts) {
    cache.candidate_probability.push_back(score_fact(session.model, f));
    candidate_triples.push_back(triple_from_fact(f));
  }
  for (const auto& t : triples.claim) {
    cache.candidates.push_back(score_against_evidence(t, candidate_triples, pipeline.scorer()));
  }
  return cache;
}

/// Claim label at one grid point from cached scores.
inline std::optional<VerdictLabel> decide_cached(const ClaimScoreCache& cache, const VerifyConfig& verify,
                                                 bool uschema_enabled, double t_uschema) {
  if (cache.failed) return std::nullopt;
  if (cache.no_triples) return VerdictLabel::NotEnoughInfo;
  std::vector<VerdictLabel> labels;
  for (std::size_t i = 0; i < cache.base.size(); ++i) {
    labels.push_back(decide_triple(cache.base[i], verify, VoteStream{cache.claim_id, i, 0}));
  }
  if (uschema_enabled) {
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] != VerdictLabel::NotEnoughInfo) continue;
      std::vector<ScoredVerdict> augmented = cache.base[i];
      bool any = false;
      for (std::size_t c = 0; c < cache.candidate_probability.size(); ++c) {
        if (cache.candidate_probability[c] >= t_uschema) {
          augmented.push_back(cache.candidates[i][c]);
          any = true;
        }
      }
      if (any) labels[i] = decide_triple(augmented, verify, VoteStream{cache.claim_id, i, 1});
    }
  }
  return aggregate_claim(labels);
}

namespace detail {

inline void check_grid(const ThresholdGrid& grid) {
  if (grid.t_supports.empty() || grid.t_refutes.empty() || grid.t_uschema.empty()) {
    throw std::invalid_argument("every threshold grid axis needs at least one value");
  }
}

/// Highest accuracy; ties to smallest t_s, then t_r, then t_us.
inline bool better_point(const GridPoint& a, const GridPoint& b) {
  if (a.accuracy != b.accuracy) return a.accuracy > b.accuracy;
  if (a.t_supports != b.t_supports) return a.t_supports < b.t_supports;
  if (a.t_refutes != b.t_refutes) return a.t_refutes < b.t_refutes;
  return a.t_uschema < b.t_uschema;
}

inline PipelineConfig config_at(PipelineConfig cfg, const GridPoint& p) {
  cfg.verify.threshold_supports = p.t_supports;
  cfg.verify.threshold_refutes = p.t_refutes;
  if (cfg.uschema) cfg.uschema->threshold = p.t_uschema;
  return cfg;
}

template <typename AccuracyAt>
GridSearchResult run_grid(const ThresholdGrid& grid, const PipelineConfig& base, AccuracyAt accuracy_at) {
  check_grid(grid);
  GridSearchResult out;
  for (double ts : grid.t_supports) {
    for (double tr : grid.t_refutes) {
      for (double tu : grid.t_uschema) {
        GridPoint p{ts, tr, tu, 0.0};
        p.accuracy = accuracy_at(p);
        out.surface.push_back(p);
        if (out.surface.size() == 1 || better_point(p, out.best)) out.best = p;
      }
    }
  }
  out.best_config = config_at(base, out.best);
  return out;
}

}  // namespace detail

/// Grid search that scores every claim once and replays thresholds over the
/// cached verdicts.
inline GridSearchResult grid_search_thresholds(std::span<const Claim> dev, const Pipeline& pipeline,
                                               const ThresholdGrid& grid, const EvalOptions& opts = {}) {
  detail::check_grid(grid);
  if (dev.empty()) throw std::invalid_argument("grid search dataset is empty");
  std::vector<ClaimScoreCache> caches;
  caches.reserve(dev.size());
  for (const auto& c : dev) {
    try {
      caches.push_back(build_score_cache(c, regime_evidence(c, pipeline, opts.regime, opts.seed), pipeline));
    } catch (const std::exception&) {
      ClaimScoreCache failed;
      failed.claim_id = c.id;
      failed.gold = c.gold_label;
      failed.failed = true;
      caches.push_back(std::move(failed));
    }
  }
  const PipelineConfig& base = pipeline.config();
  return detail::run_grid(grid, base, [&](const GridPoint& p) {
    const PipelineConfig cfg = detail::config_at(base, p);
    std::vector<ClaimOutcome> outcomes;
    for (const auto& cache : caches) {
      ClaimOutcome o;
      o.claim_id = cache.claim_id;
      o.gold = cache.gold;
      o.predicted = decide_cached(cache, cfg.verify, cfg.uschema.has_value(), p.t_uschema);
      outcomes.push_back(o);
    }
    return compute_metrics(outcomes).accuracy;
  });
}

/// Reference grid search: a full evaluate() at every grid point.
inline GridSearchResult grid_search_thresholds_naive(std::span<const Claim> dev, const Pipeline& pipeline,
                                                     const ThresholdGrid& grid, const EvalOptions& opts = {}) {
  EvalOptions eval_opts = opts;
  eval_opts.trace_path.clear();
  return detail::run_grid(grid, pipeline.config(), [&](const GridPoint& p) {
    const Pipeline at = pipeline.with_config(detail::config_at(pipeline.config(), p));
    return evaluate(dev, at, eval_opts).report.accuracy;
  });
}

}  // namespace factcheck
