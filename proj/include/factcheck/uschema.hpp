#pragma once
// Universal schema link prediction.
//
// A fact pairs a relation with a <subject, object> tuple. Relations and
// tuples are embedded by a frozen text encoder; two trainable maps project
// them into a shared space, and the fact logit is
//
//   theta(rel, tuple) = <W_r phi(rel), W_t phi(subject + " " + object)>
//
// with probability sigmoid(theta). Training minimizes the Bayesian
// Personalized Ranking loss -log sigmoid(theta_pos - theta_neg) over observed
// facts paired with sampled unobserved tuples of the same relation, using
// AdamW with global gradient-norm clipping.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "factcheck/core.hpp"
#include "factcheck/embedding.hpp"
#include "factcheck/random.hpp"

namespace factcheck {

class NoNegativeAvailable : public Error {
 public:
  explicit NoNegativeAvailable(const std::string& relation)
      : Error("every known tuple is a positive for relation '" + relation + "'") {}
};

struct Fact {
  std::string relation;
  std::string subject;
  std::string object;

  std::string tuple_text() const { return subject + " " + object; }
  friend auto operator<=>(const Fact&, const Fact&) = default;
};

inline Fact fact_from_triple(const Triple& t) { return {t.relation, t.subject, t.object}; }

inline Triple triple_from_fact(const Fact& f) {
  Triple t = make_triple(f.subject, f.relation, f.object);
  t.origin = TripleOrigin::UniversalSchema;
  return t;
}

// ---------------------------------------------------------------------------
// Numerics

inline double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

/// log(1 + exp(x)) without overflow.
inline double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

/// -log sigmoid(theta_pos - theta_neg), on pre-sigmoid logits.
inline double bpr_loss(double theta_pos, double theta_neg) { return softplus(theta_neg - theta_pos); }

// ---------------------------------------------------------------------------
// Model

class USchemaModel {
 public:
  USchemaModel(std::shared_ptr<const EmbeddingProvider> provider, Eigen::MatrixXd relation_map,
               Eigen::MatrixXd tuple_map)
      : provider_(std::move(provider)),
        relation_map_(std::move(relation_map)),
        tuple_map_(std::move(tuple_map)) {
    if (!provider_) throw ConfigError("universal schema model needs an embedding provider");
    const auto d = static_cast<Eigen::Index>(provider_->dim());
    if (relation_map_.rows() != d || relation_map_.cols() != d || tuple_map_.rows() != d ||
        tuple_map_.cols() != d) {
      throw DimensionMismatch(provider_->dim(), static_cast<std::size_t>(relation_map_.rows()));
    }
    if (!relation_map_.allFinite() || !tuple_map_.allFinite()) {
      throw ConfigError("universal schema maps must be finite");
    }
  }

  /// Both maps start as the identity, so the initial logit is the raw
  /// embedding dot product.
  static USchemaModel identity(std::shared_ptr<const EmbeddingProvider> provider) {
    const auto d = static_cast<Eigen::Index>(provider->dim());
    return {provider, Eigen::MatrixXd::Identity(d, d), Eigen::MatrixXd::Identity(d, d)};
  }

  static USchemaModel zeros(std::shared_ptr<const EmbeddingProvider> provider) {
    const auto d = static_cast<Eigen::Index>(provider->dim());
    return {provider, Eigen::MatrixXd::Zero(d, d), Eigen::MatrixXd::Zero(d, d)};
  }

  std::size_t dim() const { return provider_->dim(); }
  const EmbeddingProvider& provider() const { return *provider_; }
  const std::shared_ptr<const EmbeddingProvider>& provider_ptr() const { return provider_; }
  const Eigen::MatrixXd& relation_map() const { return relation_map_; }
  const Eigen::MatrixXd& tuple_map() const { return tuple_map_; }
  Eigen::MatrixXd& relation_map() { return relation_map_; }
  Eigen::MatrixXd& tuple_map() { return tuple_map_; }

  Eigen::VectorXd embed_checked(std::string_view text) const {
    Eigen::VectorXd v = provider_->embed(text);
    if (static_cast<std::size_t>(v.size()) != dim()) {
      throw DimensionMismatch(dim(), static_cast<std::size_t>(v.size()));
    }
    return v;
  }

  double theta(const Eigen::VectorXd& relation, const Eigen::VectorXd& tuple) const {
    return (relation_map_ * relation).dot(tuple_map_ * tuple);
  }

  double theta(const Fact& f) const {
    return theta(embed_checked(f.relation), embed_checked(f.tuple_text()));
  }

 private:
  std::shared_ptr<const EmbeddingProvider> provider_;
  Eigen::MatrixXd relation_map_;
  Eigen::MatrixXd tuple_map_;
};

/// Probability that the tuple holds in the relation.
inline double score_fact(const USchemaModel& model, const Fact& f) { return logistic(model.theta(f)); }

// ---------------------------------------------------------------------------
// Objective and gradient

/// A (positive, negative) training pair after embedding. Negatives share the
/// positive's relation.
struct EmbeddedPair {
  Eigen::VectorXd relation;
  Eigen::VectorXd positive_tuple;
  Eigen::VectorXd negative_tuple;
};

struct BprGradient {
  Eigen::MatrixXd relation_map;
  Eigen::MatrixXd tuple_map;
  double loss = 0.0;
};

/// Mean BPR loss over the pairs.
inline double bpr_objective(const Eigen::MatrixXd& relation_map, const Eigen::MatrixXd& tuple_map,
                            std::span<const EmbeddedPair> pairs) {
  if (pairs.empty()) return 0.0;
  double total = 0.0;
  for (const auto& p : pairs) {
    const Eigen::VectorXd u = relation_map * p.relation;
    total += bpr_loss(u.dot(tuple_map * p.positive_tuple), u.dot(tuple_map * p.negative_tuple));
  }
  return total / static_cast<double>(pairs.size());
}

/// Mean BPR loss and its gradient with respect to both maps.
///
/// With u = W_r a, delta = u . W_t (b+ - b-) and L = softplus(-delta):
///   dL/dW_r = -sigmoid(-delta) (W_t (b+ - b-)) a^T
///   dL/dW_t = -sigmoid(-delta) u (b+ - b-)^T
inline BprGradient bpr_gradient(const Eigen::MatrixXd& relation_map, const Eigen::MatrixXd& tuple_map,
                                std::span<const EmbeddedPair> pairs) {
  BprGradient g{Eigen::MatrixXd::Zero(relation_map.rows(), relation_map.cols()),
                Eigen::MatrixXd::Zero(tuple_map.rows(), tuple_map.cols()), 0.0};
  if (pairs.empty()) return g;
  for (const auto& p : pairs) {
    const Eigen::VectorXd u = relation_map * p.relation;
    const Eigen::VectorXd diff = p.positive_tuple - p.negative_tuple;
    const Eigen::VectorXd v = tuple_map * diff;
    const double delta = u.dot(v);
    g.loss += softplus(-delta);
    const double coef = -logistic(-delta);
    g.relation_map.noalias() += coef * v * p.relation.transpose();
    g.tuple_map.noalias() += coef * u * diff.transpose();
  }
  const double inv = 1.0 / static_cast<double>(pairs.size());
  g.relation_map *= inv;
  g.tuple_map *= inv;
  g.loss *= inv;
  return g;
}

// ---------------------------------------------------------------------------
// Fact store and negative sampling

class FactStore {
 public:
  FactStore() = default;
  explicit FactStore(std::span<const Fact> facts) {
    for (const auto& f : facts) add(f);
  }

  void add(const Fact& f) {
    const auto key = std::make_pair(f.subject, f.object);
    auto [it, inserted] = tuple_ids_.emplace(key, tuples_.size());
    if (inserted) tuples_.push_back(key);
    positives_[f.relation].insert(it->second);
  }

  std::size_t tuple_count() const { return tuples_.size(); }
  const std::pair<std::string, std::string>& tuple(std::size_t id) const { return tuples_.at(id); }

  bool contains(const Fact& f) const {
    auto t = tuple_ids_.find({f.subject, f.object});
    if (t == tuple_ids_.end()) return false;
    auto r = positives_.find(f.relation);
    return r != positives_.end() && r->second.contains(t->second);
  }

  std::size_t positive_count(const std::string& relation) const {
    auto r = positives_.find(relation);
    return r == positives_.end() ? 0 : r->second.size();
  }

  bool is_positive(const std::string& relation, std::size_t tuple_id) const {
    auto r = positives_.find(relation);
    return r != positives_.end() && r->second.contains(tuple_id);
  }

 private:
  std::vector<std::pair<std::string, std::string>> tuples_;
  std::map<std::pair<std::string, std::string>, std::size_t> tuple_ids_;
  std::map<std::string, std::set<std::size_t>> positives_;
};

/// Same relation, tuple drawn uniformly from the store's tuples that are not
/// known positives for that relation.
inline Fact sample_negative(const Fact& positive, const FactStore& store, Rng& rng) {
  const std::size_t n = store.tuple_count();
  const std::size_t taken = store.positive_count(positive.relation);
  if (taken >= n) throw NoNegativeAvailable(positive.relation);
  std::size_t id = 0;
  if (2 * taken <= n) {
    do {
      id = rng.index(n);
    } while (store.is_positive(positive.relation, id));
  } else {
    std::vector<std::size_t> free;
    free.reserve(n - taken);
    for (std::size_t i = 0; i < n; ++i) {
      if (!store.is_positive(positive.relation, i)) free.push_back(i);
    }
    id = free[rng.index(free.size())];
  }
  const auto& [s, o] = store.tuple(id);
  return {positive.relation, s, o};
}

// ---------------------------------------------------------------------------
// Training

struct TrainConfig {
  std::size_t batch_size = 32;
  double learning_rate = 2e-5;
  double adam_epsilon = 1e-8;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double weight_decay = 0.01;
  double max_grad_norm = 1.0;
  std::size_t max_epochs = 3;
  bool early_stopping = true;
  std::size_t shard_size = 10'000'000;
  std::uint64_t seed = 0;

  void validate() const {
    if (batch_size == 0 || max_epochs == 0 || shard_size == 0) {
      throw ConfigError("batch size, epochs and shard size must be positive");
    }
    if (!(learning_rate >= 0.0) || !(adam_epsilon > 0.0) || !(weight_decay >= 0.0) ||
        !(max_grad_norm > 0.0)) {
      throw ConfigError("invalid optimizer hyperparameters");
    }
  }
};

/// Decoupled-weight-decay Adam over both maps.
class AdamW {
 public:
  AdamW(const TrainConfig& cfg, Eigen::Index d)
      : cfg_(cfg),
        m_r_(Eigen::MatrixXd::Zero(d, d)),
        v_r_(Eigen::MatrixXd::Zero(d, d)),
        m_t_(Eigen::MatrixXd::Zero(d, d)),
        v_t_(Eigen::MatrixXd::Zero(d, d)) {}

  /// Clips the joint gradient norm, then applies one update.
  void step(USchemaModel& model, BprGradient grad) {
    const double norm = std::sqrt(grad.relation_map.squaredNorm() + grad.tuple_map.squaredNorm());
    if (norm > cfg_.max_grad_norm) {
      const double scale = cfg_.max_grad_norm / (norm + 1e-6);
      grad.relation_map *= scale;
      grad.tuple_map *= scale;
    }
    ++t_;
    update(model.relation_map(), grad.relation_map, m_r_, v_r_);
    update(model.tuple_map(), grad.tuple_map, m_t_, v_t_);
  }

  std::size_t steps() const { return t_; }

 private:
  void update(Eigen::MatrixXd& w, const Eigen::MatrixXd& g, Eigen::MatrixXd& m, Eigen::MatrixXd& v) {
    const double b1 = cfg_.adam_beta1;
    const double b2 = cfg_.adam_beta2;
    m = b1 * m + (1.0 - b1) * g;
    v = b2 * v + (1.0 - b2) * g.cwiseProduct(g);
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
    const double lr = cfg_.learning_rate;
    w *= 1.0 - lr * cfg_.weight_decay;
    w.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + cfg_.adam_epsilon);
  }

  TrainConfig cfg_;
  std::size_t t_ = 0;
  Eigen::MatrixXd m_r_, v_r_, m_t_, v_t_;
};

namespace detail {

/// Embeds each distinct relation and tuple text once.
class EmbeddingCache {
 public:
  explicit EmbeddingCache(const USchemaModel& model) : model_(model) {}

  const Eigen::VectorXd& relation(const std::string& text) { return get(relations_, text); }
  const Eigen::VectorXd& tuple(const Fact& f) { return get(tuples_, f.tuple_text()); }

  EmbeddedPair pair(const Fact& pos, const Fact& neg) {
    return {relation(pos.relation), tuple(pos), tuple(neg)};
  }

 private:
  const Eigen::VectorXd& get(std::unordered_map<std::string, Eigen::VectorXd>& map,
                             const std::string& text) {
    auto it = map.find(text);
    if (it == map.end()) it = map.emplace(text, model_.embed_checked(text)).first;
    return it->second;
  }

  const USchemaModel& model_;
  std::unordered_map<std::string, Eigen::VectorXd> relations_;
  std::unordered_map<std::string, Eigen::VectorXd> tuples_;
};

}  // namespace detail

struct TrainReport {
  /// Dev loss of the starting model followed by one entry per finished epoch.
  std::vector<double> dev_loss;
  std::size_t epochs_run = 0;
  /// Epoch of the returned model; 0 is the starting model.
  std::size_t best_epoch = 0;
  std::size_t optimizer_steps = 0;
};

/// Trains the maps from `init` (identity maps when absent).
///
/// Positives are shuffled each epoch and cut into shards of `shard_size`,
/// each consumed in minibatches. With early stopping the dev loss is checked
/// after every epoch and training stops the first time it fails to improve;
/// the best-dev model is returned. Without a dev set, 5% of the positives are
/// held out for this purpose.
inline USchemaModel train(std::span<const Fact> positives, std::span<const Fact> dev,
                          const TrainConfig& cfg, std::shared_ptr<const EmbeddingProvider> provider,
                          TrainReport* report = nullptr,
                          const std::optional<USchemaModel>& init = std::nullopt) {
  cfg.validate();
  if (positives.empty()) throw std::invalid_argument("training needs at least one positive fact");
  USchemaModel model = init ? *init : USchemaModel::identity(std::move(provider));

  std::vector<Fact> train_set(positives.begin(), positives.end());
  std::vector<Fact> dev_set(dev.begin(), dev.end());
  if (cfg.early_stopping && dev_set.empty()) {
    Rng split_rng(cfg.seed, {0x686f6c64});
    split_rng.shuffle(train_set.begin(), train_set.end());
    const std::size_t holdout = train_set.size() / 20;
    dev_set.assign(train_set.end() - static_cast<std::ptrdiff_t>(holdout), train_set.end());
    train_set.resize(train_set.size() - holdout);
  }

  FactStore store(positives);
  for (const auto& f : dev) store.add(f);

  detail::EmbeddingCache cache(model);
  std::vector<EmbeddedPair> dev_pairs;
  {
    Rng dev_rng(cfg.seed, {0x646576});
    for (const auto& f : dev_set) dev_pairs.push_back(cache.pair(f, sample_negative(f, store, dev_rng)));
  }
  const bool use_dev = cfg.early_stopping && !dev_pairs.empty();

  TrainReport rep;
  std::optional<USchemaModel> best;
  double best_loss = 0.0;
  if (use_dev) {
    best_loss = bpr_objective(model.relation_map(), model.tuple_map(), dev_pairs);
    rep.dev_loss.push_back(best_loss);
    best = model;
  }

  AdamW opt(cfg, static_cast<Eigen::Index>(model.dim()));
  Rng rng(cfg.seed, {0x747261696e});
  std::vector<std::size_t> order(train_set.size());
  std::vector<EmbeddedPair> batch;
  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(order.begin(), order.end());
    for (std::size_t shard = 0; shard < order.size(); shard += cfg.shard_size) {
      const std::size_t shard_end = std::min(order.size(), shard + cfg.shard_size);
      for (std::size_t b = shard; b < shard_end; b += cfg.batch_size) {
        const std::size_t b_end = std::min(shard_end, b + cfg.batch_size);
        batch.clear();
        for (std::size_t k = b; k < b_end; ++k) {
          const Fact& pos = train_set[order[k]];
          batch.push_back(cache.pair(pos, sample_negative(pos, store, rng)));
        }
        opt.step(model, bpr_gradient(model.relation_map(), model.tuple_map(), batch));
      }
    }
    rep.epochs_run = epoch;
    if (use_dev) {
      const double loss = bpr_objective(model.relation_map(), model.tuple_map(), dev_pairs);
      rep.dev_loss.push_back(loss);
      if (loss < best_loss) {
        best_loss = loss;
        best = model;
        rep.best_epoch = epoch;
      } else {
        break;
      }
    } else {
      rep.best_epoch = epoch;
    }
  }
  rep.optimizer_steps = opt.steps();
  if (report) *report = rep;
  return use_dev ? *best : model;
}

// ---------------------------------------------------------------------------
// Gap filling

enum class CandidateScope : std::uint8_t {
  /// Claim relations paired with evidence tuples only.
  ClaimRelations,
  /// Additionally evidence relations paired with claim tuples.
  Both,
};

/// Candidate facts combining claim relations with evidence tuples (claim
/// order major), then, for CandidateScope::Both, evidence relations with
/// claim tuples (evidence order major). Unary triples contribute relations
/// but no tuples. Facts already present verbatim as evidence triples are
/// excluded.
inline std::vector<Fact> generate_candidates(std::span<const Triple> claim_triples,
                                             std::span<const Triple> evidence_triples,
                                             CandidateScope scope = CandidateScope::Both) {
  auto distinct_relations = [](std::span<const Triple> ts) {
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (const auto& t : ts) {
      if (seen.insert(t.relation).second) out.push_back(t.relation);
    }
    return out;
  };
  auto distinct_tuples = [](std::span<const Triple> ts) {
    std::vector<std::pair<std::string, std::string>> out;
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& t : ts) {
      if (t.unary()) continue;
      if (seen.emplace(t.subject, t.object).second) out.emplace_back(t.subject, t.object);
    }
    return out;
  };

  std::set<Fact> present;
  for (const auto& e : evidence_triples) present.insert(fact_from_triple(e));

  std::vector<Fact> out;
  std::set<Fact> emitted;
  auto cross = [&](const std::vector<std::string>& rels,
                   const std::vector<std::pair<std::string, std::string>>& tuples) {
    for (const auto& r : rels) {
      for (const auto& [s, o] : tuples) {
        Fact f{r, s, o};
        if (present.contains(f) || !emitted.insert(f).second) continue;
        out.push_back(std::move(f));
      }
    }
  };
  cross(distinct_relations(claim_triples), distinct_tuples(evidence_triples));
  if (scope == CandidateScope::Both) {
    cross(distinct_relations(evidence_triples), distinct_tuples(claim_triples));
  }
  return out;
}

struct ScoredCandidate {
  Fact fact;
  double probability = 0.0;
};

inline std::vector<ScoredCandidate> score_candidates(const USchemaModel& model,
                                                     std::span<const Fact> candidates) {
  std::vector<ScoredCandidate> out;
  out.reserve(candidates.size());
  for (const auto& f : candidates) out.push_back({f, score_fact(model, f)});
  return out;
}

/// For each claim triple labelled NEI, the candidates scoring at least
/// `threshold`, as universal-schema triples. Every other claim triple maps to
/// an empty list.
inline std::vector<std::vector<Triple>> fill_gaps(const USchemaModel& model,
                                                  std::span<const Triple> claim_triples,
                                                  std::span<const Triple> evidence_triples,
                                                  std::span<const VerdictLabel> labels, double threshold,
                                                  CandidateScope scope = CandidateScope::Both) {
  if (labels.size() != claim_triples.size()) {
    throw std::invalid_argument("one label per claim triple is required");
  }
  std::vector<std::vector<Triple>> out(claim_triples.size());
  const bool any_nei = std::find(labels.begin(), labels.end(), VerdictLabel::NotEnoughInfo) != labels.end();
  if (!any_nei) return out;

  const auto candidates = generate_candidates(claim_triples, evidence_triples, scope);
  std::vector<Triple> accepted;
  for (const auto& sc : score_candidates(model, candidates)) {
    if (sc.probability >= threshold) accepted.push_back(triple_from_fact(sc.fact));
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == VerdictLabel::NotEnoughInfo) out[i] = accepted;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Inference-time updates

struct SessionUpdate {
  USchemaModel model;
  std::size_t steps_taken = 0;
  /// Observed facts skipped because every known tuple was positive for
  /// their relation.
  std::size_t facts_without_negative = 0;
};

/// Returns a copy of `base` advanced by `steps` BPR updates on the observed
/// facts, each paired with a fresh negative drawn from the observed tuples.
/// Facts with no available negative are skipped; if none remain the copy is
/// returned unchanged. `base` is never modified.
inline SessionUpdate session_update(const USchemaModel& base, std::span<const Fact> observed,
                                    std::size_t steps, const TrainConfig& cfg,
                                    std::uint64_t session_id = 0) {
  SessionUpdate out{base, 0, 0};
  if (steps == 0 || observed.empty()) return out;
  const FactStore store(observed);
  detail::EmbeddingCache cache(out.model);
  AdamW opt(cfg, static_cast<Eigen::Index>(base.dim()));
  Rng rng(cfg.seed, {0x73657373, session_id});
  std::vector<EmbeddedPair> batch;
  for (std::size_t step = 0; step < steps; ++step) {
    batch.clear();
    std::size_t skipped = 0;
    for (const auto& f : observed) {
      try {
        batch.push_back(cache.pair(f, sample_negative(f, store, rng)));
      } catch (const NoNegativeAvailable&) {
        ++skipped;
      }
    }
    out.facts_without_negative = skipped;
    if (batch.empty()) break;
    opt.step(out.model, bpr_gradient(out.model.relation_map(), out.model.tuple_map(), batch));
    ++out.steps_taken;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Persistence

namespace detail {

inline std::string hexfloat(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", x);
  return buf;
}

inline void write_matrix(std::ostream& out, const Eigen::MatrixXd& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) out << ' ';
      out << hexfloat(m(r, c));
    }
    out << '\n';
  }
}

inline Eigen::MatrixXd read_matrix(std::istream& in, Eigen::Index d) {
  Eigen::MatrixXd m(d, d);
  std::string tok;
  for (Eigen::Index r = 0; r < d; ++r) {
    for (Eigen::Index c = 0; c < d; ++c) {
      if (!(in >> tok)) throw ConfigError("model file truncated");
      char* end = nullptr;
      m(r, c) = std::strtod(tok.c_str(), &end);
      if (end == tok.c_str() || *end != '\0') throw ConfigError("bad number in model file: " + tok);
    }
  }
  return m;
}

}  // namespace detail

/// Text container: a header, the provider id, d, then both maps row-major
/// as C99 hex floats, so values round-trip bit-exactly.
inline void save_model(const USchemaModel& model, std::ostream& out) {
  out << "factcheck-uschema 1\n";
  out << "provider " << model.provider().id() << '\n';
  out << "dim " << model.dim() << '\n';
  out << "relation_map\n";
  detail::write_matrix(out, model.relation_map());
  out << "tuple_map\n";
  detail::write_matrix(out, model.tuple_map());
}

inline void save_model(const USchemaModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write model: " + path);
  save_model(model, out);
}

/// The provider must match the one the model was trained with.
inline USchemaModel load_model(std::istream& in, std::shared_ptr<const EmbeddingProvider> provider) {
  std::string word;
  std::string version;
  if (!(in >> word >> version) || word != "factcheck-uschema" || version != "1") {
    throw ConfigError("not a universal schema model file");
  }
  std::string provider_id;
  if (!(in >> word) || word != "provider" || !(in >> provider_id)) throw ConfigError("model file: missing provider");
  std::size_t d = 0;
  if (!(in >> word) || word != "dim" || !(in >> d) || d == 0) throw ConfigError("model file: missing dim");
  if (provider_id != provider->id()) {
    throw ConfigError("model was trained with provider '" + provider_id + "', not '" + provider->id() + "'");
  }
  if (d != provider->dim()) throw DimensionMismatch(provider->dim(), d);
  const auto n = static_cast<Eigen::Index>(d);
  if (!(in >> word) || word != "relation_map") throw ConfigError("model file: missing relation_map");
  Eigen::MatrixXd wr = detail::read_matrix(in, n);
  if (!(in >> word) || word != "tuple_map") throw ConfigError("model file: missing tuple_map");
  Eigen::MatrixXd wt = detail::read_matrix(in, n);
  return {std::move(provider), std::move(wr), std::move(wt)};
}

inline USchemaModel load_model(const std::string& path, std::shared_ptr<const EmbeddingProvider> provider) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open model: " + path);
  return load_model(in, std::move(provider));
}

/// Knowledge-graph TSV: subject, relation, object; no header.
inline std::vector<Fact> load_kg_tsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open knowledge graph: " + path);
  std::vector<Fact> facts;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto a = line.find('\t');
    const auto b = a == std::string::npos ? a : line.find('\t', a + 1);
    if (b == std::string::npos || line.find('\t', b + 1) != std::string::npos) {
      throw ParseError(lineno, "expected 3 tab-separated columns");
    }
    Fact f{normalize_text(line.substr(a + 1, b - a - 1)), normalize_text(line.substr(0, a)),
           normalize_text(line.substr(b + 1))};
    if (f.subject.empty() || f.relation.empty() || f.object.empty()) {
      throw ParseError(lineno, "empty column");
    }
    facts.push_back(std::move(f));
  }
  return facts;
}

}  // namespace factcheck
