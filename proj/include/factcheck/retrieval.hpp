#pragma once
// Sentence-level evidence retrieval: sublinear tf-idf cosine, optionally
// weighted by an embedding cosine.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "factcheck/core.hpp"
#include "factcheck/embedding.hpp"

namespace factcheck {

class EmptyCorpus : public Error {
 public:
  EmptyCorpus() : Error("corpus contains no sentences") {}
};

class MissingEmbedder : public Error {
 public:
  MissingEmbedder() : Error("retrieval mode requires an embedding provider") {}
};

enum class RetrievalMode : std::uint8_t { TfIdfOnly, CosineOnly, Product };

inline std::string_view to_string(RetrievalMode mode) {
  switch (mode) {
    case RetrievalMode::TfIdfOnly:
      return "tfidf";
    case RetrievalMode::CosineOnly:
      return "cosine";
    case RetrievalMode::Product:
      return "product";
  }
  return "tfidf";
}

inline std::optional<RetrievalMode> parse_retrieval_mode(std::string_view s) {
  if (s == "tfidf") return RetrievalMode::TfIdfOnly;
  if (s == "cosine") return RetrievalMode::CosineOnly;
  if (s == "product") return RetrievalMode::Product;
  return std::nullopt;
}

struct Document {
  std::string doc_id;
  std::vector<std::string> sentences;
};

/// (term id, weight), sorted by term id.
using SparseVector = std::vector<std::pair<std::uint32_t, double>>;

inline double sparse_dot(const SparseVector& a, const SparseVector& b) {
  double sum = 0.0;
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (i->first < j->first) {
      ++i;
    } else if (j->first < i->first) {
      ++j;
    } else {
      sum += i->second * j->second;
      ++i;
      ++j;
    }
  }
  return sum;
}

struct IndexedSentence {
  SourceRef source;
  std::string text;
  SparseVector vector;
};

class SentenceIndex {
 public:
  std::size_t size() const { return sentences_.size(); }
  const IndexedSentence& sentence(std::size_t id) const { return sentences_.at(id); }
  const std::vector<IndexedSentence>& sentences() const { return sentences_; }

  std::optional<std::uint32_t> term_id(const std::string& term) const {
    auto it = vocabulary_.find(term);
    if (it == vocabulary_.end()) return std::nullopt;
    return it->second;
  }
  std::uint32_t document_frequency(std::uint32_t term) const { return df_.at(term); }
  std::size_t vocabulary_size() const { return df_.size(); }

  std::optional<std::size_t> find(const SentenceKey& key) const {
    auto it = by_key_.find(key);
    if (it == by_key_.end()) return std::nullopt;
    return it->second;
  }

  /// tf-idf weight (1 + ln tf) * ln(N / df).
  double weight(std::size_t tf, std::uint32_t term) const {
    return (1.0 + std::log(static_cast<double>(tf))) *
           std::log(static_cast<double>(sentences_.size()) / static_cast<double>(df_[term]));
  }

  /// L2-normalized tf-idf vector of arbitrary text; out-of-vocabulary terms
  /// are dropped. The zero vector stays zero.
  SparseVector vectorize(std::string_view text) const {
    std::map<std::uint32_t, std::size_t> tf;
    for (const auto& tok : alnum_tokens(text)) {
      if (auto id = term_id(tok)) ++tf[*id];
    }
    SparseVector v;
    v.reserve(tf.size());
    double norm2 = 0.0;
    for (const auto& [term, count] : tf) {
      const double w = weight(count, term);
      v.emplace_back(term, w);
      norm2 += w * w;
    }
    if (norm2 > 0.0) {
      const double inv = 1.0 / std::sqrt(norm2);
      for (auto& [term, w] : v) w *= inv;
    }
    return v;
  }

  /// Precomputes sentence embeddings for semantic scoring with `embedder`.
  void attach_embeddings(const EmbeddingProvider& embedder) {
    std::vector<std::string> texts;
    texts.reserve(sentences_.size());
    for (const auto& s : sentences_) texts.push_back(s.text);
    embeddings_ = embedder.embed_batch(texts);
    embedder_id_ = embedder.id();
  }

  const Eigen::VectorXd* cached_embedding(std::size_t id, const EmbeddingProvider& embedder) const {
    if (embedder_id_ != embedder.id() || id >= embeddings_.size()) return nullptr;
    return &embeddings_[id];
  }

  nlohmann::json to_json() const;
  static SentenceIndex from_json(const nlohmann::json& j);

  friend SentenceIndex build_index(const std::vector<Document>& documents);

 private:
  std::unordered_map<std::string, std::uint32_t> vocabulary_;
  std::vector<std::string> terms_;
  std::vector<std::uint32_t> df_;
  std::vector<IndexedSentence> sentences_;
  std::map<SentenceKey, std::size_t> by_key_;
  std::vector<Eigen::VectorXd> embeddings_;
  std::string embedder_id_;
};

/// Indexes every non-blank sentence. Sentence indices keep their position in
/// the document, blanks included. Throws EmptyCorpus when nothing is indexed.
inline SentenceIndex build_index(const std::vector<Document>& documents) {
  SentenceIndex index;
  std::vector<std::map<std::uint32_t, std::size_t>> counts;
  for (const auto& doc : documents) {
    for (std::size_t i = 0; i < doc.sentences.size(); ++i) {
      const std::string& text = doc.sentences[i];
      if (normalize_text(text).empty()) continue;
      std::map<std::uint32_t, std::size_t> tf;
      for (const auto& tok : alnum_tokens(text)) {
        auto [it, inserted] =
            index.vocabulary_.emplace(tok, static_cast<std::uint32_t>(index.terms_.size()));
        if (inserted) {
          index.terms_.push_back(tok);
          index.df_.push_back(0);
        }
        ++tf[it->second];
      }
      for (const auto& [term, _] : tf) ++index.df_[term];
      IndexedSentence s;
      s.source = SourceRef{doc.doc_id, i, CharSpan{0, text.size()}};
      s.text = text;
      index.by_key_.emplace(s.source.key(), index.sentences_.size());
      index.sentences_.push_back(std::move(s));
      counts.push_back(std::move(tf));
    }
  }
  if (index.sentences_.empty()) throw EmptyCorpus();

  for (std::size_t sid = 0; sid < index.sentences_.size(); ++sid) {
    SparseVector v;
    double norm2 = 0.0;
    for (const auto& [term, count] : counts[sid]) {
      const double w = index.weight(count, term);
      v.emplace_back(term, w);
      norm2 += w * w;
    }
    if (norm2 > 0.0) {
      const double inv = 1.0 / std::sqrt(norm2);
      for (auto& [term, w] : v) w *= inv;
    }
    index.sentences_[sid].vector = std::move(v);
  }
  return index;
}

inline nlohmann::json SentenceIndex::to_json() const {
  nlohmann::json j;
  j["format"] = "factcheck-sentence-index-v1";
  j["terms"] = terms_;
  j["df"] = df_;
  auto& arr = j["sentences"] = nlohmann::json::array();
  for (const auto& s : sentences_) {
    nlohmann::json vec = nlohmann::json::array();
    for (const auto& [term, w] : s.vector) vec.push_back({term, w});
    arr.push_back({{"doc_id", s.source.doc_id},
                   {"sentence_index", s.source.sentence_index},
                   {"text", s.text},
                   {"vector", std::move(vec)}});
  }
  return j;
}

inline SentenceIndex SentenceIndex::from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "factcheck-sentence-index-v1") {
    throw ConfigError("not a sentence index file");
  }
  SentenceIndex index;
  index.terms_ = j.at("terms").get<std::vector<std::string>>();
  index.df_ = j.at("df").get<std::vector<std::uint32_t>>();
  if (index.terms_.size() != index.df_.size()) throw ConfigError("index term/df size mismatch");
  for (std::uint32_t t = 0; t < index.terms_.size(); ++t) index.vocabulary_.emplace(index.terms_[t], t);
  for (const auto& s : j.at("sentences")) {
    IndexedSentence is;
    is.text = s.at("text").get<std::string>();
    is.source = SourceRef{s.at("doc_id").get<std::string>(), s.at("sentence_index").get<std::size_t>(),
                          CharSpan{0, is.text.size()}};
    for (const auto& e : s.at("vector")) {
      is.vector.emplace_back(e.at(0).get<std::uint32_t>(), e.at(1).get<double>());
    }
    index.by_key_.emplace(is.source.key(), index.sentences_.size());
    index.sentences_.push_back(std::move(is));
  }
  if (index.sentences_.empty()) throw EmptyCorpus();
  return index;
}

namespace detail {

inline double semantic_score(const Eigen::VectorXd& query, std::size_t sentence_id,
                             const SentenceIndex& index, const EmbeddingProvider& embedder) {
  const Eigen::VectorXd* cached = index.cached_embedding(sentence_id, embedder);
  const double cos = cached ? cosine_similarity(query, *cached)
                            : cosine_similarity(query, embedder.embed(index.sentence(sentence_id).text));
  return std::clamp(cos, 0.0, 1.0);
}

inline double combine(RetrievalMode mode, double tfidf, double semantic) {
  switch (mode) {
    case RetrievalMode::TfIdfOnly:
      return tfidf;
    case RetrievalMode::CosineOnly:
      return semantic;
    case RetrievalMode::Product:
      return tfidf * semantic;
  }
  return tfidf;
}

}  // namespace detail

/// Score of one indexed sentence against a query, in [0, 1].
inline double score_sentence(std::string_view query, std::size_t sentence_id,
                             const SentenceIndex& index, RetrievalMode mode,
                             const EmbeddingProvider* embedder = nullptr) {
  if (mode != RetrievalMode::TfIdfOnly && embedder == nullptr) throw MissingEmbedder();
  const IndexedSentence& s = index.sentence(sentence_id);
  const double tfidf =
      mode == RetrievalMode::CosineOnly ? 0.0
                                        : std::clamp(sparse_dot(index.vectorize(query), s.vector), 0.0, 1.0);
  double semantic = 0.0;
  if (mode != RetrievalMode::TfIdfOnly) {
    semantic = detail::semantic_score(embedder->embed(query), sentence_id, index, *embedder);
  }
  return detail::combine(mode, tfidf, semantic);
}

inline bool evidence_order(const EvidenceEntry& a, const EvidenceEntry& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.source.doc_id != b.source.doc_id) return a.source.doc_id < b.source.doc_id;
  return a.source.sentence_index < b.source.sentence_index;
}

/// Top-k sentences for a free-text query.
inline EvidenceSet retrieve_top_k(std::string_view query, const SentenceIndex& index, std::size_t k,
                                  RetrievalMode mode, const EmbeddingProvider* embedder = nullptr) {
  if (k == 0) throw std::invalid_argument("k must be >= 1");
  if (mode != RetrievalMode::TfIdfOnly && embedder == nullptr) throw MissingEmbedder();
  const SparseVector qv = index.vectorize(query);
  Eigen::VectorXd qe;
  if (mode != RetrievalMode::TfIdfOnly) qe = embedder->embed(query);

  std::vector<EvidenceEntry> all;
  all.reserve(index.size());
  for (std::size_t sid = 0; sid < index.size(); ++sid) {
    const IndexedSentence& s = index.sentence(sid);
    const double tfidf =
        mode == RetrievalMode::CosineOnly ? 0.0 : std::clamp(sparse_dot(qv, s.vector), 0.0, 1.0);
    const double semantic =
        mode == RetrievalMode::TfIdfOnly ? 0.0 : detail::semantic_score(qe, sid, index, *embedder);
    all.push_back({s.source, s.text, detail::combine(mode, tfidf, semantic)});
  }
  const std::size_t take = std::min(k, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(take), all.end(),
                    evidence_order);
  all.resize(take);
  return EvidenceSet{std::move(all)};
}

inline EvidenceSet retrieve_top_k(const Claim& claim, const SentenceIndex& index, std::size_t k,
                                  RetrievalMode mode, const EmbeddingProvider* embedder = nullptr) {
  return retrieve_top_k(claim.text, index, k, mode, embedder);
}

/// Corpus JSONL: {"doc_id": string, "sentences": [string]} per line.
inline std::vector<Document> load_corpus_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open corpus: " + path);
  std::vector<Document> docs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (normalize_text(line).empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      Document d;
      d.doc_id = j.at("doc_id").get<std::string>();
      d.sentences = j.at("sentences").get<std::vector<std::string>>();
      docs.push_back(std::move(d));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(lineno, e.what());
    }
  }
  return docs;
}

}  // namespace factcheck
