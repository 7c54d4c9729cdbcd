#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "factcheck/retrieval.hpp"
#include "factcheck/random.hpp"

using namespace factcheck;

namespace {

std::vector<Document> small_corpus() {
  return {{"A", {"the cat sat on the mat", "dogs chase cats"}},
          {"B", {"the mat was red", "   ", "quantum physics lecture"}},
          {"C", {"cat cat cat"}}};
}

double brute_score(const SentenceIndex& idx, const std::string& q, std::size_t sid) {
  return std::clamp(sparse_dot(idx.vectorize(q), idx.sentence(sid).vector), 0.0, 1.0);
}

}  // namespace

TEST(Index, SkipsBlankSentencesAndKeepsKeys) {
  const auto idx = build_index(small_corpus());
  EXPECT_EQ(idx.size(), 5u);
  ASSERT_TRUE(idx.find({"B", 2}).has_value());
  EXPECT_EQ(idx.sentence(*idx.find({"B", 2})).text, "quantum physics lecture");
  EXPECT_FALSE(idx.find({"B", 1}).has_value());
}

TEST(Index, WeightMatchesFormula) {
  const auto idx = build_index(small_corpus());
  const auto cat = *idx.term_id("cat");
  EXPECT_EQ(idx.document_frequency(cat), 2u);
  EXPECT_NEAR(idx.weight(3, cat), (1.0 + std::log(3.0)) * std::log(5.0 / 2.0), 1e-12);
}

TEST(Index, EmptyCorpusThrows) {
  EXPECT_THROW(build_index({}), EmptyCorpus);
  EXPECT_THROW(build_index({{"X", {"", "  "}}}), EmptyCorpus);
}

TEST(Index, VectorsAreUnitOrZero) {
  const auto idx = build_index(small_corpus());
  for (const auto& s : idx.sentences()) {
    double n2 = 0.0;
    for (const auto& [t, w] : s.vector) n2 += w * w;
    EXPECT_NEAR(n2, 1.0, 1e-12);
  }
}

TEST(Retrieval, SelfScoreIsOneAndDisjointIsZero) {
  const auto idx = build_index(small_corpus());
  for (std::size_t sid = 0; sid < idx.size(); ++sid) {
    EXPECT_NEAR(score_sentence(idx.sentence(sid).text, sid, idx, RetrievalMode::TfIdfOnly), 1.0, 1e-12);
  }
  EXPECT_EQ(score_sentence("quantum physics", *idx.find({"A", 0}), idx, RetrievalMode::TfIdfOnly), 0.0);
  EXPECT_EQ(score_sentence("unknown words only", 0, idx, RetrievalMode::TfIdfOnly), 0.0);
}

TEST(Retrieval, TopKMatchesBruteForce) {
  const auto idx = build_index(small_corpus());
  for (const std::string q : {"cat on a mat", "red mat", "physics", "dogs"}) {
    const auto ev = retrieve_top_k(q, idx, 3, RetrievalMode::TfIdfOnly);
    ASSERT_EQ(ev.entries.size(), 3u);
    std::vector<double> all;
    for (std::size_t sid = 0; sid < idx.size(); ++sid) all.push_back(brute_score(idx, q, sid));
    std::sort(all.rbegin(), all.rend());
    for (std::size_t i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(ev.entries[i].score, all[i]);
    for (std::size_t i = 1; i < 3; ++i) EXPECT_FALSE(evidence_order(ev.entries[i], ev.entries[i - 1]));
  }
}

TEST(Retrieval, KLargerThanCorpusReturnsAll) {
  const auto idx = build_index(small_corpus());
  EXPECT_EQ(retrieve_top_k("cat", idx, 100, RetrievalMode::TfIdfOnly).entries.size(), idx.size());
  EXPECT_THROW(retrieve_top_k("cat", idx, 0, RetrievalMode::TfIdfOnly), std::invalid_argument);
}

TEST(Retrieval, DocumentOrderDoesNotChangeRanking) {
  auto docs = small_corpus();
  const auto a = retrieve_top_k("the cat mat", build_index(docs), 5, RetrievalMode::TfIdfOnly);
  std::reverse(docs.begin(), docs.end());
  const auto b = retrieve_top_k("the cat mat", build_index(docs), 5, RetrievalMode::TfIdfOnly);
  ASSERT_EQ(a.entries.size(), b.entries.size());
  for (std::size_t i = 0; i < a.entries.size(); ++i) {
    EXPECT_EQ(a.entries[i].source.key(), b.entries[i].source.key());
    EXPECT_NEAR(a.entries[i].score, b.entries[i].score, 1e-12);
  }
}

TEST(Retrieval, SemanticModesNeedEmbedder) {
  const auto idx = build_index(small_corpus());
  EXPECT_THROW(retrieve_top_k("cat", idx, 2, RetrievalMode::Product), MissingEmbedder);
  EXPECT_THROW(score_sentence("cat", 0, idx, RetrievalMode::CosineOnly), MissingEmbedder);
}

TEST(Retrieval, ProductAndCosineModesStayInUnitInterval) {
  auto idx = build_index(small_corpus());
  const HashedEmbedder emb(16);
  for (auto mode : {RetrievalMode::CosineOnly, RetrievalMode::Product}) {
    const auto before = retrieve_top_k("cat mat dogs", idx, 5, mode, &emb);
    for (const auto& e : before.entries) {
      EXPECT_GE(e.score, 0.0);
      EXPECT_LE(e.score, 1.0);
    }
    idx.attach_embeddings(emb);
    const auto after = retrieve_top_k("cat mat dogs", idx, 5, mode, &emb);
    for (std::size_t i = 0; i < before.entries.size(); ++i) {
      EXPECT_NEAR(before.entries[i].score, after.entries[i].score, 1e-12);
    }
  }
  const auto sid = *idx.find({"C", 0});
  EXPECT_NEAR(score_sentence("cat", sid, idx, RetrievalMode::Product, &emb),
              score_sentence("cat", sid, idx, RetrievalMode::TfIdfOnly) *
                  score_sentence("cat", sid, idx, RetrievalMode::CosineOnly, &emb),
              1e-12);
}

TEST(Retrieval, ModeNamesRoundTrip) {
  for (auto m : {RetrievalMode::TfIdfOnly, RetrievalMode::CosineOnly, RetrievalMode::Product}) {
    EXPECT_EQ(parse_retrieval_mode(to_string(m)), m);
  }
  EXPECT_FALSE(parse_retrieval_mode("bm25").has_value());
}

TEST(Index, JsonRoundTripPreservesScores) {
  const auto idx = build_index(small_corpus());
  const auto back = SentenceIndex::from_json(nlohmann::json::parse(idx.to_json().dump()));
  ASSERT_EQ(back.size(), idx.size());
  for (const std::string q : {"cat", "red mat", "dogs chase"}) {
    const auto a = retrieve_top_k(q, idx, 5, RetrievalMode::TfIdfOnly);
    const auto b = retrieve_top_k(q, back, 5, RetrievalMode::TfIdfOnly);
    for (std::size_t i = 0; i < a.entries.size(); ++i) {
      EXPECT_EQ(a.entries[i].source.key(), b.entries[i].source.key());
      EXPECT_DOUBLE_EQ(a.entries[i].score, b.entries[i].score);
    }
  }
  EXPECT_THROW(SentenceIndex::from_json(nlohmann::json{{"format", "other"}}), ConfigError);
}

TEST(Corpus, LoaderReportsBadLine) {
  const auto path = std::filesystem::temp_directory_path() / "factcheck_corpus_bad.jsonl";
  {
    std::ofstream out(path);
    out << R"({"doc_id": "A", "sentences": ["x y"]})" << "\n\n" << R"({"doc_id": "B"})" << "\n";
  }
  try {
    load_corpus_jsonl(path.string());
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  EXPECT_THROW(load_corpus_jsonl("/nonexistent/corpus.jsonl"), ConfigError);
}

TEST(Embedding, HashedIsUnitAndDeterministic) {
  const HashedEmbedder emb(32);
  const auto a = emb.embed("Barack Obama");
  EXPECT_NEAR(a.norm(), 1.0, 1e-12);
  EXPECT_EQ(a, emb.embed("barack   OBAMA"));
  EXPECT_EQ(emb.embed("!!").norm(), 0.0);
  EXPECT_EQ(cosine_similarity(a, emb.embed("")), 0.0);
  EXPECT_THROW(HashedEmbedder(0), ConfigError);
}
