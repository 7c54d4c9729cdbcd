#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "support.hpp"

using namespace factcheck;
using fctest::hashed64;

namespace {

std::vector<Fact> small_kg() {
  return {{"directed", "Film A", "Dir X"}, {"directed", "Film B", "Dir Y"}, {"starring", "Film A", "Actor P"},
          {"starring", "Film C", "Actor Q"}, {"reviewed", "Film B", "Critic R"}};
}

TrainConfig quick_config() {
  TrainConfig cfg;
  cfg.learning_rate = 0.01;
  cfg.batch_size = 2;
  cfg.max_epochs = 2;
  cfg.early_stopping = false;
  cfg.seed = 4;
  return cfg;
}

}  // namespace

TEST(Bpr, LossValues) {
  EXPECT_NEAR(bpr_loss(0.0, 0.0), std::log(2.0), 1e-15);
  EXPECT_NEAR(bpr_loss(20.0, 0.0), 2.0611536203e-9, 1e-18);
  EXPECT_NEAR(bpr_loss(0.0, 10.0), 10.000045398899218, 1e-12);
  EXPECT_TRUE(std::isfinite(bpr_loss(-800.0, 800.0)));
  for (double a = -3.0; a <= 3.0; a += 0.5) {
    for (double b = -3.0; b <= 3.0; b += 0.5) {
      if (a > b) {
        EXPECT_LT(bpr_loss(a, b), bpr_loss(b, a));
      }
    }
  }
}

TEST(Bpr, LogisticIsStableAndSymmetric) {
  EXPECT_DOUBLE_EQ(logistic(0.0), 0.5);
  EXPECT_EQ(logistic(-1000.0), 0.0);
  EXPECT_EQ(logistic(1000.0), 1.0);
  for (double x : {-5.0, -0.3, 0.7, 12.0}) EXPECT_NEAR(logistic(x) + logistic(-x), 1.0, 1e-15);
}

TEST(Score, ZeroModelIsHalfAndIdentityIsDotProduct) {
  const Fact f{"was born in", "Barack Obama", "Hawaii"};
  EXPECT_DOUBLE_EQ(score_fact(USchemaModel::zeros(hashed64()), f), 0.5);
  const auto id = USchemaModel::identity(hashed64());
  const double expected = hashed64()->embed(f.relation).dot(hashed64()->embed(f.tuple_text()));
  EXPECT_NEAR(id.theta(f), expected, 1e-12);
  const double p = score_fact(id, f);
  EXPECT_GT(p, 0.0);
  EXPECT_LT(p, 1.0);
  EXPECT_EQ(f.tuple_text(), "Barack Obama Hawaii");
}

TEST(Score, ConstructorChecksShapes) {
  EXPECT_THROW(USchemaModel(hashed64(), Eigen::MatrixXd::Zero(3, 3), Eigen::MatrixXd::Zero(64, 64)),
               DimensionMismatch);
  EXPECT_THROW(USchemaModel(nullptr, Eigen::MatrixXd(), Eigen::MatrixXd()), ConfigError);
}

TEST(Facts, TripleConversionMarksOrigin) {
  const Fact f{"starring", "Film A", "Actor P"};
  const Triple t = triple_from_fact(f);
  EXPECT_EQ(t.origin, TripleOrigin::UniversalSchema);
  EXPECT_EQ(fact_from_triple(t), f);
}

TEST(Negatives, OnlyChoiceIsReturned) {
  const std::vector<Fact> facts = {{"r", "a", "b"}, {"q", "c", "d"}};
  const FactStore store(facts);
  Rng rng(1);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(sample_negative(facts[0], store, rng), (Fact{"r", "c", "d"}));
}

TEST(Negatives, NoneAvailableThrows) {
  const std::vector<Fact> facts = {{"r", "a", "b"}, {"r", "c", "d"}};
  const FactStore store(facts);
  Rng rng(1);
  EXPECT_THROW(sample_negative(facts[0], store, rng), NoNegativeAvailable);
}

TEST(Negatives, UniformOverNonPositives) {
  std::vector<Fact> facts = {{"r", "s0", "o0"}};
  for (int i = 1; i < 100; ++i) facts.push_back({"q", "s" + std::to_string(i), "o" + std::to_string(i)});
  const FactStore store(facts);
  Rng rng(99);
  std::map<std::string, int> counts;
  const int n = 99 * 200;
  for (int i = 0; i < n; ++i) {
    const Fact neg = sample_negative(facts[0], store, rng);
    ASSERT_FALSE(store.contains(neg));
    ++counts[neg.subject];
  }
  ASSERT_EQ(counts.size(), 99u);
  double chi2 = 0.0;
  for (const auto& [_, c] : counts) chi2 += (c - 200.0) * (c - 200.0) / 200.0;
  // 99.9% quantile of chi2(98) is about 148.2.
  EXPECT_LT(chi2, 148.2);
}

TEST(Train, ZeroLearningRateLeavesModelUnchanged) {
  auto cfg = quick_config();
  cfg.learning_rate = 0.0;
  TrainReport rep;
  const auto kg = small_kg();
  const auto m = train(kg, {}, cfg, hashed64(), &rep);
  EXPECT_TRUE(m.relation_map().isIdentity(0.0));
  EXPECT_TRUE(m.tuple_map().isIdentity(0.0));
  EXPECT_EQ(rep.optimizer_steps, 2u * 3u);
}

TEST(Train, DeterministicForSeed) {
  const auto kg = small_kg();
  const auto a = train(kg, {}, quick_config(), hashed64());
  const auto b = train(kg, {}, quick_config(), hashed64());
  EXPECT_EQ(a.relation_map(), b.relation_map());
  EXPECT_EQ(a.tuple_map(), b.tuple_map());
}

TEST(Train, EarlyStoppingReturnsBestDevModel) {
  const auto kg = fctest::make_planted_kg(2);
  auto cfg = fctest::planted_train_config(2);
  cfg.max_epochs = 6;
  TrainReport rep;
  const auto m = train(kg.train, kg.held_out, cfg, hashed64(), &rep);
  ASSERT_EQ(rep.dev_loss.size(), rep.epochs_run + 1);
  const auto best = std::min_element(rep.dev_loss.begin(), rep.dev_loss.end());
  EXPECT_EQ(static_cast<std::size_t>(best - rep.dev_loss.begin()), rep.best_epoch);
  EXPECT_LT(*best, rep.dev_loss.front());
  if (rep.epochs_run < cfg.max_epochs) {
    EXPECT_GE(rep.dev_loss.back(), *best);
  }
  (void)m;
}

TEST(Train, RejectsBadConfig) {
  auto cfg = quick_config();
  cfg.batch_size = 0;
  EXPECT_THROW(train(small_kg(), {}, cfg, hashed64()), ConfigError);
  EXPECT_THROW(train({}, {}, quick_config(), hashed64()), std::invalid_argument);
}

TEST(Candidates, ClaimRelationTimesEvidenceTuple) {
  const std::vector<Triple> claim = {make_triple("Manning", "is a member of", "Stanford")};
  const std::vector<Triple> ev = {make_triple("Manning", "is a professor of", "Stanford")};
  EXPECT_EQ(generate_candidates(claim, ev, CandidateScope::ClaimRelations),
            (std::vector<Fact>{{"is a member of", "Manning", "Stanford"}}));
  EXPECT_EQ(generate_candidates(claim, ev, CandidateScope::Both).size(), 1u);
  EXPECT_TRUE(generate_candidates(claim, {}, CandidateScope::Both).empty());
}

TEST(Candidates, ExcludesExistingEvidenceFacts) {
  const std::vector<Triple> claim = {make_triple("x", "r1", "y"), make_triple("x", "r2", "y")};
  const std::vector<Triple> ev = {make_triple("a", "r1", "b"), make_triple("c", "q", "d"), make_triple("e", "q", "f")};
  const auto c = generate_candidates(claim, ev, CandidateScope::ClaimRelations);
  EXPECT_EQ(c.size(), 5u);
  EXPECT_EQ(std::count(c.begin(), c.end(), Fact{"r1", "a", "b"}), 0);
  EXPECT_EQ(generate_candidates(claim, ev, CandidateScope::Both).size(), 5u + 2u);
}

TEST(Candidates, UnaryTriplesContributeNoTuples) {
  const std::vector<Triple> claim = {make_triple("x", "sleeps", kUnaryPlaceholder)};
  const std::vector<Triple> ev = {make_triple("a", "runs", kUnaryPlaceholder), make_triple("c", "q", "d")};
  EXPECT_EQ(generate_candidates(claim, ev, CandidateScope::Both), (std::vector<Fact>{{"sleeps", "c", "d"}}));
}

TEST(FillGaps, OnlyNeiTriplesReceiveFacts) {
  const auto model = USchemaModel::zeros(hashed64());
  const std::vector<Triple> claim = {make_triple("x", "r1", "y"), make_triple("x", "r2", "z")};
  const std::vector<Triple> ev = {make_triple("a", "q", "b")};
  const std::vector<VerdictLabel> labels = {VerdictLabel::Supports, VerdictLabel::NotEnoughInfo};
  const auto filled = fill_gaps(model, claim, ev, labels, 0.5);
  EXPECT_TRUE(filled[0].empty());
  EXPECT_EQ(filled[1].size(), 4u);
  EXPECT_TRUE(fill_gaps(model, claim, ev, labels, 0.51)[1].empty());
  const std::vector<VerdictLabel> none = {VerdictLabel::Supports, VerdictLabel::Refutes};
  for (const auto& f : fill_gaps(model, claim, ev, none, 0.0)) EXPECT_TRUE(f.empty());
  const std::vector<VerdictLabel> short_labels = {VerdictLabel::Supports};
  EXPECT_THROW(fill_gaps(model, claim, ev, short_labels, 0.5), std::invalid_argument);
}

TEST(FillGaps, ThresholdOneAcceptsNothingFromIdentity) {
  const auto model = USchemaModel::identity(hashed64());
  const std::vector<Triple> claim = {make_triple("x", "r1", "y")};
  const std::vector<Triple> ev = {make_triple("a", "q", "b"), make_triple("c", "p", "d")};
  const std::vector<VerdictLabel> labels = {VerdictLabel::NotEnoughInfo};
  EXPECT_TRUE(fill_gaps(model, claim, ev, labels, 1.0)[0].empty());
}

TEST(Session, ZeroStepsIsIdentityAndBaseUntouched) {
  const auto base = USchemaModel::identity(hashed64());
  const auto kg = small_kg();
  const auto same = session_update(base, kg, 0, quick_config());
  EXPECT_EQ(same.steps_taken, 0u);
  EXPECT_EQ(same.model.relation_map(), base.relation_map());
  const auto moved = session_update(base, kg, 3, quick_config());
  EXPECT_EQ(moved.steps_taken, 3u);
  EXPECT_NE(moved.model.relation_map(), base.relation_map());
  EXPECT_TRUE(base.relation_map().isIdentity(0.0));
}

TEST(Session, StepLowersObservedObjective) {
  const auto base = USchemaModel::identity(hashed64());
  const std::vector<Fact> observed = {{"directed", "Film A", "Dir X"}, {"starring", "Film B", "Actor P"}};
  const auto emb = [&](const std::string& s) { return hashed64()->embed(s); };
  const std::vector<EmbeddedPair> pairs = {
      {emb("directed"), emb("Film A Dir X"), emb("Film B Actor P")},
      {emb("starring"), emb("Film B Actor P"), emb("Film A Dir X")}};
  const double before = bpr_objective(base.relation_map(), base.tuple_map(), pairs);
  const auto up = session_update(base, observed, 1, quick_config());
  EXPECT_LT(bpr_objective(up.model.relation_map(), up.model.tuple_map(), pairs), before);
}

TEST(Session, FactsWithoutNegativesAreSkipped) {
  const auto base = USchemaModel::identity(hashed64());
  const std::vector<Fact> observed = {{"r", "a", "b"}, {"r", "c", "d"}};
  const auto up = session_update(base, observed, 2, quick_config());
  EXPECT_EQ(up.steps_taken, 0u);
  EXPECT_EQ(up.facts_without_negative, 2u);
  EXPECT_EQ(up.model.tuple_map(), base.tuple_map());
}

TEST(Persistence, RoundTripIsBitExact) {
  const auto m = train(small_kg(), {}, quick_config(), hashed64());
  std::stringstream ss;
  save_model(m, ss);
  const auto back = load_model(ss, hashed64());
  EXPECT_EQ(back.relation_map(), m.relation_map());
  EXPECT_EQ(back.tuple_map(), m.tuple_map());
  const Fact f{"directed", "Film C", "Dir Y"};
  EXPECT_EQ(score_fact(back, f), score_fact(m, f));
}

TEST(Persistence, ProviderMustMatch) {
  std::stringstream ss;
  save_model(USchemaModel::identity(hashed64()), ss);
  EXPECT_THROW(load_model(ss, std::make_shared<HashedEmbedder>(32)), ConfigError);
  std::stringstream junk("hello world");
  EXPECT_THROW(load_model(junk, hashed64()), ConfigError);
  std::stringstream truncated;
  save_model(USchemaModel::identity(hashed64()), truncated);
  std::string text = truncated.str();
  std::stringstream cut(text.substr(0, text.size() / 2));
  EXPECT_THROW(load_model(cut, hashed64()), ConfigError);
}

TEST(KnowledgeGraph, TsvLoader) {
  const auto kg = load_kg_tsv(fctest::data_path("film_kg.tsv"));
  EXPECT_FALSE(kg.empty());
  EXPECT_NE(std::find(kg.begin(), kg.end(), Fact{"was directed by", "The Adventures of Pluto Nash", "Ron Underwood"}),
            kg.end());
  const auto path = std::filesystem::temp_directory_path() / "factcheck_bad_kg.tsv";
  std::ofstream(path) << "a\tr\tb\n\nc\tr\n";
  try {
    load_kg_tsv(path.string());
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  EXPECT_THROW(load_kg_tsv("/nonexistent/kg.tsv"), ConfigError);
}
