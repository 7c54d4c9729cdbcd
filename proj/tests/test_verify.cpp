#include <gtest/gtest.h>

#include "factcheck/claim_verify.hpp"
#include "factcheck/triple_verify.hpp"
#include "support.hpp"

using namespace factcheck;
using fctest::evidence_triple;
using L = VerdictLabel;

namespace {

ScoredVerdict sv(L label, double p, const std::string& tag = "e") { return {label, p, evidence_triple(tag)}; }

VerifyConfig cfg(VotingMethod m, double ts = 0.0, double tr = 0.0) {
  VerifyConfig c;
  c.voting = m;
  c.threshold_supports = ts;
  c.threshold_refutes = tr;
  c.seed = 5;
  return c;
}

}  // namespace

TEST(Filter, ThresholdsPerLabelAndNeiDropped) {
  const std::vector<ScoredVerdict> xs = {sv(L::Supports, 0.6), sv(L::Supports, 0.4), sv(L::Refutes, 0.85),
                                         sv(L::Refutes, 0.95), sv(L::NotEnoughInfo, 0.99)};
  const auto kept = filter_by_thresholds(xs, cfg(VotingMethod::Max, 0.5, 0.9));
  ASSERT_EQ(kept.size(), 2u);
  EXPECT_EQ(kept[0].probability, 0.6);
  EXPECT_EQ(kept[1].probability, 0.95);
  EXPECT_EQ(filter_by_thresholds(xs, cfg(VotingMethod::Max, 0.6, 0.95)).size(), 2u);
}

TEST(Filter, ThresholdOneKeepsOnlyCertainty) {
  const std::vector<ScoredVerdict> xs = {sv(L::Supports, 0.999), sv(L::Refutes, 1.0)};
  const auto kept = filter_by_thresholds(xs, cfg(VotingMethod::Max, 1.0, 1.0));
  ASSERT_EQ(kept.size(), 1u);
  EXPECT_EQ(kept[0].label, L::Refutes);
}

TEST(Voting, MaxVersusMajority) {
  const std::vector<ScoredVerdict> xs = {sv(L::Supports, 0.8), sv(L::Supports, 0.7), sv(L::Refutes, 0.9)};
  EXPECT_EQ(aggregate_votes(xs, cfg(VotingMethod::Max)), L::Refutes);
  EXPECT_EQ(aggregate_votes(xs, cfg(VotingMethod::Majority)), L::Supports);
}

TEST(Voting, EmptyIsNei) {
  for (auto m : {VotingMethod::Max, VotingMethod::Majority, VotingMethod::WeightedSampling}) {
    EXPECT_EQ(aggregate_votes({}, cfg(m)), L::NotEnoughInfo);
  }
}

TEST(Voting, TiesGoToLowestLabel) {
  const std::vector<ScoredVerdict> xs = {sv(L::Supports, 0.7), sv(L::Refutes, 0.7)};
  EXPECT_EQ(aggregate_votes(xs, cfg(VotingMethod::Max)), L::Refutes);
  EXPECT_EQ(aggregate_votes(xs, cfg(VotingMethod::Majority)), L::Refutes);
  const std::vector<ScoredVerdict> count_tie = {sv(L::Supports, 0.9), sv(L::Refutes, 0.7)};
  EXPECT_EQ(aggregate_votes(count_tie, cfg(VotingMethod::Majority)), L::Supports);
}

TEST(Voting, MatchesOraclesOnRandomLists) {
  Rng rng(77);
  for (int i = 0; i < 2000; ++i) {
    const auto xs = fctest::random_verdicts(rng, 1 + rng.index(7));
    EXPECT_EQ(aggregate_votes(xs, cfg(VotingMethod::Max)), fctest::max_vote_oracle(xs));
    EXPECT_EQ(aggregate_votes(xs, cfg(VotingMethod::Majority)), fctest::majority_vote_oracle(xs));
  }
}

TEST(Voting, WeightedFrequencyFollowsMaxProbabilities) {
  const std::vector<ScoredVerdict> xs = {sv(L::Supports, 0.8), sv(L::Supports, 0.7), sv(L::Refutes, 0.4)};
  const auto c = cfg(VotingMethod::WeightedSampling);
  const int n = 30000;
  int supports = 0;
  for (int i = 0; i < n; ++i) {
    supports += aggregate_votes(xs, c, VoteStream{1, static_cast<std::size_t>(i), 0}) == L::Supports;
  }
  // 2/3 expected; 5 standard errors is about 0.0136.
  EXPECT_NEAR(static_cast<double>(supports) / n, 2.0 / 3.0, 0.0136);
}

TEST(Voting, WeightedIsDeterministicPerStream) {
  const std::vector<ScoredVerdict> xs = {sv(L::Supports, 0.5), sv(L::Refutes, 0.5)};
  const auto c = cfg(VotingMethod::WeightedSampling);
  for (std::size_t i = 0; i < 50; ++i) {
    const VoteStream s{3, i, 1};
    EXPECT_EQ(aggregate_votes(xs, c, s), aggregate_votes(xs, c, s));
  }
  const std::vector<ScoredVerdict> single = {sv(L::Refutes, 0.3)};
  for (std::size_t i = 0; i < 50; ++i) EXPECT_EQ(aggregate_votes(single, c, VoteStream{0, i, 0}), L::Refutes);
}

TEST(Voting, NamesRoundTrip) {
  for (auto m : {VotingMethod::Max, VotingMethod::Majority, VotingMethod::WeightedSampling}) {
    EXPECT_EQ(parse_voting(to_string(m)), m);
  }
  EXPECT_FALSE(parse_voting("plurality").has_value());
}

TEST(VerifyTriple, NoEvidenceIsNei) {
  const BaselineScorer scorer;
  EXPECT_EQ(verify_triple(make_triple("a", "b", "c"), {}, scorer, cfg(VotingMethod::Max)), L::NotEnoughInfo);
}

TEST(VerifyTriple, SupportAndRefuteFromBaseline) {
  const BaselineScorer scorer(ExclusivePairs{{"member", "professor"}});
  const std::vector<Triple> ev = {make_triple("Manning", "is a professor of", "Stanford"),
                                  make_triple("Manning", "teaches", "linguistics")};
  const auto c = cfg(VotingMethod::Max, 0.5, 0.9);
  EXPECT_EQ(verify_triple(make_triple("Manning", "teaches", "linguistics"), ev, scorer, c), L::Supports);
  const auto detail = verify_triple_detailed(make_triple("Manning", "is a member of", "Stanford"), ev, scorer, c);
  EXPECT_EQ(detail.label, L::Refutes);
  ASSERT_EQ(detail.scored.size(), 2u);
  EXPECT_EQ(to_string(detail.scored[0].evidence), to_string(ev[0]));
}

TEST(VerifyTriple, RaisingThresholdsNeverAddsVerdicts) {
  Rng rng(8);
  for (int i = 0; i < 300; ++i) {
    const auto xs = fctest::random_verdicts(rng, 1 + rng.index(6));
    for (double t = 0.0; t < 1.0; t += 0.1) {
      EXPECT_LE(filter_by_thresholds(xs, cfg(VotingMethod::Max, t + 0.1, t)).size(),
                filter_by_thresholds(xs, cfg(VotingMethod::Max, t, t)).size());
    }
  }
}

TEST(ClaimRule, Examples) {
  const std::vector<L> s = {L::Supports, L::Supports};
  const std::vector<L> r = {L::Supports, L::NotEnoughInfo, L::Refutes};
  const std::vector<L> n = {L::Supports, L::NotEnoughInfo};
  EXPECT_EQ(aggregate_claim_detailed(s).rule, ClaimRule::AllSupports);
  EXPECT_EQ(aggregate_claim(s), L::Supports);
  EXPECT_EQ(aggregate_claim_detailed(r).rule, ClaimRule::AnyRefutes);
  EXPECT_EQ(aggregate_claim(r), L::Refutes);
  EXPECT_EQ(aggregate_claim_detailed(n).rule, ClaimRule::AnyNotEnoughInfo);
  EXPECT_EQ(aggregate_claim({}), L::NotEnoughInfo);
  EXPECT_EQ(aggregate_claim_detailed({}).rule, ClaimRule::NoTriples);
}

TEST(ClaimRule, OrderInvariantIdempotentAndMonotone) {
  Rng rng(21);
  auto severity = [](L l) { return l == L::Supports ? 0 : l == L::NotEnoughInfo ? 1 : 2; };
  for (int i = 0; i < 2000; ++i) {
    std::vector<L> xs;
    for (std::size_t k = rng.index(6); k > 0; --k) xs.push_back(kAllLabels[rng.index(3)]);
    const L base = aggregate_claim(xs);
    EXPECT_EQ(base, fctest::claim_rule_oracle(xs));
    auto shuffled = xs;
    rng.shuffle(shuffled.begin(), shuffled.end());
    EXPECT_EQ(aggregate_claim(shuffled), base);
    auto doubled = xs;
    doubled.insert(doubled.end(), xs.begin(), xs.end());
    EXPECT_EQ(aggregate_claim(doubled), base);
    if (!xs.empty()) {
      auto more = xs;
      more.push_back(kAllLabels[rng.index(3)]);
      EXPECT_GE(severity(aggregate_claim(more)), severity(base));
    }
  }
}
