#pragma once
// Triple-level verification: score a claim triple against every evidence
// triple, drop unreliable verdicts, and vote.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "factcheck/core.hpp"
#include "factcheck/nli.hpp"
#include "factcheck/random.hpp"

namespace factcheck {

enum class VotingMethod : std::uint8_t { Max, Majority, WeightedSampling };

inline std::string_view to_string(VotingMethod v) {
  switch (v) {
    case VotingMethod::Max:
      return "max";
    case VotingMethod::Majority:
      return "majority";
    case VotingMethod::WeightedSampling:
      return "weighted";
  }
  return "max";
}

inline std::optional<VotingMethod> parse_voting(std::string_view s) {
  if (s == "max") return VotingMethod::Max;
  if (s == "majority") return VotingMethod::Majority;
  if (s == "weighted") return VotingMethod::WeightedSampling;
  return std::nullopt;
}

struct VerifyConfig {
  double threshold_supports = 0.5;
  double threshold_refutes = 0.5;
  VotingMethod voting = VotingMethod::Max;
  std::uint64_t seed = 0;

  void validate() const {
    auto ok = [](double t) { return t >= 0.0 && t <= 1.0; };
    if (!ok(threshold_supports) || !ok(threshold_refutes)) {
      throw ConfigError("verification thresholds must lie in [0, 1]");
    }
  }
};

/// Identifies the random substream used by weighted sampling for one claim
/// triple, so results do not depend on scheduling order. `pass` separates the
/// initial vote from the vote after gap filling.
struct VoteStream {
  std::int64_t claim_id = 0;
  std::size_t triple_index = 0;
  std::uint32_t pass = 0;

  Rng rng(std::uint64_t seed) const {
    return Rng(seed, {static_cast<std::uint64_t>(claim_id), triple_index, pass});
  }
};

/// One verdict per evidence triple, in evidence order, from a single batched
/// scorer call.
inline std::vector<ScoredVerdict> score_against_evidence(const Triple& claim_triple,
                                                         std::span<const Triple> evidence,
                                                         const NliScorer& scorer) {
  if (evidence.empty()) return {};
  std::vector<NliRequest> batch;
  batch.reserve(evidence.size());
  for (const auto& e : evidence) batch.push_back(make_nli_input(e, claim_triple));
  const auto dists = scorer.classify(batch);
  if (dists.size() != evidence.size()) throw ProtocolError("scorer returned wrong batch size");
  std::vector<ScoredVerdict> out;
  out.reserve(evidence.size());
  for (std::size_t i = 0; i < evidence.size(); ++i) {
    const LabelScore ls = map_nli_label(dists[i]);
    out.push_back({ls.label, ls.probability, evidence[i]});
  }
  return out;
}

inline bool passes_thresholds(const ScoredVerdict& v, double t_supports, double t_refutes) {
  switch (v.label) {
    case VerdictLabel::Supports:
      return v.probability >= t_supports;
    case VerdictLabel::Refutes:
      return v.probability >= t_refutes;
    case VerdictLabel::NotEnoughInfo:
      return false;
  }
  return false;
}

/// Keeps Supports at or above the Supports threshold and Refutes at or above
/// the Refutes threshold. NEI verdicts carry no evidence and are dropped.
inline std::vector<ScoredVerdict> filter_by_thresholds(std::span<const ScoredVerdict> verdicts,
                                                       const VerifyConfig& cfg) {
  std::vector<ScoredVerdict> out;
  for (const auto& v : verdicts) {
    if (passes_thresholds(v, cfg.threshold_supports, cfg.threshold_refutes)) out.push_back(v);
  }
  return out;
}

namespace detail {

struct LabelTally {
  std::array<std::size_t, 3> count{};
  std::array<double, 3> max_prob{};
  std::array<bool, 3> present{};
};

inline LabelTally tally(std::span<const ScoredVerdict> verdicts) {
  LabelTally t;
  for (const auto& v : verdicts) {
    const auto i = label_index(v.label);
    ++t.count[i];
    t.max_prob[i] = t.present[i] ? std::max(t.max_prob[i], v.probability) : v.probability;
    t.present[i] = true;
  }
  return t;
}

}  // namespace detail

/// Voting over surviving verdicts; an empty list is NEI.
///
/// Max: label of the highest-probability entry. Majority: most frequent
/// label, ties by higher max probability. Weighted sampling: per-label max
/// probability m_L, draw L with probability m_L / sum(m). Remaining ties go
/// to the lowest label in Refutes < NEI < Supports.
inline VerdictLabel aggregate_votes(std::span<const ScoredVerdict> filtered, VotingMethod method,
                                    Rng& rng) {
  if (filtered.empty()) return VerdictLabel::NotEnoughInfo;
  const detail::LabelTally t = detail::tally(filtered);

  switch (method) {
    case VotingMethod::Max: {
      std::optional<VerdictLabel> best;
      for (VerdictLabel l : kAllLabels) {
        const auto i = label_index(l);
        if (!t.present[i]) continue;
        if (!best || t.max_prob[i] > t.max_prob[label_index(*best)]) best = l;
      }
      return *best;
    }
    case VotingMethod::Majority: {
      std::optional<VerdictLabel> best;
      for (VerdictLabel l : kAllLabels) {
        const auto i = label_index(l);
        if (!t.present[i]) continue;
        if (!best) {
          best = l;
          continue;
        }
        const auto b = label_index(*best);
        if (t.count[i] > t.count[b] || (t.count[i] == t.count[b] && t.max_prob[i] > t.max_prob[b])) {
          best = l;
        }
      }
      return *best;
    }
    case VotingMethod::WeightedSampling: {
      double total = 0.0;
      for (VerdictLabel l : kAllLabels) total += t.max_prob[label_index(l)];
      if (!(total > 0.0)) {
        for (VerdictLabel l : kAllLabels) {
          if (t.present[label_index(l)]) return l;
        }
      }
      const double u = rng.uniform() * total;
      double acc = 0.0;
      std::optional<VerdictLabel> last;
      for (VerdictLabel l : kAllLabels) {
        const double m = t.max_prob[label_index(l)];
        if (m <= 0.0) continue;
        acc += m;
        last = l;
        if (u < acc) return l;
      }
      return *last;
    }
  }
  return VerdictLabel::NotEnoughInfo;
}

inline VerdictLabel aggregate_votes(std::span<const ScoredVerdict> filtered, const VerifyConfig& cfg,
                                    const VoteStream& stream = {}) {
  Rng rng = stream.rng(cfg.seed);
  return aggregate_votes(filtered, cfg.voting, rng);
}

/// Triple-level label from already scored verdicts.
inline VerdictLabel decide_triple(std::span<const ScoredVerdict> scored, const VerifyConfig& cfg,
                                  const VoteStream& stream = {}) {
  const auto kept = filter_by_thresholds(scored, cfg);
  return aggregate_votes(kept, cfg, stream);
}

struct TripleVerification {
  VerdictLabel label = VerdictLabel::NotEnoughInfo;
  std::vector<ScoredVerdict> scored;
};

inline TripleVerification verify_triple_detailed(const Triple& claim_triple,
                                                 std::span<const Triple> evidence,
                                                 const NliScorer& scorer, const VerifyConfig& cfg,
                                                 const VoteStream& stream = {}) {
  TripleVerification out;
  out.scored = score_against_evidence(claim_triple, evidence, scorer);
  out.label = decide_triple(out.scored, cfg, stream);
  return out;
}

inline VerdictLabel verify_triple(const Triple& claim_triple, std::span<const Triple> evidence,
                                  const NliScorer& scorer, const VerifyConfig& cfg,
                                  const VoteStream& stream = {}) {
  return verify_triple_detailed(claim_triple, evidence, scorer, cfg, stream).label;
}

}  // namespace factcheck
