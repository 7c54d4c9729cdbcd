#pragma once
// Pairwise entailment scoring and the entailment -> verdict label mapping.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "factcheck/core.hpp"

namespace factcheck {

/// Raised when a scorer returns something that violates the wire contract.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

/// Raised when a remote scorer cannot be reached after retries.
class TransportError : public Error {
 public:
  using Error::Error;
};

struct NliDistribution {
  double entailment = 0.0;
  double contradiction = 0.0;
  double neutral = 0.0;

  bool valid(double tolerance = 1e-6) const {
    auto in_unit = [](double p) { return std::isfinite(p) && p >= 0.0 && p <= 1.0; };
    return in_unit(entailment) && in_unit(contradiction) && in_unit(neutral) &&
           std::abs(entailment + contradiction + neutral - 1.0) <= tolerance;
  }
};

struct NliRequest {
  std::string premise;
  std::string hypothesis;
};

/// The evidence triple is always the premise.
inline NliRequest make_nli_input(const Triple& evidence, const Triple& claim) {
  return {linearize_triple(evidence), linearize_triple(claim)};
}

struct LabelScore {
  VerdictLabel label = VerdictLabel::NotEnoughInfo;
  double probability = 0.0;
};

/// Argmax with Entailment -> Supports, Contradiction -> Refutes,
/// Neutral -> NEI. Ties go to the most cautious label.
inline LabelScore map_nli_label(const NliDistribution& dist) {
  // Visit in tie-break order; only a strictly larger value displaces.
  const std::pair<VerdictLabel, double> ordered[] = {
      {VerdictLabel::Refutes, dist.contradiction},
      {VerdictLabel::NotEnoughInfo, dist.neutral},
      {VerdictLabel::Supports, dist.entailment}};
  LabelScore best{ordered[0].first, ordered[0].second};
  for (const auto& [label, p] : ordered) {
    if (p > best.probability) best = {label, p};
  }
  return best;
}

class NliScorer {
 public:
  virtual ~NliScorer() = default;
  virtual std::vector<NliDistribution> classify(std::span<const NliRequest> batch) const = 0;
  virtual std::string name() const = 0;
};

// ---------------------------------------------------------------------------
// Lexical baseline

using ExclusivePairs = std::vector<std::pair<std::string, std::string>>;

/// Tab-separated word pairs, one per line; "#" starts a comment.
inline ExclusivePairs load_exclusive_pairs(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open exclusive-pair list: " + path);
  ExclusivePairs pairs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (normalize_text(line).empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError(lineno, "expected two tab-separated words");
    std::string a = normalize_text(line.substr(0, tab));
    std::string b = normalize_text(line.substr(tab + 1));
    if (a.empty() || b.empty()) throw ParseError(lineno, "empty pair member");
    for (auto* w : {&a, &b}) {
      for (char& c : *w) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    pairs.emplace_back(std::move(a), std::move(b));
  }
  return pairs;
}

namespace detail {

/// Lowercase word tokens keeping apostrophes; "n't" is split off its host.
inline std::set<std::string> nli_token_set(std::string_view text) {
  std::set<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (cur.empty()) return;
    if (cur.size() > 3 && cur.ends_with("n't")) {
      out.insert(cur.substr(0, cur.size() - 3));
      out.insert("n't");
    } else {
      out.insert(cur);
    }
    cur.clear();
  };
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if ((c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || c == '\'' || c >= 0x80) {
      cur.push_back(ch);
    } else if (c >= 'A' && c <= 'Z') {
      cur.push_back(static_cast<char>(c - 'A' + 'a'));
    } else {
      flush();
    }
  }
  flush();
  return out;
}

inline bool has_negation(const std::set<std::string>& toks) {
  return toks.contains("not") || toks.contains("no") || toks.contains("never") ||
         toks.contains("n't");
}

}  // namespace detail

/// Deterministic lexical stand-in for a pretrained entailment model.
///
/// J is the token Jaccard overlap. A contradiction cue fires when exactly one
/// side is negated, or when the sides hold different members of a configured
/// exclusive pair. With a cue the result is (e, c, n) with
/// c = 0.90 + 0.08 J and e = n = (1 - c) / 2, so J = 0 gives
/// (0.05, 0.90, 0.05) and J = 1 gives (0.01, 0.98, 0.01). Without a cue,
/// e = J, n = 1 - J, c = 0, each floored at 0.01, then renormalized.
class BaselineScorer final : public NliScorer {
 public:
  static constexpr double kContradictionBase = 0.90;
  static constexpr double kContradictionSlope = 0.08;
  static constexpr double kFloor = 0.01;

  explicit BaselineScorer(ExclusivePairs pairs = {}) : pairs_(std::move(pairs)) {}

  NliDistribution classify_one(const NliRequest& req) const {
    const auto p = detail::nli_token_set(req.premise);
    const auto h = detail::nli_token_set(req.hypothesis);
    std::size_t common = 0;
    for (const auto& t : p) common += h.contains(t) ? 1 : 0;
    const std::size_t uni = p.size() + h.size() - common;
    const double jaccard = uni == 0 ? 0.0 : static_cast<double>(common) / static_cast<double>(uni);

    if (contradiction_cue(p, h)) {
      const double c = kContradictionBase + kContradictionSlope * jaccard;
      const double rest = (1.0 - c) / 2.0;
      return {rest, c, rest};
    }
    const double e = std::max(jaccard, kFloor);
    const double c = kFloor;
    const double n = std::max(1.0 - jaccard, kFloor);
    const double z = e + c + n;
    return {e / z, c / z, n / z};
  }

  std::vector<NliDistribution> classify(std::span<const NliRequest> batch) const override {
    std::vector<NliDistribution> out;
    out.reserve(batch.size());
    for (const auto& r : batch) out.push_back(classify_one(r));
    return out;
  }

  std::string name() const override { return "baseline-lexical"; }
  const ExclusivePairs& exclusive_pairs() const { return pairs_; }

 private:
  bool contradiction_cue(const std::set<std::string>& p, const std::set<std::string>& h) const {
    if (detail::has_negation(p) != detail::has_negation(h)) return true;
    for (const auto& [a, b] : pairs_) {
      const bool forward = p.contains(a) && h.contains(b) && !h.contains(a) && !p.contains(b);
      const bool backward = p.contains(b) && h.contains(a) && !h.contains(b) && !p.contains(a);
      if (forward || backward) return true;
    }
    return false;
  }

  ExclusivePairs pairs_;
};

inline NliDistribution baseline_classify(const NliRequest& req, const ExclusivePairs& pairs = {}) {
  return BaselineScorer(pairs).classify_one(req);
}

}  // namespace factcheck
