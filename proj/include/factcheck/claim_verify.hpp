#pragma once
// Claim-level aggregation of triple labels.

#include <span>
#include <string_view>

#include "factcheck/core.hpp"

namespace factcheck {

/// Which rule produced a claim verdict.
enum class ClaimRule : std::uint8_t { AnyRefutes, AnyNotEnoughInfo, AllSupports, NoTriples };

inline std::string_view to_string(ClaimRule rule) {
  switch (rule) {
    case ClaimRule::AnyRefutes:
      return "any-refutes";
    case ClaimRule::AnyNotEnoughInfo:
      return "any-nei";
    case ClaimRule::AllSupports:
      return "all-supports";
    case ClaimRule::NoTriples:
      return "no-triples";
  }
  return "no-triples";
}

struct ClaimDecision {
  VerdictLabel label = VerdictLabel::NotEnoughInfo;
  ClaimRule rule = ClaimRule::NoTriples;
};

inline ClaimDecision aggregate_claim_detailed(std::span<const VerdictLabel> labels) {
  if (labels.empty()) return {VerdictLabel::NotEnoughInfo, ClaimRule::NoTriples};
  bool any_nei = false;
  for (VerdictLabel l : labels) {
    if (l == VerdictLabel::Refutes) return {VerdictLabel::Refutes, ClaimRule::AnyRefutes};
    any_nei = any_nei || l == VerdictLabel::NotEnoughInfo;
  }
  if (any_nei) return {VerdictLabel::NotEnoughInfo, ClaimRule::AnyNotEnoughInfo};
  return {VerdictLabel::Supports, ClaimRule::AllSupports};
}

/// Any Refutes -> Refutes; otherwise any NEI -> NEI; otherwise Supports.
/// No triple labels at all -> NEI.
inline VerdictLabel aggregate_claim(std::span<const VerdictLabel> labels) {
  return aggregate_claim_detailed(labels).label;
}

}  // namespace factcheck
