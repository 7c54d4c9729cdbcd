#pragma once
// FEVER-format claim ingestion.

#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "factcheck/core.hpp"

namespace factcheck {

/// One JSON object per line:
///   {"id": int, "claim": str, "label": "SUPPORTS"|"REFUTES"|"NOT ENOUGH INFO",
///    "evidence": [[[annotation_id, evidence_id, page, sentence_index], ...], ...]}
/// Each inner list is one gold evidence group. Entries with a null page (as
/// FEVER writes for NEI claims) are skipped, and NEI claims always carry no
/// gold evidence. Blank lines are ignored.
inline std::vector<Claim> load_fever_jsonl(std::istream& in) {
  std::vector<Claim> claims;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (normalize_text(line).empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(lineno, e.what());
    }
    auto fail = [&](const std::string& reason) { return ParseError(lineno, reason); };
    if (!j.is_object()) throw fail("expected an object");
    if (!j.contains("id") || !j["id"].is_number_integer()) throw fail("'id' must be an integer");
    if (!j.contains("claim") || !j["claim"].is_string()) throw fail("'claim' must be a string");
    if (!j.contains("label") || !j["label"].is_string()) throw fail("'label' must be a string");

    Claim c;
    c.id = j["id"].get<std::int64_t>();
    c.text = j["claim"].get<std::string>();
    const auto label = parse_label(j["label"].get<std::string>());
    if (!label) throw fail("unknown label '" + j["label"].get<std::string>() + "'");
    c.gold_label = *label;

    const auto& ev = j.contains("evidence") ? j["evidence"] : nlohmann::json::array();
    if (!ev.is_array()) throw fail("'evidence' must be a list of groups");
    for (const auto& group : ev) {
      if (!group.is_array()) throw fail("evidence group must be a list");
      EvidenceGroup g;
      for (const auto& item : group) {
        if (!item.is_array() || item.size() != 4) throw fail("evidence item must have 4 fields");
        if (item[2].is_null()) continue;
        if (!item[2].is_string() || !item[3].is_number_integer() || item[3].get<std::int64_t>() < 0) {
          throw fail("evidence item needs a page string and a sentence index");
        }
        g.push_back({item[2].get<std::string>(), item[3].get<std::size_t>()});
      }
      if (!g.empty()) c.gold_evidence.push_back(std::move(g));
    }
    if (c.gold_label == VerdictLabel::NotEnoughInfo) c.gold_evidence.clear();
    claims.push_back(std::move(c));
  }
  return claims;
}

inline std::vector<Claim> load_fever_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open dataset: " + path);
  return load_fever_jsonl(in);
}

}  // namespace factcheck
