#pragma once
// Shared domain types: triples with provenance, verdict labels, claims.

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <unicode/normalizer2.h>
#include <unicode/unistr.h>

namespace factcheck {

// ---------------------------------------------------------------------------
// Errors

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& reason)
      : Error("line " + std::to_string(line) + ": " + reason), line_(line), reason_(reason) {}
  std::size_t line() const { return line_; }
  const std::string& reason() const { return reason_; }

 private:
  std::size_t line_;
  std::string reason_;
};

// ---------------------------------------------------------------------------
// Text normalization

/// Unicode NFC, runs of whitespace collapsed to one space, trimmed. Case is
/// preserved.
inline std::string normalize_text(std::string_view text) {
  std::string nfc;
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc_norm = icu::Normalizer2::getNFCInstance(status);
  if (U_SUCCESS(status)) {
    icu::UnicodeString src = icu::UnicodeString::fromUTF8(
        icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
    icu::UnicodeString dst = nfc_norm->normalize(src, status);
    if (U_SUCCESS(status)) dst.toUTF8String(nfc);
  }
  if (U_FAILURE(status)) nfc.assign(text);

  std::string out;
  out.reserve(nfc.size());
  bool pending_space = false;
  for (char ch : nfc) {
    const bool space = ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r' || ch == '\f' || ch == '\v';
    if (space) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(ch);
  }
  return out;
}

/// Lowercased alphanumeric word tokens. Non-ASCII bytes count as word
/// characters so UTF-8 letters stay inside words.
inline std::vector<std::string> alnum_tokens(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if ((c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || c >= 0x80) {
      cur.push_back(ch);
    } else if (c >= 'A' && c <= 'Z') {
      cur.push_back(static_cast<char>(c - 'A' + 'a'));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

// ---------------------------------------------------------------------------
// Labels

/// Three-way verdict. The enumerator order is the tie-break order used
/// everywhere: Refutes < NotEnoughInfo < Supports, lowest preferred.
enum class VerdictLabel : std::uint8_t { Refutes = 0, NotEnoughInfo = 1, Supports = 2 };

inline constexpr std::array<VerdictLabel, 3> kAllLabels = {
    VerdictLabel::Refutes, VerdictLabel::NotEnoughInfo, VerdictLabel::Supports};

inline constexpr std::size_t label_index(VerdictLabel label) {
  return static_cast<std::size_t>(label);
}

inline std::string_view to_string(VerdictLabel label) {
  switch (label) {
    case VerdictLabel::Supports:
      return "SUPPORTS";
    case VerdictLabel::Refutes:
      return "REFUTES";
    case VerdictLabel::NotEnoughInfo:
      return "NOT ENOUGH INFO";
  }
  return "NOT ENOUGH INFO";
}

inline std::optional<VerdictLabel> parse_label(std::string_view text) {
  if (text == "SUPPORTS") return VerdictLabel::Supports;
  if (text == "REFUTES") return VerdictLabel::Refutes;
  if (text == "NOT ENOUGH INFO") return VerdictLabel::NotEnoughInfo;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Provenance

/// Half-open byte range [start, end) into a UTF-8 sentence.
struct CharSpan {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - start; }
  bool valid_within(std::size_t length) const { return start < end && end <= length; }
  friend bool operator==(const CharSpan&, const CharSpan&) = default;
};

/// Identifies a sentence within a document.
struct SentenceKey {
  std::string doc_id;
  std::size_t sentence_index = 0;

  friend auto operator<=>(const SentenceKey&, const SentenceKey&) = default;
};

struct SourceRef {
  std::string doc_id;
  std::size_t sentence_index = 0;
  CharSpan span;

  SentenceKey key() const { return {doc_id, sentence_index}; }
  friend bool operator==(const SourceRef&, const SourceRef&) = default;
};

/// Where an extracted triple came from: the sentence, the extent of the whole
/// triple, and the span of each field. A unary triple has no object span.
struct Provenance {
  SourceRef source;
  CharSpan subject;
  CharSpan relation;
  std::optional<CharSpan> object;
};

enum class TripleOrigin : std::uint8_t { Extracted, UniversalSchema };

inline std::string_view to_string(TripleOrigin origin) {
  return origin == TripleOrigin::Extracted ? "openie" : "uschema";
}

// ---------------------------------------------------------------------------
// Triples

/// Object of a triple extracted from a unary relation.
inline constexpr std::string_view kUnaryPlaceholder = "[NONE]";

struct Triple {
  std::string subject;
  std::string relation;
  std::string object;
  std::optional<Provenance> provenance;
  TripleOrigin origin = TripleOrigin::Extracted;

  bool unary() const { return object == kUnaryPlaceholder; }

  /// Equality on the normalized fields only; provenance is ignored.
  bool same_fields(const Triple& other) const {
    return subject == other.subject && relation == other.relation && object == other.object;
  }
};

/// Builds a triple with normalized fields; throws std::invalid_argument if any
/// field is empty after normalization.
inline Triple make_triple(std::string_view subject, std::string_view relation,
                          std::string_view object) {
  Triple t{normalize_text(subject), normalize_text(relation), normalize_text(object), {}, {}};
  if (t.subject.empty() || t.relation.empty() || t.object.empty()) {
    throw std::invalid_argument("triple fields must be non-empty");
  }
  return t;
}

/// "subject relation object"; the unary placeholder is dropped.
inline std::string linearize_triple(const Triple& t) {
  std::string out = t.subject;
  out += ' ';
  out += t.relation;
  if (!t.unary()) {
    out += ' ';
    out += t.object;
  }
  return out;
}

inline std::string to_string(const Triple& t) {
  return "<" + t.subject + ", " + t.relation + ", " + t.object + ">";
}

// ---------------------------------------------------------------------------
// Verdicts and claims

struct ScoredVerdict {
  VerdictLabel label = VerdictLabel::NotEnoughInfo;
  double probability = 0.0;
  Triple evidence;
};

/// A set of sentences that together form one complete piece of gold evidence.
using EvidenceGroup = std::vector<SentenceKey>;

struct Claim {
  std::int64_t id = 0;
  std::string text;
  std::optional<VerdictLabel> gold_label;
  std::vector<EvidenceGroup> gold_evidence;
};

/// One retrieved or supplied evidence sentence. The span of `source` covers
/// the whole sentence.
struct EvidenceEntry {
  SourceRef source;
  std::string text;
  double score = 0.0;
};

/// Ranked evidence sentences: score descending, ties by (doc id, sentence
/// index) ascending.
struct EvidenceSet {
  std::vector<EvidenceEntry> entries;

  std::size_t size() const { return entries.size(); }
  bool empty() const { return entries.empty(); }
};

inline EvidenceEntry make_evidence_entry(std::string doc_id, std::size_t sentence_index,
                                         std::string text, double score = 0.0) {
  EvidenceEntry e;
  e.source = SourceRef{std::move(doc_id), sentence_index, CharSpan{0, text.size()}};
  e.text = std::move(text);
  e.score = score;
  return e;
}

}  // namespace factcheck
