#pragma once
// Open information extraction: provenance-tracked <subject, relation, object>
// triples from claim and evidence sentences.
//
// The built-in extractor is a deterministic pattern matcher. It anchors on
// verb-lexicon matches, extends a relation through "W* P" (a short run of
// non-verb words ending in a preposition, as in "is a member of"), takes the
// span left of the relation as subject and the span right of it as objects,
// splitting both on commas and coordinating conjunctions. Coordinated verbs
// ("wrote and tested") share their subject and objects.

#include <algorithm>
#include <cctype>
#include <fstream>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_set>
#include <vector>

#include "factcheck/core.hpp"

namespace factcheck {

class EmptyClaimExtraction : public Error {
 public:
  explicit EmptyClaimExtraction(std::int64_t claim_id)
      : Error("no triples extracted from claim " + std::to_string(claim_id)) {}
};

struct ExtractorConfig {
  /// Lowercase surface forms of verbs and auxiliaries.
  std::unordered_set<std::string> verbs;
  std::size_t max_triples_per_sentence = 16;
  /// Attach the agentive "by" of a passive ("was reviewed by") to the
  /// relation. When off it stays on the object ("by Ron Underwood").
  bool passive_voice = true;

  void validate() const {
    if (verbs.empty()) throw ConfigError("verb lexicon is empty");
    if (max_triples_per_sentence < 1) throw ConfigError("max triples per sentence must be >= 1");
  }
};

inline const std::vector<std::string>& default_verb_lexicon() {
  static const std::vector<std::string> verbs = {
      // auxiliaries and copulas
      "is", "am", "are", "was", "were", "be", "been", "being", "has", "have", "had", "do",
      "does", "did", "will", "would", "can", "could", "shall", "should", "may", "might",
      "must", "ca", "wo",
      // lexical verbs
      "born", "wrote", "write", "writes", "written", "tested", "test", "tests", "directed",
      "directs", "direct", "reviewed", "reviews", "review", "starred", "starring", "stars",
      "played", "plays", "play", "won", "wins", "win", "founded", "founds", "created",
      "creates", "create", "designed", "designs", "located", "married", "serves", "served",
      "serve", "lives", "lived", "live", "teaches", "taught", "teach", "works", "worked",
      "work", "visited", "visits", "visit", "gave", "gives", "give", "given", "runs", "ran",
      "run", "sleeps", "slept", "sleep", "joined", "joins", "leads", "led", "lead", "owns",
      "owned", "own", "produced", "produces", "released", "releases", "composed", "painted",
      "invented", "discovered", "built", "builds", "published", "publishes", "received",
      "receives", "studied", "studies", "graduated", "died", "dies", "became", "becomes",
      "become", "contains", "contained", "includes", "included", "known", "called", "named",
      "flows", "flowed", "borders", "bordered", "hosted", "hosts", "announced", "signed",
      "appeared", "appears", "scored", "elected", "moved", "grew", "grows", "speaks", "spoke",
      "spoken", "sang", "sings", "recorded", "acted", "acts", "met", "meets", "used", "uses",
      "made", "makes", "took", "takes", "held", "holds", "remains", "remained", "measures",
      "reached", "crossed", "climbed", "orbits", "orbited", "lost", "loses"};
  return verbs;
}

inline ExtractorConfig default_extractor_config() {
  ExtractorConfig cfg;
  const auto& verbs = default_verb_lexicon();
  cfg.verbs.insert(verbs.begin(), verbs.end());
  return cfg;
}

inline std::string to_lower_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

/// One surface form per line; blank lines and "#" comments ignored.
inline std::unordered_set<std::string> load_verb_lexicon(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open verb lexicon: " + path);
  std::unordered_set<std::string> verbs;
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::string form = to_lower_ascii(normalize_text(line));
    if (!form.empty()) verbs.insert(std::move(form));
  }
  return verbs;
}

// ---------------------------------------------------------------------------
// Tokenization

struct Token {
  std::size_t start = 0;
  std::size_t end = 0;
  std::string lower;
  bool word = false;
  bool capitalized = false;
};

namespace detail {

inline bool is_word_byte(unsigned char c) {
  return std::isalnum(c) || c == '_' || c == '\'' || c >= 0x80;
}

inline constexpr std::string_view kBracketTokens[] = {"-LRB-", "-RRB-", "-LSB-", "-RSB-",
                                                      "-LCB-", "-RCB-"};

}  // namespace detail

/// Word tokens are runs of alphanumerics, '_', apostrophes and non-ASCII
/// bytes, with '-' and '.' allowed between word characters. "n't" is split
/// off its host ("isn't" -> "is" "n't"). Every other byte that is not
/// whitespace is a one-byte punctuation token. Offsets are byte offsets.
inline std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  const std::size_t n = text.size();
  auto byte = [&](std::size_t k) { return static_cast<unsigned char>(text[k]); };
  while (i < n) {
    const unsigned char c = byte(i);
    if (std::isspace(c)) {
      ++i;
      continue;
    }
    bool bracket = false;
    for (std::string_view b : detail::kBracketTokens) {
      if (text.substr(i, b.size()) == b) {
        tokens.push_back({i, i + b.size(), to_lower_ascii(b), false, false});
        i += b.size();
        bracket = true;
        break;
      }
    }
    if (bracket) continue;
    if (!detail::is_word_byte(c)) {
      tokens.push_back({i, i + 1, std::string(1, static_cast<char>(c)), false, false});
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < n) {
      const unsigned char d = byte(j);
      if (detail::is_word_byte(d)) {
        ++j;
      } else if ((d == '-' || d == '.') && j + 1 < n && detail::is_word_byte(byte(j + 1)) &&
                 byte(j + 1) != '\'') {
        ++j;
      } else {
        break;
      }
    }
    std::string lower = to_lower_ascii(text.substr(i, j - i));
    const bool upper = std::isupper(c) != 0;
    if (lower.size() > 3 && lower.ends_with("n't")) {
      tokens.push_back({i, j - 3, lower.substr(0, lower.size() - 3), true, upper});
      tokens.push_back({j - 3, j, "n't", true, false});
    } else {
      tokens.push_back({i, j, std::move(lower), true, upper});
    }
    i = j;
  }
  return tokens;
}

// ---------------------------------------------------------------------------
// Argument expansion

/// A surface field and where it sits in its sentence.
struct TextSpan {
  std::string text;
  CharSpan span{};
};

/// Cross product of subjects and objects, subject-major. With no objects the
/// relation is unary and every triple gets the "[NONE]" object. When `source`
/// is given, triples carry provenance built from the spans.
inline std::vector<Triple> expand_arguments(const TextSpan& relation,
                                            std::span<const TextSpan> subjects,
                                            std::span<const TextSpan> objects,
                                            const std::optional<SentenceKey>& source = {}) {
  std::vector<Triple> out;
  out.reserve(subjects.size() * std::max<std::size_t>(1, objects.size()));
  auto emit = [&](const TextSpan& subj, const TextSpan* obj) {
    Triple t = make_triple(subj.text, relation.text, obj ? std::string_view(obj->text)
                                                         : kUnaryPlaceholder);
    if (source) {
      Provenance p;
      p.subject = subj.span;
      p.relation = relation.span;
      std::size_t lo = std::min(subj.span.start, relation.span.start);
      std::size_t hi = std::max(subj.span.end, relation.span.end);
      if (obj) {
        p.object = obj->span;
        lo = std::min(lo, obj->span.start);
        hi = std::max(hi, obj->span.end);
      }
      p.source = SourceRef{source->doc_id, source->sentence_index, CharSpan{lo, hi}};
      t.provenance = std::move(p);
    }
    out.push_back(std::move(t));
  };
  for (const auto& subj : subjects) {
    if (objects.empty()) {
      emit(subj, nullptr);
    } else {
      for (const auto& obj : objects) emit(subj, &obj);
    }
  }
  return out;
}

inline std::vector<Triple> expand_arguments(std::string_view relation,
                                            const std::vector<std::string>& subjects,
                                            const std::vector<std::string>& objects) {
  auto wrap = [](const std::vector<std::string>& xs) {
    std::vector<TextSpan> out;
    for (const auto& x : xs) out.push_back({x, {}});
    return out;
  };
  const auto s = wrap(subjects);
  const auto o = wrap(objects);
  return expand_arguments(TextSpan{std::string(relation), {}}, s, o);
}

// ---------------------------------------------------------------------------
// Extractor interface

struct SentenceInput {
  SentenceKey key;
  std::string text;
};

class TripleExtractor {
 public:
  virtual ~TripleExtractor() = default;
  virtual std::vector<Triple> extract(std::span<const SentenceInput> sentences) const = 0;
};

class PatternExtractor final : public TripleExtractor {
 public:
  explicit PatternExtractor(ExtractorConfig cfg = default_extractor_config())
      : cfg_(std::move(cfg)) {
    cfg_.validate();
  }

  const ExtractorConfig& config() const { return cfg_; }

  std::vector<Triple> extract(std::span<const SentenceInput> sentences) const override {
    std::vector<Triple> out;
    for (const auto& s : sentences) {
      auto triples = extract_sentence(s);
      out.insert(out.end(), std::make_move_iterator(triples.begin()),
                 std::make_move_iterator(triples.end()));
    }
    return out;
  }

  std::vector<Triple> extract_sentence(const SentenceInput& input) const;

 private:
  struct Relation {
    std::size_t begin;  // token range [begin, end)
    std::size_t end;
  };
  struct Chain {
    std::vector<Relation> relations;
    std::size_t begin;
    std::size_t end;
  };

  bool is_verb(const std::vector<Token>& toks, std::size_t i) const;
  std::vector<Relation> find_relations(const std::vector<Token>& toks) const;

  ExtractorConfig cfg_;
};

namespace detail {

inline const std::unordered_set<std::string>& prepositions() {
  static const std::unordered_set<std::string> s = {
      "of",     "in",     "on",      "at",     "by",      "for",    "with",  "from",
      "to",     "into",   "about",   "as",     "over",    "under",  "after", "before",
      "during", "through", "between", "against", "among", "near",   "onto",  "upon",
      "within", "without", "across",  "behind", "beyond",  "toward", "towards"};
  return s;
}

inline bool is_conjunction(const Token& t) {
  return t.lower == "and" || t.lower == "or" || t.lower == "but" || t.lower == "nor";
}
inline bool is_relative_pronoun(const Token& t) {
  return t.lower == "who" || t.lower == "which" || t.lower == "that" || t.lower == "whom" ||
         t.lower == "whose";
}
inline bool is_negation(const Token& t) {
  return t.lower == "not" || t.lower == "never" || t.lower == "n't";
}
inline bool is_be_form(const Token& t) {
  static const std::unordered_set<std::string> s = {"is",   "am",   "are",  "was",
                                                    "were", "be",   "been", "being"};
  return s.contains(t.lower);
}
inline bool is_preposition(const Token& t) { return t.word && prepositions().contains(t.lower); }
inline bool is_soft_separator(const Token& t) {
  return t.lower == "," || is_conjunction(t) || is_relative_pronoun(t);
}
inline bool is_hard_boundary(const Token& t) {
  if (t.word) return false;
  static const std::unordered_set<std::string> s = {".",     "!",     "?",     ";",    ":",
                                                    "(",     ")",     "[",     "]",    "{",
                                                    "}",     "-lrb-", "-rrb-", "-lsb-", "-rsb-",
                                                    "-lcb-", "-rcb-"};
  return s.contains(t.lower);
}

}  // namespace detail

inline bool PatternExtractor::is_verb(const std::vector<Token>& toks, std::size_t i) const {
  const Token& t = toks[i];
  if (!t.word || !cfg_.verbs.contains(t.lower)) return false;
  // Capitalized forms are proper nouns ("Will Smith"). Sentence-initially a
  // following capitalized word marks a name.
  if (!t.capitalized) return true;
  return i == 0 && !(i + 1 < toks.size() && toks[i + 1].word && toks[i + 1].capitalized);
}

inline std::vector<PatternExtractor::Relation> PatternExtractor::find_relations(
    const std::vector<Token>& toks) const {
  using namespace detail;
  std::vector<Relation> rels;
  const std::size_t n = toks.size();
  auto content = [&](std::size_t k) {
    return k < n && toks[k].word && !is_soft_separator(toks[k]) && !is_preposition(toks[k]) &&
           !is_verb(toks, k);
  };
  std::size_t i = 0;
  while (i < n) {
    if (!is_verb(toks, i)) {
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    bool has_be = is_be_form(toks[i]);
    while (j < n && (is_verb(toks, j) || is_negation(toks[j]))) {
      has_be = has_be || is_be_form(toks[j]);
      ++j;
    }
    auto attachable = [&](std::size_t k) {
      if (!is_preposition(toks[k])) return false;
      if (toks[k].lower == "by" && has_be && !cfg_.passive_voice) return false;
      return content(k + 1);
    };
    std::size_t end = j;
    if (j < n && attachable(j)) {
      end = j + 1;
    } else {
      std::size_t k = j;
      while (k < n && k - j < 4 && content(k)) ++k;
      if (k > j && k < n && attachable(k)) end = k + 1;
    }
    rels.push_back({i, end});
    i = end;
  }
  return rels;
}

inline std::vector<Triple> PatternExtractor::extract_sentence(const SentenceInput& input) const {
  using namespace detail;
  const std::string& text = input.text;
  const std::vector<Token> toks = tokenize(text);
  const std::vector<Relation> rels = find_relations(toks);
  if (rels.empty()) return {};

  // Group coordinated relations: "wrote and tested", "wrote, tested".
  std::vector<Chain> chains;
  for (const Relation& r : rels) {
    if (!chains.empty()) {
      Chain& last = chains.back();
      std::size_t gap = r.begin - last.end;
      bool coordinated = false;
      if (gap == 1) {
        coordinated = is_conjunction(toks[last.end]) || toks[last.end].lower == ",";
      } else if (gap == 2) {
        coordinated = toks[last.end].lower == "," && is_conjunction(toks[last.end + 1]);
      }
      if (coordinated) {
        last.relations.push_back(r);
        last.end = r.end;
        continue;
      }
    }
    chains.push_back({{r}, r.begin, r.end});
  }

  auto span_of = [&](std::size_t first, std::size_t last_excl) {
    TextSpan ts;
    ts.span = CharSpan{toks[first].start, toks[last_excl - 1].end};
    ts.text = normalize_text(std::string_view(text).substr(ts.span.start, ts.span.size()));
    return ts;
  };
  // Split a token range into arguments on commas and conjunctions, trimming
  // punctuation and leading relative pronouns.
  auto split_args = [&](std::size_t begin, std::size_t end) {
    std::vector<TextSpan> args;
    std::size_t piece = begin;
    for (std::size_t k = begin; k <= end; ++k) {
      const bool cut = k == end || toks[k].lower == "," || is_conjunction(toks[k]);
      if (!cut) continue;
      std::size_t a = piece;
      std::size_t b = k;
      while (a < b && (!toks[a].word || is_relative_pronoun(toks[a]))) ++a;
      while (b > a && !toks[b - 1].word) --b;
      if (a < b) args.push_back(span_of(a, b));
      piece = k + 1;
    }
    return args;
  };
  auto after_last_hard = [&](std::size_t begin, std::size_t end) {
    std::size_t start = begin;
    for (std::size_t k = begin; k < end; ++k) {
      if (is_hard_boundary(toks[k])) start = k + 1;
    }
    return start;
  };

  std::vector<Triple> out;
  std::size_t subject_from = 0;
  std::optional<std::vector<TextSpan>> forced_subjects;
  for (std::size_t c = 0; c < chains.size(); ++c) {
    const Chain& chain = chains[c];
    std::vector<TextSpan> subjects;
    if (forced_subjects) {
      subjects = std::move(*forced_subjects);
      forced_subjects.reset();
    } else {
      subjects = split_args(after_last_hard(subject_from, chain.begin), chain.begin);
    }

    const std::size_t next_begin = c + 1 < chains.size() ? chains[c + 1].begin : toks.size();
    std::size_t stop = chain.end;
    while (stop < next_begin && !is_hard_boundary(toks[stop])) ++stop;

    std::vector<TextSpan> objects;
    if (stop == next_begin && c + 1 < chains.size()) {
      std::optional<std::size_t> sep;
      for (std::size_t k = chain.end; k < stop; ++k) {
        if (is_soft_separator(toks[k])) sep = k;
      }
      if (sep) {
        // Back up over ", and" / ", who" so the object ends before the run.
        std::size_t cut = *sep;
        while (cut > chain.end && is_soft_separator(toks[cut - 1])) --cut;
        objects = split_args(chain.end, cut);
        if (is_relative_pronoun(toks[*sep])) {
          if (!objects.empty()) {
            forced_subjects = std::vector<TextSpan>{objects.back()};
          } else {
            forced_subjects = subjects;
          }
        } else if (split_args(*sep + 1, next_begin).empty()) {
          forced_subjects = subjects;  // "teaches X and lives in Y"
        } else {
          subject_from = *sep + 1;
        }
      } else {
        // "a film starring Eddie Murphy": the next relation hangs off this object.
        objects = split_args(chain.end, stop);
        forced_subjects = objects.empty() ? subjects : std::vector<TextSpan>{objects.back()};
      }
    } else {
      objects = split_args(chain.end, stop);
      subject_from = std::min(stop + 1, toks.size());
    }

    if (subjects.empty()) continue;
    for (const Relation& r : chain.relations) {
      const TextSpan rel = span_of(r.begin, r.end);
      auto triples = expand_arguments(rel, subjects, objects, input.key);
      for (auto& t : triples) {
        if (out.size() >= cfg_.max_triples_per_sentence) return out;
        out.push_back(std::move(t));
      }
    }
  }
  return out;
}

/// Runs `extractor` over the sentences in order.
inline std::vector<Triple> extract_triples(std::span<const SentenceInput> sentences,
                                           const TripleExtractor& extractor) {
  return extractor.extract(sentences);
}

inline std::vector<Triple> extract_triples(std::span<const SentenceInput> sentences,
                                           const ExtractorConfig& cfg) {
  return PatternExtractor(cfg).extract(sentences);
}

/// Removes triples whose normalized fields repeat an earlier one.
inline std::vector<Triple> dedup_triples(std::vector<Triple> triples) {
  std::set<std::tuple<std::string, std::string, std::string>> seen;
  std::vector<Triple> out;
  out.reserve(triples.size());
  for (auto& t : triples) {
    if (seen.emplace(t.subject, t.relation, t.object).second) out.push_back(std::move(t));
  }
  return out;
}

/// Claim sentences are keyed as document "claim:<id>", sentence 0.
inline SentenceKey claim_sentence_key(const Claim& claim) {
  return {"claim:" + std::to_string(claim.id), 0};
}

struct ClaimEvidenceTriples {
  std::vector<Triple> claim;     // the claim triple set
  std::vector<Triple> evidence;  // the evidence triple set
};

/// Extracts and deduplicates both triple sets. Throws EmptyClaimExtraction
/// when nothing is extracted from the claim.
inline ClaimEvidenceTriples extract_for_claim_and_evidence(const Claim& claim,
                                                           const EvidenceSet& evidence,
                                                           const TripleExtractor& extractor) {
  if (normalize_text(claim.text).empty()) throw std::invalid_argument("claim text is empty");
  ClaimEvidenceTriples out;
  const SentenceInput claim_input{claim_sentence_key(claim), claim.text};
  out.claim = dedup_triples(extractor.extract(std::span(&claim_input, 1)));
  if (out.claim.empty()) throw EmptyClaimExtraction(claim.id);

  std::vector<SentenceInput> inputs;
  inputs.reserve(evidence.size());
  for (const auto& e : evidence.entries) {
    inputs.push_back({e.source.key(), e.text});
  }
  out.evidence = dedup_triples(extractor.extract(inputs));
  return out;
}

}  // namespace factcheck
