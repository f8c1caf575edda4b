#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

namespace topicnav {

/// One OCR-extracted text fragment. `tokens` stays empty until preprocessing.
struct Document {
  std::string id;
  std::optional<std::chrono::year_month_day> date;
  std::string raw_text;
  std::vector<std::string> tokens;

  bool operator==(const Document&) const = default;
};

/// Parses "YYYY-MM-DD", optionally followed by a "T..." time part.
std::optional<std::chrono::year_month_day> parse_iso_date(std::string_view text);
std::string format_iso_date(const std::chrono::year_month_day& date);

enum class CorpusFormat { Jsonl, TextDirectory };

CorpusFormat parse_corpus_format(std::string_view tag);
std::string_view corpus_format_name(CorpusFormat format);

/// Reads raw documents. JSONL records carry `id`, `text` and an optional ISO
/// `date`; in a text directory every `*.txt` file is a document keyed by its
/// relative path. Duplicate ids and malformed records are rejected.
std::vector<Document> load_corpus(const std::filesystem::path& path, CorpusFormat format);

struct StringHash {
  using is_transparent = void;
  std::size_t operator()(std::string_view s) const noexcept {
    return std::hash<std::string_view>{}(s);
  }
};

using TermSet = std::unordered_set<std::string, StringHash, std::equal_to<>>;

/// Variant spelling -> canonical spelling. Construction rejects tables where a
/// canonical form is itself a key mapping elsewhere, so one pass is enough.
class LexiconTable {
 public:
  LexiconTable() = default;
  static LexiconTable from_entries(std::vector<std::pair<std::string, std::string>> entries);
  /// UTF-8 TSV, `variant<TAB>canonical` per line; blank lines and `#` comments skipped.
  static LexiconTable load(const std::filesystem::path& path);

  const std::string* lookup(std::string_view variant) const;
  std::size_t size() const noexcept { return entries_.size(); }
  /// Entries sorted by variant.
  std::vector<std::pair<std::string, std::string>> entries() const;

 private:
  std::unordered_map<std::string, std::string, StringHash, std::equal_to<>> entries_;
};

/// Replaces each token found in the lexicon by its canonical form.
std::vector<std::string> standardize(std::vector<std::string> tokens, const LexiconTable& lexicon);

/// A character-class predicate; a token matching any configured rule is noise.
struct NoiseRule {
  enum class Kind {
    FewLetters,     // fewer than `limit` letters
    ShortAlnumMix,  // both letters and digits, shorter than `limit` characters
    Symbols,        // any character that is neither a letter nor a digit
  };
  Kind kind = Kind::FewLetters;
  std::size_t limit = 0;

  bool matches(std::string_view token) const;

  static NoiseRule few_letters(std::size_t min_letters) { return {Kind::FewLetters, min_letters}; }
  static NoiseRule short_alnum_mix(std::size_t max_len_exclusive) {
    return {Kind::ShortAlnumMix, max_len_exclusive};
  }
  static NoiseRule symbols() { return {Kind::Symbols, 0}; }

  bool operator==(const NoiseRule&) const = default;
};

std::vector<NoiseRule> default_noise_rules();

struct StemRule {
  std::string suffix;
  std::string replacement;
  bool operator==(const StemRule&) const = default;
};

/// One rule per line, `suffix<TAB>replacement` (replacement may be empty).
std::vector<StemRule> load_stem_rules(const std::filesystem::path& path);
/// One term per line, `#` starts a comment.
TermSet load_stopwords(const std::filesystem::path& path);

/// Suffix-stripping stemmer. The first (longest) matching suffix wins and is
/// applied once, provided at least `min_stem_len` characters remain before it.
class Stemmer {
 public:
  Stemmer() = default;
  explicit Stemmer(std::vector<StemRule> rules, std::size_t min_stem_len = 2);

  std::string stem(std::string_view token) const;
  const std::vector<StemRule>& rules() const noexcept { return rules_; }

 private:
  std::vector<StemRule> rules_;
  std::size_t min_stem_len_ = 2;
};

enum class TokenizerMode {
  Letters,  // maximal runs of letters
  Words,    // split on whitespace and punctuation, keeping digits/symbols inside tokens
};

struct PipelineConfig {
  TermSet stopwords;
  std::size_t min_token_len = 2;
  std::vector<NoiseRule> noise_rules = default_noise_rules();
  std::vector<StemRule> stemmer_rules;
  bool lowercase = true;
  bool strip_diacritics = false;
  bool rejoin_hyphenation = true;
  TokenizerMode tokenizer = TokenizerMode::Words;
};

/// Repairs line-break hyphenation, removes control characters, then applies
/// the configured case folding and diacritic stripping.
std::string normalize_text(std::string_view raw, const PipelineConfig& config);

std::vector<std::string> tokenize(std::string_view text, TokenizerMode mode = TokenizerMode::Letters);

/// Compiled form of a PipelineConfig plus lexicon, reusable across documents.
/// Stopwords, lexicon entries and stem suffixes are normalized with the same
/// case/diacritic settings as the text.
class Pipeline {
 public:
  Pipeline(PipelineConfig config, LexiconTable lexicon);

  /// normalize -> tokenize -> drop noise/stopwords -> standardize -> stem.
  /// Tokens that stemming or standardization turn into filtered forms are
  /// dropped by a final pass with the same filter.
  std::vector<std::string> process_text(std::string_view raw) const;
  Document preprocess(Document doc) const;
  /// Runs a single user-supplied term (seed or query word) through the chain;
  /// nullopt when it is filtered out.
  std::optional<std::string> process_term(std::string_view term) const;

  bool is_filtered(std::string_view token) const;

  const PipelineConfig& config() const noexcept { return config_; }
  const LexiconTable& lexicon() const noexcept { return lexicon_; }

 private:
  PipelineConfig config_;
  LexiconTable lexicon_;
  Stemmer stemmer_;
};

Document preprocess(Document doc, const PipelineConfig& config, const LexiconTable& lexicon);

/// Preprocesses every document, splitting the work across `threads` workers.
void preprocess_corpus(std::vector<Document>& docs, const Pipeline& pipeline, unsigned threads = 0);

}  // namespace topicnav
