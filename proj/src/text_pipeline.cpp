#include "topicnav/text_pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "topicnav/error.hpp"
#include "utf8.hpp"

namespace topicnav {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Calls fn(line_number, line) for every line, stripping a trailing '\r'.
template <typename Fn>
void for_each_line(const fs::path& path, Fn&& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path.string());
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    fn(number, std::string_view(line));
  }
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::string_view strip_comment(std::string_view line) {
  const auto hash = line.find('#');
  return hash == std::string_view::npos ? line : line.substr(0, hash);
}

bool is_separator(char32_t cp) {
  if (utf8::is_space(cp) || utf8::is_control(cp)) return true;
  switch (cp) {
    case '.': case ',': case ';': case ':': case '!': case '?':
    case '(': case ')': case '[': case ']': case '{': case '}':
    case '"': case '\'': case '`': case '-': case '/': case '\\':
    case 0xAB: case 0xBB: case 0xBF: case 0xA1:  // « » ¿ ¡
    case 0x2013: case 0x2014: case 0x2018: case 0x2019: case 0x201C: case 0x201D:
    case 0x2026:
      return true;
    default:
      return false;
  }
}

bool is_line_space(char32_t cp) { return cp == ' ' || cp == '\t' || cp == '\r'; }

}  // namespace

std::optional<std::chrono::year_month_day> parse_iso_date(std::string_view text) {
  if (text.size() < 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  if (text.size() > 10 && text[10] != 'T' && text[10] != ' ') return std::nullopt;
  int y = 0;
  unsigned m = 0, d = 0;
  auto parse = [](std::string_view s, auto& out) {
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size();
  };
  if (!parse(text.substr(0, 4), y) || !parse(text.substr(5, 2), m) || !parse(text.substr(8, 2), d)) {
    return std::nullopt;
  }
  std::chrono::year_month_day date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
  if (!date.ok()) return std::nullopt;
  return date;
}

std::string format_iso_date(const std::chrono::year_month_day& date) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(date.year()),
                static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()));
  return buf;
}

CorpusFormat parse_corpus_format(std::string_view tag) {
  if (tag == "jsonl") return CorpusFormat::Jsonl;
  if (tag == "dir" || tag == "text-directory") return CorpusFormat::TextDirectory;
  throw Error(ErrorCode::InvalidArgument, "unknown corpus format '" + std::string(tag) + "'");
}

std::string_view corpus_format_name(CorpusFormat format) {
  return format == CorpusFormat::Jsonl ? "jsonl" : "dir";
}

std::vector<Document> load_corpus(const fs::path& path, CorpusFormat format) {
  std::vector<Document> docs;
  TermSet seen;
  auto add = [&](Document doc) {
    if (!seen.insert(doc.id).second) {
      throw Error(ErrorCode::DuplicateId, "duplicate document id '" + doc.id + "'");
    }
    docs.push_back(std::move(doc));
  };

  std::error_code ec;
  if (format == CorpusFormat::Jsonl) {
    if (!fs::is_regular_file(path, ec)) throw Error(ErrorCode::Io, "cannot read " + path.string());
    for_each_line(path, [&](std::size_t line_no, std::string_view line) {
      if (trim(line).empty()) return;
      auto where = [&] { return path.string() + ":" + std::to_string(line_no) + ": "; };
      json record = json::parse(line, nullptr, false);
      if (record.is_discarded() || !record.is_object()) {
        throw Error(ErrorCode::MalformedRecord, where() + "not a JSON object");
      }
      auto id = record.find("id");
      auto text = record.find("text");
      if (id == record.end() || !id->is_string() || id->get_ref<const std::string&>().empty()) {
        throw Error(ErrorCode::MalformedRecord, where() + "missing string field 'id'");
      }
      if (text == record.end() || !text->is_string()) {
        throw Error(ErrorCode::MalformedRecord, where() + "missing string field 'text'");
      }
      Document doc;
      doc.id = id->get<std::string>();
      doc.raw_text = text->get<std::string>();
      if (auto date = record.find("date"); date != record.end() && !date->is_null()) {
        if (!date->is_string()) throw Error(ErrorCode::MalformedRecord, where() + "'date' must be a string");
        doc.date = parse_iso_date(date->get_ref<const std::string&>());
        if (!doc.date) throw Error(ErrorCode::MalformedRecord, where() + "invalid ISO-8601 date");
      }
      add(std::move(doc));
    });
    return docs;
  }

  if (!fs::is_directory(path, ec)) throw Error(ErrorCode::Io, "not a directory: " + path.string());
  std::vector<fs::path> files;
  for (fs::recursive_directory_iterator it(path, ec), end; it != end; it.increment(ec)) {
    if (ec) throw Error(ErrorCode::Io, "cannot list " + path.string() + ": " + ec.message());
    if (it->is_regular_file() && it->path().extension() == ".txt") files.push_back(it->path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& file : files) {
    Document doc;
    doc.id = fs::relative(file, path).generic_string();
    doc.raw_text = read_file(file);
    // Files that are not valid UTF-8 are taken to be Latin-1.
    if (utf8::encode(utf8::decode(doc.raw_text)) != doc.raw_text) {
      std::u32string cps(doc.raw_text.begin(), doc.raw_text.end());
      for (auto& cp : cps) cp = static_cast<unsigned char>(cp);
      doc.raw_text = utf8::encode(cps);
    }
    add(std::move(doc));
  }
  return docs;
}

// ---- lexicon ---------------------------------------------------------------

LexiconTable LexiconTable::from_entries(std::vector<std::pair<std::string, std::string>> entries) {
  LexiconTable table;
  for (auto& [variant, canonical] : entries) {
    auto [it, inserted] = table.entries_.emplace(variant, canonical);
    if (!inserted && it->second != canonical) {
      throw Error(ErrorCode::InvalidLexicon,
                  "variant '" + variant + "' maps to both '" + it->second + "' and '" + canonical + "'");
    }
  }
  for (const auto& [variant, canonical] : table.entries_) {
    auto chained = table.entries_.find(canonical);
    if (chained != table.entries_.end() && chained->second != canonical) {
      throw Error(ErrorCode::InvalidLexicon, "canonical form '" + canonical + "' of '" + variant +
                                                 "' is itself mapped to '" + chained->second + "'");
    }
  }
  return table;
}

LexiconTable LexiconTable::load(const fs::path& path) {
  std::vector<std::pair<std::string, std::string>> entries;
  for_each_line(path, [&](std::size_t line_no, std::string_view line) {
    if (trim(line).empty() || trim(line).front() == '#') return;
    const auto tab = line.find('\t');
    if (tab == std::string_view::npos) {
      throw Error(ErrorCode::MalformedRecord,
                  path.string() + ":" + std::to_string(line_no) + ": expected variant<TAB>canonical");
    }
    auto variant = trim(line.substr(0, tab));
    auto canonical = trim(line.substr(tab + 1));
    if (variant.empty() || canonical.empty()) {
      throw Error(ErrorCode::MalformedRecord, path.string() + ":" + std::to_string(line_no) + ": empty column");
    }
    entries.emplace_back(std::string(variant), std::string(canonical));
  });
  return from_entries(std::move(entries));
}

const std::string* LexiconTable::lookup(std::string_view variant) const {
  auto it = entries_.find(variant);
  return it == entries_.end() ? nullptr : &it->second;
}

std::vector<std::pair<std::string, std::string>> LexiconTable::entries() const {
  std::vector<std::pair<std::string, std::string>> out(entries_.begin(), entries_.end());
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::string> standardize(std::vector<std::string> tokens, const LexiconTable& lexicon) {
  for (auto& token : tokens) {
    if (const auto* canonical = lexicon.lookup(token)) token = *canonical;
  }
  return tokens;
}

// ---- noise / stemming ------------------------------------------------------

bool NoiseRule::matches(std::string_view token) const {
  std::size_t letters = 0, digits = 0, other = 0, total = 0;
  for (char32_t cp : utf8::decode(token)) {
    ++total;
    if (utf8::is_letter(cp)) {
      ++letters;
    } else if (utf8::is_digit(cp)) {
      ++digits;
    } else {
      ++other;
    }
  }
  switch (kind) {
    case Kind::FewLetters: return letters < limit;
    case Kind::ShortAlnumMix: return letters > 0 && digits > 0 && total < limit;
    case Kind::Symbols: return other > 0;
  }
  return false;
}

std::vector<NoiseRule> default_noise_rules() {
  return {NoiseRule::few_letters(2), NoiseRule::short_alnum_mix(5), NoiseRule::symbols()};
}

std::vector<StemRule> load_stem_rules(const fs::path& path) {
  std::vector<StemRule> rules;
  for_each_line(path, [&](std::size_t line_no, std::string_view line) {
    if (trim(line).empty() || trim(line).front() == '#') return;
    const auto tab = line.find('\t');
    auto suffix = trim(tab == std::string_view::npos ? line : line.substr(0, tab));
    auto replacement = tab == std::string_view::npos ? std::string_view{} : trim(line.substr(tab + 1));
    if (suffix.empty()) {
      throw Error(ErrorCode::MalformedRecord, path.string() + ":" + std::to_string(line_no) + ": empty suffix");
    }
    rules.push_back({std::string(suffix), std::string(replacement)});
  });
  return rules;
}

TermSet load_stopwords(const fs::path& path) {
  TermSet words;
  for_each_line(path, [&](std::size_t, std::string_view line) {
    auto term = trim(strip_comment(line));
    if (!term.empty()) words.emplace(term);
  });
  return words;
}

Stemmer::Stemmer(std::vector<StemRule> rules, std::size_t min_stem_len)
    : rules_(std::move(rules)), min_stem_len_(min_stem_len) {
  std::stable_sort(rules_.begin(), rules_.end(), [](const StemRule& a, const StemRule& b) {
    return utf8::length(a.suffix) > utf8::length(b.suffix);
  });
}

std::string Stemmer::stem(std::string_view token) const {
  for (const auto& rule : rules_) {
    if (token.size() < rule.suffix.size() || !token.ends_with(rule.suffix)) continue;
    auto base = token.substr(0, token.size() - rule.suffix.size());
    if (utf8::length(base) < min_stem_len_) continue;
    std::string out(base);
    out += rule.replacement;
    return out;
  }
  return std::string(token);
}

// ---- normalization / tokenization -----------------------------------------

std::string normalize_text(std::string_view raw, const PipelineConfig& config) {
  const std::u32string cps = utf8::decode(raw);
  std::u32string out;
  out.reserve(cps.size());
  const std::size_t n = cps.size();
  for (std::size_t i = 0; i < n; ++i) {
    char32_t cp = cps[i];
    if (config.rejoin_hyphenation && (cp == '-' || cp == 0xAD || cp == 0xAC) && !out.empty() &&
        utf8::is_letter(out.back())) {
      std::size_t j = i + 1;
      while (j < n && (is_line_space(cps[j]) || utf8::is_control(cps[j]))) ++j;
      if (j < n && cps[j] == '\n') {
        ++j;
        while (j < n && (is_line_space(cps[j]) || utf8::is_control(cps[j]))) ++j;
        if (j < n && utf8::is_letter(cps[j])) {
          i = j - 1;
          continue;
        }
      }
    }
    if (utf8::is_control(cp)) continue;
    if (config.lowercase) cp = utf8::to_lower(cp);
    if (config.strip_diacritics) cp = utf8::strip_diacritic(cp);
    out.push_back(cp);
  }
  return utf8::encode(out);
}

std::vector<std::string> tokenize(std::string_view text, TokenizerMode mode) {
  std::vector<std::string> tokens;
  std::u32string current;
  auto flush = [&] {
    if (!current.empty()) {
      tokens.push_back(utf8::encode(current));
      current.clear();
    }
  };
  for (char32_t cp : utf8::decode(text)) {
    const bool keep = mode == TokenizerMode::Letters ? utf8::is_letter(cp) : !is_separator(cp);
    if (keep) {
      current.push_back(cp);
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

// ---- pipeline --------------------------------------------------------------

namespace {

std::string normalize_term(std::string_view term, const PipelineConfig& config) {
  PipelineConfig plain;
  plain.lowercase = config.lowercase;
  plain.strip_diacritics = config.strip_diacritics;
  plain.rejoin_hyphenation = false;
  return std::string(trim(normalize_text(term, plain)));
}

}  // namespace

Pipeline::Pipeline(PipelineConfig config, LexiconTable lexicon) : config_(std::move(config)) {
  if (config_.min_token_len < 1) throw Error(ErrorCode::InvalidArgument, "min_token_len must be >= 1");

  TermSet stopwords;
  for (const auto& word : config_.stopwords) stopwords.insert(normalize_term(word, config_));
  config_.stopwords = std::move(stopwords);

  for (auto& rule : config_.stemmer_rules) {
    rule.suffix = normalize_term(rule.suffix, config_);
    rule.replacement = normalize_term(rule.replacement, config_);
  }
  stemmer_ = Stemmer(config_.stemmer_rules);
  config_.stemmer_rules = stemmer_.rules();

  auto entries = lexicon.entries();
  for (auto& [variant, canonical] : entries) {
    variant = normalize_term(variant, config_);
    canonical = normalize_term(canonical, config_);
  }
  lexicon_ = LexiconTable::from_entries(std::move(entries));
}

bool Pipeline::is_filtered(std::string_view token) const {
  if (utf8::length(token) < config_.min_token_len) return true;
  if (config_.stopwords.contains(token)) return true;
  return std::any_of(config_.noise_rules.begin(), config_.noise_rules.end(),
                     [&](const NoiseRule& rule) { return rule.matches(token); });
}

std::vector<std::string> Pipeline::process_text(std::string_view raw) const {
  std::vector<std::string> tokens = tokenize(normalize_text(raw, config_), config_.tokenizer);
  std::erase_if(tokens, [&](const std::string& t) { return is_filtered(t); });
  tokens = standardize(std::move(tokens), lexicon_);
  for (auto& token : tokens) token = stemmer_.stem(token);
  std::erase_if(tokens, [&](const std::string& t) { return is_filtered(t); });
  return tokens;
}

Document Pipeline::preprocess(Document doc) const {
  doc.tokens = process_text(doc.raw_text);
  return doc;
}

std::optional<std::string> Pipeline::process_term(std::string_view term) const {
  auto tokens = process_text(term);
  if (tokens.size() != 1) return std::nullopt;
  return std::move(tokens.front());
}

Document preprocess(Document doc, const PipelineConfig& config, const LexiconTable& lexicon) {
  return Pipeline(config, lexicon).preprocess(std::move(doc));
}

void preprocess_corpus(std::vector<Document>& docs, const Pipeline& pipeline, unsigned threads) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(1, docs.size() / 64)));
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) docs[i].tokens = pipeline.process_text(docs[i].raw_text);
  };
  if (threads <= 1) {
    work(0, docs.size());
    return;
  }
  std::vector<std::jthread> pool;
  const std::size_t chunk = (docs.size() + threads - 1) / threads;
  for (std::size_t begin = 0; begin < docs.size(); begin += chunk) {
    pool.emplace_back(work, begin, std::min(docs.size(), begin + chunk));
  }
}

}  // namespace topicnav
