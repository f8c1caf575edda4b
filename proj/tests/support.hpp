#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "topicnav/text_pipeline.hpp"

namespace testing {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = fs::temp_directory_path() / ("topicnav-test-" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

inline topicnav::Document doc(std::string id, std::vector<std::string> tokens) {
  topicnav::Document d;
  d.id = std::move(id);
  for (const auto& t : tokens) d.raw_text += (d.raw_text.empty() ? "" : " ") + t;
  d.tokens = std::move(tokens);
  return d;
}

/// Pronounceable lowercase words, all distinct, built from consonant-vowel syllables.
inline std::vector<std::string> synthetic_words(std::size_t count, std::mt19937_64& rng) {
  static const std::string consonants = "bcdfglmnprstvz";
  static const std::string vowels = "aeiou";
  std::vector<std::string> words;
  std::vector<std::string> seen;
  while (words.size() < count) {
    std::string w;
    const std::size_t syllables = 2 + rng() % 2;
    for (std::size_t s = 0; s < syllables; ++s) {
      w += consonants[rng() % consonants.size()];
      w += vowels[rng() % vowels.size()];
    }
    if (std::find(words.begin(), words.end(), w) == words.end()) words.push_back(w);
  }
  return words;
}

/// Documents drawn from planted topics over disjoint word blocks. Each
/// document has a dominant topic; a share of its tokens comes from the others.
struct PlantedCorpus {
  std::vector<std::vector<std::string>> topic_words;  // per topic, most probable first
  std::vector<std::vector<double>> topic_probs;
  std::vector<std::size_t> dominant;
  std::vector<topicnav::Document> docs;

  std::vector<std::string> top_words(std::size_t topic, std::size_t k) const {
    const auto& w = topic_words[topic];
    return {w.begin(), w.begin() + static_cast<std::ptrdiff_t>(std::min(k, w.size()))};
  }
};

struct PlantedOptions {
  std::size_t n_docs = 200;
  std::size_t n_topics = 2;
  std::size_t words_per_topic = 20;
  double zipf_exponent = 1.0;
  double dominant_share = 0.9;
  std::size_t min_len = 20;
  std::size_t max_len = 60;
  /// Fraction of extra noise tokens (OCR junk and garbled letter strings).
  double noise_fraction = 0.0;
  std::vector<std::string> stopwords;
  std::uint64_t seed = 7;
};

inline PlantedCorpus planted_corpus(const PlantedOptions& opt) {
  std::mt19937_64 rng(opt.seed);
  PlantedCorpus c;
  const auto vocab = synthetic_words(opt.n_topics * opt.words_per_topic, rng);
  for (std::size_t t = 0; t < opt.n_topics; ++t) {
    c.topic_words.emplace_back(vocab.begin() + static_cast<std::ptrdiff_t>(t * opt.words_per_topic),
                               vocab.begin() + static_cast<std::ptrdiff_t>((t + 1) * opt.words_per_topic));
    std::vector<double> p(opt.words_per_topic);
    double z = 0;
    for (std::size_t r = 0; r < p.size(); ++r) z += p[r] = 1.0 / std::pow(static_cast<double>(r + 1), opt.zipf_exponent);
    for (auto& x : p) x /= z;
    c.topic_probs.push_back(std::move(p));
  }
  std::vector<std::discrete_distribution<std::size_t>> word_dist;
  for (const auto& p : c.topic_probs) word_dist.emplace_back(p.begin(), p.end());

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> len_dist(opt.min_len, opt.max_len);
  static const std::string junk_chars = "0123456789#@%&*$";
  static const std::string letters = "abcdefghijklmnopqrstuvwxyz";

  for (std::size_t d = 0; d < opt.n_docs; ++d) {
    const std::size_t dom = d % opt.n_topics;
    c.dominant.push_back(dom);
    const std::size_t len = len_dist(rng);
    std::vector<std::string> words;
    for (std::size_t i = 0; i < len; ++i) {
      std::size_t topic = dom;
      if (opt.n_topics > 1 && unit(rng) >= opt.dominant_share) {
        topic = (dom + 1 + rng() % (opt.n_topics - 1)) % opt.n_topics;
      }
      words.push_back(c.topic_words[topic][word_dist[topic](rng)]);
    }
    const auto n_noise = static_cast<std::size_t>(std::round(opt.noise_fraction * static_cast<double>(len)));
    for (std::size_t i = 0; i < n_noise; ++i) {
      std::string junk;
      if (rng() % 2 == 0) {
        // digits and symbols mixed into a short letter run, as OCR leaves them
        const std::size_t n = 3 + rng() % 4;
        for (std::size_t j = 0; j < n; ++j) {
          junk += (j % 2 == 0) ? letters[rng() % letters.size()] : junk_chars[rng() % junk_chars.size()];
        }
      } else {
        const std::size_t n = 4 + rng() % 6;
        for (std::size_t j = 0; j < n; ++j) junk += letters[rng() % letters.size()];
      }
      words.insert(words.begin() + static_cast<std::ptrdiff_t>(rng() % (words.size() + 1)), junk);
    }
    for (const auto& s : opt.stopwords) {
      if (rng() % 2 == 0) words.insert(words.begin() + static_cast<std::ptrdiff_t>(rng() % (words.size() + 1)), s);
    }
    c.docs.push_back(doc("doc" + std::to_string(d), std::move(words)));
  }
  return c;
}

inline void write_jsonl(const fs::path& path, const std::vector<topicnav::Document>& docs) {
  std::ofstream out(path, std::ios::binary);
  for (const auto& d : docs) {
    nlohmann::json j = {{"id", d.id}, {"text", d.raw_text}};
    if (d.date) j["date"] = topicnav::format_iso_date(*d.date);
    out << j.dump() << "\n";
  }
}

}  // namespace testing
