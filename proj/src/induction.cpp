#include "topicnav/induction.hpp"

#include <algorithm>
#include <deque>
#include <numeric>
#include <unordered_set>

#include "topicnav/error.hpp"

namespace topicnav {

void SeedSpec::validate() const {
  if (seeds.empty()) throw Error(ErrorCode::InvalidArgument, "at least one seed is required");
  std::unordered_set<std::string> seen;
  for (const auto& seed : seeds) {
    if (seed.empty()) throw Error(ErrorCode::InvalidArgument, "empty seed");
    if (!seen.insert(seed).second) throw Error(ErrorCode::InvalidArgument, "duplicate seed '" + seed + "'");
  }
  if (k < 1) throw Error(ErrorCode::InvalidArgument, "K must be >= 1");
  if (n_start < 1 || n_start > n_max) throw Error(ErrorCode::InvalidArgument, "require 1 <= n_start <= n_max");
  if (seed_floor && !(*seed_floor >= 0.0)) throw Error(ErrorCode::InvalidArgument, "seed_floor must be >= 0");
}

bool CoverageReport::all_covered() const {
  return std::all_of(seeds.begin(), seeds.end(), [](const SeedCoverage& s) { return s.covered; });
}

double default_seed_floor(const LdaModel& model) {
  double floor = 0.0;
  for (std::size_t m = 0; m < model.n_topics(); ++m) {
    const auto row = model.row(m);
    floor = std::max(floor, *std::min_element(row.begin(), row.end()));
  }
  return floor + 1.0 / (10.0 * static_cast<double>(model.vocab_size()));
}

CoverageReport check_seed_coverage(const LdaModel& model, const Vocabulary& vocab, const SeedSpec& spec) {
  CoverageReport report;
  report.seed_floor = spec.seed_floor ? *spec.seed_floor : default_seed_floor(model);
  for (const auto& seed : spec.seeds) {
    SeedCoverage entry;
    entry.seed = seed;
    entry.term = vocab.find(seed);
    if (entry.term && *entry.term < model.vocab_size()) {
      for (std::size_t m = 0; m < model.n_topics(); ++m) {
        const double w = model.row(m)[*entry.term];
        if (!entry.best_topic || w > entry.max_weight) {
          entry.max_weight = w;
          entry.best_topic = m;
        }
      }
      entry.covered = entry.max_weight >= report.seed_floor;
    }
    report.seeds.push_back(std::move(entry));
  }
  return report;
}

std::vector<TopicGroup> label_topics(const LdaModel& model, const Vocabulary& vocab,
                                     std::span<const std::string> seeds, Aggregation aggregation) {
  if (seeds.empty()) throw Error(ErrorCode::InvalidArgument, "at least one seed is required");
  std::vector<TopicGroup> groups;
  groups.reserve(seeds.size());
  for (const auto& seed : seeds) {
    auto term = vocab.find(seed);
    if (!term || *term >= model.vocab_size()) {
      throw Error(ErrorCode::InvalidArgument, "seed '" + seed + "' is not in the vocabulary");
    }
    TopicGroup group;
    group.seed = seed;
    group.seed_term = *term;
    group.group_weight.assign(model.vocab_size(), 0.0);
    groups.push_back(std::move(group));
  }

  for (std::size_t m = 0; m < model.n_topics(); ++m) {
    const auto row = model.row(m);
    std::size_t best = 0;
    for (std::size_t s = 1; s < groups.size(); ++s) {
      if (row[groups[s].seed_term] > row[groups[best].seed_term]) best = s;
    }
    auto& group = groups[best];
    group.member_topics.push_back(m);
    for (std::size_t t = 0; t < row.size(); ++t) {
      if (aggregation == Aggregation::Sum) {
        group.group_weight[t] += row[t];
      } else {
        group.group_weight[t] = std::max(group.group_weight[t], row[t]);
      }
    }
  }
  return groups;
}

Allocation allocate_signatures(std::span<const TopicGroup> groups, std::size_t k) {
  if (k < 1) throw Error(ErrorCode::InvalidArgument, "K must be >= 1");
  const std::size_t n_groups = groups.size();
  std::size_t vocab_size = 0;
  for (const auto& g : groups) vocab_size = std::max(vocab_size, g.group_weight.size());

  std::vector<bool> assigned(vocab_size, false);
  for (const auto& g : groups) {
    if (g.seed_term >= vocab_size) throw Error(ErrorCode::InvalidArgument, "seed term outside group weights");
    assigned[g.seed_term] = true;
  }

  auto weight = [&](std::size_t g, TermId t) {
    const auto& w = groups[g].group_weight;
    return t < w.size() ? w[t] : 0.0;
  };

  // Preference list per group: positive-weight terms, heaviest first, ties by term id.
  std::vector<std::vector<TermId>> prefs(n_groups);
  std::vector<std::size_t> cursor(n_groups, 0);
  for (std::size_t g = 0; g < n_groups; ++g) {
    const auto& w = groups[g].group_weight;
    for (TermId t = 0; t < w.size(); ++t) {
      if (w[t] > 0.0 && !assigned[t]) prefs[g].push_back(t);
    }
    std::stable_sort(prefs[g].begin(), prefs[g].end(), [&](TermId a, TermId b) { return w[a] > w[b]; });
  }

  Allocation out;
  out.signatures.resize(n_groups);
  out.exhausted.assign(n_groups, false);
  for (std::size_t g = 0; g < n_groups; ++g) out.signatures[g].push_back(groups[g].seed_term);

  auto active = [&](std::size_t g) { return !out.exhausted[g] && out.signatures[g].size() < k; };
  // Moves a group's cursor to its best term that no earlier round has taken.
  auto next_available = [&](std::size_t g) -> std::optional<TermId> {
    while (cursor[g] < prefs[g].size() && assigned[prefs[g][cursor[g]]]) ++cursor[g];
    if (cursor[g] == prefs[g].size()) return std::nullopt;
    return prefs[g][cursor[g]];
  };

  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::vector<std::size_t> holder(vocab_size, kNone);
  while (true) {
    std::deque<std::size_t> pending;
    for (std::size_t g = 0; g < n_groups; ++g) {
      if (active(g)) pending.push_back(g);
    }
    if (pending.empty()) break;

    std::vector<TermId> held;  // terms taken this round
    while (!pending.empty()) {
      const std::size_t g = pending.front();
      pending.pop_front();
      auto term = next_available(g);
      if (!term) {
        out.exhausted[g] = true;
        continue;
      }
      const std::size_t rival = holder[*term];
      if (rival == kNone) {
        holder[*term] = g;
        held.push_back(*term);
        continue;
      }
      const double wg = weight(g, *term), wr = weight(rival, *term);
      const bool challenger_wins = wg > wr || (wg == wr && g < rival);
      const std::size_t loser = challenger_wins ? rival : g;
      if (challenger_wins) holder[*term] = g;
      ++cursor[loser];  // strike the lost term from the loser's pool
      pending.push_back(loser);
    }

    for (TermId term : held) {
      const std::size_t g = holder[term];
      out.signatures[g].push_back(term);
      assigned[term] = true;
      holder[term] = kNone;
    }
  }
  return out;
}

SignatureSet build_signatures(std::span<const TopicGroup> groups, const Vocabulary& vocab, std::size_t k) {
  const Allocation allocation = allocate_signatures(groups, k);
  SignatureSet out;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    InducedTopic topic;
    topic.seed = groups[g].seed;
    topic.member_topics = groups[g].member_topics;
    for (TermId term : allocation.signatures[g]) {
      topic.terms.push_back(term);
      topic.signature.push_back(vocab.term(term));
      topic.weights.push_back(term < groups[g].group_weight.size() ? groups[g].group_weight[term] : 0.0);
    }
    if (allocation.exhausted[g]) {
      SignatureWarning warning;
      warning.seed = groups[g].seed;
      warning.length = topic.signature.size();
      warning.message = groups[g].member_topics.empty()
                            ? "seed labels no LDA topic; signature holds only the seed"
                            : "candidate terms exhausted after " + std::to_string(warning.length) + " of " +
                                  std::to_string(k) + " terms";
      out.warnings.push_back(std::move(warning));
    }
    out.topics.push_back(std::move(topic));
  }
  return out;
}

InductionResult induce_topics(std::span<const Document> docs, const Vocabulary& vocab, const SeedSpec& spec,
                              const LdaConfig& lda_template, const InductionOptions& options) {
  spec.validate();
  const std::size_t n_seeds = spec.seeds.size();

  // A term outside the vocabulary cannot gain weight at any fragmentation.
  for (const auto& seed : spec.seeds) {
    if (!vocab.find(seed)) {
      throw Error(ErrorCode::SeedNeverCovered,
                  "seed '" + seed + "' is not in the index vocabulary (never covered up to n=" +
                      std::to_string(spec.n_max) + ")");
    }
  }

  InductionResult result;
  for (std::size_t n = spec.n_start; n <= spec.n_max; ++n) {
    std::shared_ptr<const LdaModel> model;
    if (n == spec.n_start && options.initial_model && options.initial_model->n_topics() == n * n_seeds &&
        options.initial_model->vocab_size() == vocab.size()) {
      model = options.initial_model;
    } else {
      LdaConfig config = lda_template;
      config.n_topics = n * n_seeds;
      model = std::make_shared<const LdaModel>(fit_lda(docs, vocab, config, options.fit));
    }

    InductionAttempt attempt{n, model->n_topics(), check_seed_coverage(*model, vocab, spec)};
    if (options.on_attempt) options.on_attempt(attempt);
    const bool covered = attempt.coverage.all_covered();
    result.attempts.push_back(std::move(attempt));
    if (!covered) continue;

    const auto groups = label_topics(*model, vocab, spec.seeds, spec.aggregation);
    result.signatures = build_signatures(groups, vocab, spec.k);
    result.final_n = n;
    result.model = std::move(model);
    return result;
  }

  std::string missing;
  for (const auto& s : result.attempts.back().coverage.seeds) {
    if (!s.covered) missing += (missing.empty() ? "'" : ", '") + s.seed + "'";
  }
  throw Error(ErrorCode::SeedNeverCovered,
              "seed " + missing + " never covered up to n=" + std::to_string(spec.n_max));
}

}  // namespace topicnav
