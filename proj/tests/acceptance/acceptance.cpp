// One PASS/FAIL line per acceptance criterion. Exit status 1 when any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "extentlab/corpus.hpp"
#include "extentlab/extents.hpp"
#include "extentlab/metrics.hpp"
#include "extentlab/models.hpp"
#include "extentlab/syntax.hpp"
#include "extentlab/synthetic.hpp"
#include "fixtures.hpp"

namespace {

using namespace extentlab;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double value, int digits = 3) {
  std::ostringstream out;
  out.precision(digits);
  out << std::fixed << value;
  return out.str();
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Keyword mock decision computed directly from the rule table.
struct MockDecision {
  std::string label;
  double confidence = 0.0;
};

MockDecision mock_decision(const testing::RandomFixture& fixture, const TokenSet& visible) {
  const Sentence& sentence = *fixture.sample.sentence;
  for (const auto& rule : fixture.rules) {
    for (int i : visible) {
      if (sentence.tokens[i].text == rule.keyword) return {rule.label, rule.confidence};
    }
  }
  return {fixture.fallback_label, fixture.fallback_confidence};
}

std::vector<testing::RandomFixture> fixtures(int count, std::uint64_t seed, int max_tokens) {
  std::mt19937_64 rng(seed);
  std::vector<testing::RandomFixture> out;
  for (int i = 0; i < count; ++i) {
    out.push_back(testing::random_fixture(rng, 3, max_tokens, "f" + std::to_string(i)));
  }
  return out;
}

Outcome expanding_oracle() {
  const auto start = Clock::now();
  const double theta = 0.5;
  int matched = 0;
  const auto cases = fixtures(200, 101, 12);
  for (const auto& fixture : cases) {
    const RelationSample& sample = fixture.sample;
    const PriorityAssignment pa = stage_assignment(sample);
    const KeywordClassifier mock = testing::mock_for(fixture);
    ExtentConfig config;
    config.theta = theta;
    const SemanticExtent got = expanding_extent(mock, sample, pa, config);

    const std::string target = mock_decision(fixture, sample.all_tokens()).label;
    TokenSet tokens = sample.argument_tokens();
    Stage cls = Stage::kOA;
    bool met = false;
    std::size_t step = 0;
    while (true) {
      const MockDecision d = mock_decision(fixture, tokens);
      if (d.label == target && d.confidence > theta) {
        met = true;
        break;
      }
      if (step == pa.order.size()) break;
      tokens.insert(pa.order[step]);
      cls = pa.stages[pa.order[step]];
      ++step;
    }
    matched += got.tokens == tokens && got.semantic_class == cls && got.threshold_met == met;
  }
  const double elapsed = seconds_since(start);
  return {matched == 200 && elapsed < 60,
          std::to_string(matched) + "/200 exact, " + fmt(elapsed, 2) + " s"};
}

// Smallest label-preserving superset of the arguments; lexicographically
// first among equal sizes.
TokenSet brute_force_minimum(const testing::RandomFixture& fixture) {
  const RelationSample& sample = fixture.sample;
  const TokenSet arguments = sample.argument_tokens();
  const std::string target = mock_decision(fixture, sample.all_tokens()).label;
  std::vector<int> context;
  for (int i = 0; i < sample.size(); ++i) {
    if (!arguments.contains(i)) context.push_back(i);
  }
  std::optional<TokenSet> best;
  for (std::uint32_t mask = 0; mask < (1u << context.size()); ++mask) {
    TokenSet candidate = arguments;
    for (std::size_t b = 0; b < context.size(); ++b) {
      if (mask & (1u << b)) candidate.insert(context[b]);
    }
    if (mock_decision(fixture, candidate).label != target) continue;
    if (!best || candidate.size() < best->size() ||
        (candidate.size() == best->size() && candidate < *best)) {
      best = candidate;
    }
  }
  return *best;  // the full sentence always qualifies
}

Outcome reductive_minimality() {
  const auto start = Clock::now();
  int exact = 0, size_match = 0;
  const auto cases = fixtures(200, 101, 12);
  for (const auto& fixture : cases) {
    const KeywordClassifier mock = testing::mock_for(fixture);
    ExtentConfig config;
    config.beam_width = fixture.sample.size();
    const SemanticExtent got =
        reductive_extent(mock, fixture.sample, stage_assignment(fixture.sample), config);
    const TokenSet best = brute_force_minimum(fixture);
    exact += got.tokens == best;
    size_match += got.tokens.size() == best.size();
  }
  const double elapsed = seconds_since(start);
  return {exact >= 190 && size_match == 200 && elapsed < 300,
          "exact " + std::to_string(exact) + "/200, size " + std::to_string(size_match) +
              "/200, " + fmt(elapsed, 2) + " s"};
}

Outcome label_preservation() {
  int preserved = 0;
  const auto cases = fixtures(1000, 202, 14);
  for (const auto& fixture : cases) {
    const KeywordClassifier mock = testing::mock_for(fixture);
    ExtentConfig config;
    config.beam_width = 1 + static_cast<int>(fixture.sample.sample_id.size() % 4);
    const SemanticExtent got =
        reductive_extent(mock, fixture.sample, stage_assignment(fixture.sample), config);
    const int full = predict_full(mock, fixture.sample).predicted;
    preserved += predict_subset(mock, fixture.sample, got.tokens).predicted == full &&
                 got.predicted == mock.label_set()[full];
  }
  return {preserved == 1000, std::to_string(preserved) + "/1000 preserved"};
}

Outcome saliency_gradient() {
  std::mt19937_64 rng(303);
  // Small weights keep the softmax away from saturation, where gradients
  // shrink below the finite-difference noise floor.
  std::normal_distribution<double> normal(0.0, 0.3);
  const auto cases = fixtures(50, 303, 14);
  double worst = 0.0;
  const LabelSet labels(testing::random_labels());
  for (const auto& fixture : cases) {
    BagOfWordsClassifier model(labels);
    for (const char* word : {"alpha", "beta", "gamma", "delta", "eps", "zeta", "eta", "theta",
                             "<e1>", "</e1>", "<e2>", "</e2>"}) {
      Eigen::VectorXd w(labels.size());
      for (int l = 0; l < labels.size(); ++l) w[l] = normal(rng);
      model.set_weight(word, w);
    }
    const RelationSample& sample = fixture.sample;
    const TokenSet visible = sample.all_tokens();
    const EncodedSample encoded = encode_sample(sample, visible);
    const int reference = static_cast<int>(rng() % labels.size());
    const SaliencyScores scores =
        saliency(model, sample, visible, reference, SaliencyPolicy::kGradientOnly);
    const double h = 1e-5;
    for (std::size_t t = 0; t < scores.tokens.size(); ++t) {
      const int position = encoded.position_of(scores.tokens[t]);
      Eigen::VectorXd plus = Eigen::VectorXd::Ones(encoded.tokens.size());
      Eigen::VectorXd minus = plus;
      plus[position] += h;
      minus[position] -= h;
      const double fd =
          std::abs(cross_entropy(model.predict_gated(encoded, plus).distribution, reference) -
                   cross_entropy(model.predict_gated(encoded, minus).distribution, reference)) /
          (2 * h);
      const double scale = std::max({std::abs(fd), std::abs(scores.scores[t]), 1e-8});
      worst = std::max(worst, std::abs(fd - scores.scores[t]) / scale);
    }
  }
  std::ostringstream detail;
  detail << "max relative error " << worst;
  return {worst < 1e-4, detail.str()};
}

std::vector<RelationSample> synthetic_samples(SyntheticKind kind, int count, std::uint64_t seed,
                                              double holdout, const std::string& prefix) {
  SyntheticOptions options;
  options.kind = kind;
  options.count = count;
  options.seed = seed;
  options.holdout_fraction = holdout;
  options.id_prefix = prefix;
  return samples_from_corpus(synthetic_corpus(options)).samples;
}

std::unique_ptr<AttentionClassifier> train_reference(SyntheticKind kind, std::uint64_t seed) {
  const auto train = synthetic_samples(kind, 400, seed, 0.0, "train");
  const auto dev = synthetic_samples(kind, 80, seed + 1, 0.0, "dev");
  auto model = std::make_unique<AttentionClassifier>(LabelSet(synthetic_labels()));
  TrainConfig config;
  config.seed = seed;
  fit(*model, train, dev, config);
  return model;
}

Outcome shortcut_pattern(const Classifier& shortcut) {
  const auto start = Clock::now();
  const auto test =
      synthetic_samples(SyntheticKind::kArgumentDetermined, 300, 71, 0.05, "test");
  int oa = 0;
  std::vector<double> oa_conf, other_conf;
  for (const auto& sample : test) {
    const SemanticExtent extent =
        expanding_extent(shortcut, sample, stage_assignment(sample), ExtentConfig{});
    const double confidence = predict_full(shortcut, sample).confidence;
    if (extent.semantic_class == Stage::kOA) {
      ++oa;
      oa_conf.push_back(confidence);
    } else {
      other_conf.push_back(confidence);
    }
  }
  const double share = static_cast<double>(oa) / test.size();
  const double elapsed = seconds_since(start);
  if (other_conf.empty()) {
    return {false, "OA share " + fmt(share) + ", no non-OA samples to compare"};
  }
  const MeanStd a = mean_std(oa_conf), b = mean_std(other_conf);
  return {share >= 0.9 && a.mean > b.mean && elapsed < 600,
          "OA share " + fmt(share) + ", confidence OA " + fmt(a.mean) + "+-" + fmt(a.std) +
              " vs non-OA " + fmt(b.mean) + "+-" + fmt(b.std)};
}

Outcome context_dependence(const Classifier& shortcut) {
  const auto context_model = train_reference(SyntheticKind::kContextDetermined, 29);
  const auto originals =
      synthetic_samples(SyntheticKind::kContextDetermined, 200, 83, 0.0, "adv-src");
  const auto groups = verb_swap_groups(originals, 40, 3, 89);
  const AdversarialReport context = adversarial_eval(*context_model, groups);
  const AdversarialReport argument = adversarial_eval(shortcut, groups);
  const double c = context.accuracy.mean, s = argument.accuracy.mean;
  return {c >= 0.7 && s <= 0.5 && c > s,
          "context model " + fmt(c) + "+-" + fmt(context.accuracy.std) + ", shortcut model " +
              fmt(s) + "+-" + fmt(argument.accuracy.std)};
}

SemanticExtent sized(const std::string& id, Stage cls, int size) {
  SemanticExtent e;
  e.sample_id = id;
  e.decider_id = "d";
  e.semantic_class = cls;
  e.tokens = TokenSet::range(0, size);
  e.predicted = "A";
  return e;
}

RelationSample tiny(const std::string& id, const std::string& verb) {
  RelationSample sample;
  sample.sample_id = id;
  sample.sentence = std::make_shared<const Sentence>(make_sentence(
      id, 0, {{"Ann", "PROPN", 1, "nsubj"}, {verb, "VERB", kRootHead, "root"},
              {"Bob", "PROPN", 1, "obj"}}));
  sample.arg1 = {0, 1, "PER", ""};
  sample.arg2 = {2, 3, "PER", ""};
  return sample;
}

Outcome metrics_exactness() {
  constexpr double kTol = 1e-9;
  std::vector<std::string> failures;
  auto check = [&](const std::string& what, double got, double want) {
    if (std::abs(got - want) > kTol) failures.push_back(what);
  };

  const std::vector<std::string> gold = {"A", "A", "B", "B"}, pred = {"A", "B", "B", "B"};
  const EvalReport f1 = f1_scores(gold, pred, LabelSet({"A", "B", "C"}));
  check("micro", f1.micro_f1, 0.75);
  check("macro", f1.macro_f1, (2.0 / 3.0 + 0.8) / 2.0);

  check("label agreement",
        label_agreement({{"1", "A"}, {"2", "B"}, {"3", "A"}, {"4", "A"}},
                        {{"1", "A"}, {"2", "B"}, {"3", "A"}, {"4", "B"}}),
        0.75);

  const std::vector<SemanticExtent> a{sized("1", Stage::kOA, 2), sized("2", Stage::kVOP, 2),
                                      sized("3", Stage::kOA, 2)};
  const std::vector<SemanticExtent> b{sized("1", Stage::kAS, 2), sized("2", Stage::kBA, 2),
                                      sized("3", Stage::kVOP, 2)};
  check("sc coarse", semantic_class_agreement(a, b, ClassGranularity::kCoarse), 2.0 / 3.0);
  check("sc fine", semantic_class_agreement(a, b, ClassGranularity::kFine), 0.0);

  const std::vector<SemanticExtent> sizes{sized("1", Stage::kOA, 3), sized("2", Stage::kOA, 5)};
  check("size mean", extent_size_stats(sizes).mean, 4.0);
  check("size std", extent_size_stats(sizes).std, 1.0);

  const std::vector<SemanticExtent> extents{
      sized("s1", Stage::kOA, 3), sized("s2", Stage::kOA, 3), sized("s3", Stage::kVOP, 5),
      sized("s4", Stage::kA, 8),  sized("s5", Stage::kBA, 4), sized("s6", Stage::kOA, 2)};
  const std::vector<PredictionRecord> predictions{
      {"s1", "A", "A", 0.9, 8}, {"s2", "B", "B", 0.8, 3}, {"s3", "A", "B", 0.6, 8},
      {"s4", "B", "B", 0.5, 8}, {"s5", "A", "A", 0.7, 6}, {"s6", "B", "A", 1.0, 9}};
  const ConfidenceTable table = confidence_breakdown(extents, predictions, LabelSet({"A", "B"}));
  const double means[] = {0.75, 0.9, 0.6, 0.65, 0.8};
  const double stds[] = {std::sqrt(0.175 / 6), std::sqrt(0.02 / 3), std::sqrt(0.02 / 3), 0.15,
                         std::sqrt(0.1 / 4)};
  const double micros[] = {4.0 / 6, 2.0 / 3, 2.0 / 3, 1.0, 0.5};
  const double macros[] = {2.0 / 3, 2.0 / 3, 2.0 / 3, 1.0, 1.0 / 3};
  for (int r = 0; r < 5; ++r) {
    const BreakdownRow& row = table.rows[r];
    check(row.name + " mean", row.confidence->mean, means[r]);
    check(row.name + " std", row.confidence->std, stds[r]);
    check(row.name + " micro", *row.micro_f1, micros[r]);
    check(row.name + " macro", *row.macro_f1, macros[r]);
  }

  const KeywordClassifier mock(LabelSet({"A", "B"}), {{"flip", "B", 0.8}}, "A", 0.6);
  const int changes[12] = {0, 1, 2, 3, 4, 4, 2, 1, 0, 3, 2, 2};
  std::vector<AdversarialGroup> groups;
  for (int g = 0; g < 12; ++g) {
    AdversarialGroup group;
    group.group_id = "g" + std::to_string(g);
    group.original = tiny(group.group_id, "met");
    for (int v = 0; v < 4; ++v) {
      group.variants.push_back(
          tiny(group.group_id + "v" + std::to_string(v), v < changes[g] ? "flip" : "saw"));
    }
    groups.push_back(group);
  }
  const AdversarialReport adversarial = adversarial_eval(mock, groups);
  check("adversarial mean", adversarial.accuracy.mean, 0.5);
  check("adversarial std", adversarial.accuracy.std, std::sqrt(1.25 / 12));

  std::string detail = failures.empty() ? "all fixtures within 1e-9" : "mismatch:";
  for (const auto& f : failures) detail += " [" + f + "]";
  return {failures.empty(), detail};
}

Outcome corpus_pipeline() {
  std::vector<std::string> failures;
  const IngestResult ingested = ingest_document(testing::standoff_document());
  const std::vector<Document> docs{ingested.document};
  const auto dir = testing::scratch_dir("acceptance");
  save_corpus(dir / "corpus.jsonl", docs);
  const LoadResult loaded = load_corpus(dir / "corpus.jsonl");
  if (loaded.documents != docs || loaded.unknown_fields != 0) failures.push_back("round trip");

  if (ingested.dropped_mentions != 1) failures.push_back("cross-sentence mention kept");
  const BuildResult built = build_samples(ingested.document);
  if (built.samples.size() != 2 || built.skipped_cross_sentence != 1) {
    failures.push_back("same-sentence rule");
  }
  for (const auto& sample : built.samples) {
    if (sample.arg1.size() == 0 || sample.arg2.size() == 0) failures.push_back("empty argument");
  }

  const auto samples =
      synthetic_samples(SyntheticKind::kArgumentDetermined, 100, 5, 0.0, "split");
  const SplitAssignment first = split_dataset(samples, std::nullopt, {}, 17);
  const SplitAssignment second = split_dataset(samples, std::nullopt, {}, 17);
  if (first != second) failures.push_back("split determinism");

  std::string detail = failures.empty() ? "round trip, same-sentence rule, split determinism"
                                        : "failed:";
  for (const auto& f : failures) detail += " [" + f + "]";
  return {failures.empty(), detail};
}

Outcome nbc() {
  const RelationSample sample = testing::nbc_sample();
  const KeywordClassifier mock = testing::nbc_mock();
  const SemanticExtent extent =
      expanding_extent(mock, sample, stage_assignment(sample), ExtentConfig{});
  std::string words;
  for (int i : extent.tokens) words += (words.empty() ? "" : " ") + sample.sentence->tokens[i].text;
  const bool pass = extent.tokens == TokenSet({0, 3, 4, 5, 6}) &&
                    extent.semantic_class == Stage::kVOP && extent.predicted == "Employer";
  return {pass, "\"" + words + "\" class " + std::string(to_string(extent.semantic_class))};
}

}  // namespace

int main() {
  const auto shortcut = train_reference(SyntheticKind::kArgumentDetermined, 17);
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"expanding-extent oracle equivalence", expanding_oracle},
      {"reductive-extent minimality oracle", reductive_minimality},
      {"label-preservation invariant", label_preservation},
      {"saliency gradient check", saliency_gradient},
      {"shortcut-pattern reproduction", [&] { return shortcut_pattern(*shortcut); }},
      {"context-dependence reproduction", [&] { return context_dependence(*shortcut); }},
      {"metrics exactness", metrics_exactness},
      {"corpus pipeline", corpus_pipeline},
      {"narrative extent on the NBC sentence", nbc},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome outcome;
    try {
      outcome = run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    failed += !outcome.pass;
    std::cout << (outcome.pass ? "PASS " : "FAIL ") << name << ": " << outcome.detail
              << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
