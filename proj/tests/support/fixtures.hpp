#ifndef EXTENTLAB_TESTS_FIXTURES_HPP_
#define EXTENTLAB_TESTS_FIXTURES_HPP_

#include <unistd.h>

#include <filesystem>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "extentlab/corpus.hpp"
#include "extentlab/models.hpp"
#include "extentlab/synthetic.hpp"

namespace extentlab::testing {

// "He had previously worked at NBC Entertainment ."
//   0  1   2          3      4  5   6             7
// Arguments: [0,1) He / PER, [5,7) NBC Entertainment / ORG.
inline std::shared_ptr<const Sentence> nbc_sentence() {
  return std::make_shared<const Sentence>(make_sentence(
      "nbc", 0,
      {{"He", "PRON", 3, "nsubj"},
       {"had", "AUX", 3, "aux"},
       {"previously", "ADV", 3, "advmod"},
       {"worked", "VERB", kRootHead, "root"},
       {"at", "ADP", 6, "case"},
       {"NBC", "PROPN", 6, "compound"},
       {"Entertainment", "PROPN", 3, "obl"},
       {".", "PUNCT", 3, "punct"}}));
}

inline RelationSample nbc_sample() {
  RelationSample sample;
  sample.sample_id = "nbc:0";
  sample.sentence = nbc_sentence();
  sample.arg1 = {0, 1, "PER", "Individual"};
  sample.arg2 = {5, 7, "ORG", "Commercial"};
  sample.label = "Employer";
  sample.syntactic_class = SyntacticClass::kPreposition;
  sample.genre = "news";
  return sample;
}

inline LabelSet nbc_labels() { return LabelSet({"Employer", "Founder", "Located"}); }

// Keyed on "worked": Employer at .9; anything else Located at .4.
inline KeywordClassifier nbc_mock() {
  return KeywordClassifier(nbc_labels(), {{"worked", "Employer", 0.9}}, "Located", 0.4);
}

// "He worked at NBC. She lives in Paris."
inline Json standoff_document() {
  auto token = [](int start, int end, const char* pos, int head, const char* rel) {
    return Json{{"start", start}, {"end", end}, {"pos", pos}, {"head", head}, {"deprel", rel}};
  };
  return {
      {"doc_id", "d1"},
      {"genre", "news"},
      {"text", "He worked at NBC. She lives in Paris."},
      {"sentences",
       {{{"tokens",
          {token(0, 2, "PRON", 1, "nsubj"), token(3, 9, "VERB", -1, "root"),
           token(10, 12, "ADP", 3, "case"), token(13, 16, "PROPN", 1, "obl"),
           token(16, 17, "PUNCT", 1, "punct")}}},
        {{"tokens",
          {token(18, 21, "PRON", 1, "nsubj"), token(22, 27, "VERB", -1, "root"),
           token(28, 30, "ADP", 3, "case"), token(31, 36, "PROPN", 1, "obl"),
           token(36, 37, "PUNCT", 1, "punct")}}}}},
      {"entities",
       {{{"type", "PER"},
         {"subtype", "Individual"},
         {"mentions", {{{"id", "m0"}, {"start", 0}, {"end", 2}},
                       {{"id", "m1"}, {"start", 18}, {"end", 21}}}}},
        {{"type", "ORG"}, {"mentions", {{{"id", "m2"}, {"start", 13}, {"end", 16}}}}},
        {{"type", "GPE"}, {"mentions", {{{"id", "m3"}, {"start", 31}, {"end", 36}}}}},
        {{"type", "ORG"}, {"mentions", {{{"id", "m4"}, {"start", 13}, {"end", 21}}}}}}},
      {"relations",
       {{{"label", "Employer"},
         {"syntactic_class", "Preposition"},
         {"arg1", "m0"},
         {"arg2", "m2"},
         {"extent", {{"start", 3}, {"end", 12}}}},
        {{"label", "Located"}, {"syntactic_class", "Verbal"}, {"arg1", "m1"}, {"arg2", "m3"}},
        {{"label", "Located"}, {"arg1", "m0"}, {"arg2", "m3"}},
        {{"label", "Employer"}, {"arg1", "m1"}, {"arg2", "m4"}}}}};
}

// Random dependency tree over `n` tokens with two disjoint arguments.
struct RandomFixture {
  RelationSample sample;
  std::vector<KeywordRule> rules;
  std::string fallback_label;
  double fallback_confidence = 0.0;
};

inline const std::vector<std::string>& random_labels() {
  static const std::vector<std::string> kLabels = {"A", "B", "C"};
  return kLabels;
}

inline RandomFixture random_fixture(std::mt19937_64& rng, int min_tokens, int max_tokens,
                                    const std::string& id) {
  static const std::vector<std::string> kWords = {"alpha", "beta", "gamma", "delta",
                                                  "eps",   "zeta", "eta",   "theta"};
  static const std::vector<std::string> kTags = {"NOUN", "VERB", "AUX", "ADP",
                                                 "DET",  "ADJ",  "PROPN", "ADV"};
  auto uniform = [&](int lo, int hi) {
    return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
  };
  const int n = uniform(min_tokens, max_tokens);

  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  for (int i = n - 1; i > 0; --i) std::swap(order[i], order[uniform(0, i)]);
  std::vector<TokenSpec> tokens(n);
  for (int i = 0; i < n; ++i) {
    tokens[i].text = kWords[uniform(0, static_cast<int>(kWords.size()) - 1)];
    tokens[i].pos = kTags[uniform(0, static_cast<int>(kTags.size()) - 1)];
    tokens[i].deprel = "dep";
  }
  tokens[order[0]].head = kRootHead;
  tokens[order[0]].deprel = "root";
  for (int k = 1; k < n; ++k) tokens[order[k]].head = order[uniform(0, k - 1)];

  RandomFixture fixture;
  RelationSample& sample = fixture.sample;
  sample.sample_id = id;
  sample.sentence = std::make_shared<const Sentence>(make_sentence(id, 0, tokens));
  const int len1 = uniform(1, std::min(2, n - 1));
  const int start1 = uniform(0, n - len1 - 1);
  const int len2 = uniform(1, std::min(2, n - start1 - len1));
  const int start2 = uniform(start1 + len1, n - len2);
  sample.arg1 = {start1, start1 + len1, "PER", ""};
  sample.arg2 = {start2, start2 + len2, "ORG", ""};
  sample.label = "A";
  if (uniform(0, 3) == 0) {
    const int extent_start = uniform(0, start1);
    const int extent_end = uniform(start2 + len2, n);
    sample.extent_span = TokenSpan{extent_start, extent_end};
  }

  const auto& labels = random_labels();
  const double floor = 1.0 / static_cast<double>(labels.size());
  auto confidence = [&] {
    return floor + 0.01 + (0.99 - floor - 0.01) * static_cast<double>(rng() % 10000) / 9999.0;
  };
  const int rule_count = uniform(1, 4);
  for (int r = 0; r < rule_count; ++r) {
    fixture.rules.push_back({kWords[uniform(0, static_cast<int>(kWords.size()) - 1)],
                             labels[uniform(0, 2)], confidence()});
  }
  fixture.fallback_label = labels[uniform(0, 2)];
  fixture.fallback_confidence = confidence();
  return fixture;
}

inline KeywordClassifier mock_for(const RandomFixture& fixture) {
  return KeywordClassifier(LabelSet(random_labels()), fixture.rules, fixture.fallback_label,
                           fixture.fallback_confidence);
}

// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() /
                   ("extentlab-" + name + "-" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace extentlab::testing

#endif  // EXTENTLAB_TESTS_FIXTURES_HPP_
