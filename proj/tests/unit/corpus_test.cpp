#include <gtest/gtest.h>

#include "extentlab/corpus.hpp"
#include "extentlab/errors.hpp"
#include "fixtures.hpp"

namespace extentlab {
namespace {

TEST(Ingest, AlignsAndDropsCrossSentenceMentions) {
  const IngestResult result = ingest_document(testing::standoff_document());
  const Document& doc = result.document;
  ASSERT_EQ(doc.sentences.size(), 2u);
  EXPECT_EQ(doc.sentences[1].text, "She lives in Paris.");
  EXPECT_EQ(doc.sentences[1].tokens[3].char_start, 13);
  EXPECT_EQ(result.dropped_mentions, 1);
  ASSERT_EQ(doc.entities.size(), 3u);
  EXPECT_EQ(doc.entities[0].size(), 2u);
  EXPECT_EQ(doc.entities[0][1].sent, 1);
  EXPECT_EQ(doc.entities[0][1].span, (ArgumentSpan{0, 1, "PER", "Individual"}));
  // The relation on the dropped mention disappears with it.
  ASSERT_EQ(doc.relations.size(), 3u);
  EXPECT_EQ(doc.relations[0].extent, (TokenSpan{1, 3}));
  EXPECT_EQ(doc.relations[0].syntactic_class, SyntacticClass::kPreposition);
}

TEST(Ingest, SingleExactEntity) {
  Json raw = testing::standoff_document();
  raw["entities"] = Json::array({{{"type", "ORG"}, {"mentions", {{{"start", 13}, {"end", 16}}}}}});
  raw["relations"] = Json::array();
  const Document doc = ingest_document(raw).document;
  ASSERT_EQ(doc.entities.size(), 1u);
  ASSERT_EQ(doc.entities[0].size(), 1u);
  EXPECT_EQ(doc.entities[0][0].span.span(), (TokenSpan{3, 4}));
}

TEST(Ingest, SnapsOutwardToTokens) {
  const Sentence sentence = make_sentence("s", 0, {{"New", "PROPN", 2, "compound"},
                                                   {"York", "PROPN", 2, "compound"},
                                                   {"City", "PROPN", kRootHead, "root"}});
  // "ork " and "w Yo" by hand: offsets 5..9 touch only York, 2..6 touch New and York.
  EXPECT_EQ(snap_to_tokens(sentence, 5, 9), (TokenSpan{1, 2}));
  EXPECT_EQ(snap_to_tokens(sentence, 2, 6), (TokenSpan{0, 2}));
  EXPECT_EQ(snap_to_tokens(sentence, 0, 13), (TokenSpan{0, 3}));
  EXPECT_THROW(snap_to_tokens(sentence, 10, 20), AlignmentError);
}

TEST(Ingest, Errors) {
  Json raw = testing::standoff_document();
  raw["entities"][1]["mentions"][0]["end"] = 99;
  EXPECT_THROW(ingest_document(raw), AlignmentError);

  raw = testing::standoff_document();
  raw.erase("text");
  try {
    ingest_document(raw);
    FAIL();
  } catch (const IngestError& e) {
    EXPECT_NE(std::string(e.what()).find("'text'"), std::string::npos);
  }

  raw = testing::standoff_document();
  raw["relations"][0]["arg2"] = "nope";
  EXPECT_THROW(ingest_document(raw), ConsistencyError);

  raw = testing::standoff_document();
  raw["sentences"][0]["tokens"][0]["head"] = 0;  // second root gone, cycle
  EXPECT_THROW(ingest_document(raw), IngestError);
}

TEST(Samples, SameSentenceRule) {
  const Document doc = ingest_document(testing::standoff_document()).document;
  const BuildResult built = build_samples(doc);
  ASSERT_EQ(built.samples.size(), 2u);
  EXPECT_EQ(built.skipped_cross_sentence, 1);
  EXPECT_EQ(built.samples.size() + built.skipped_cross_sentence, doc.relations.size());
  EXPECT_EQ(built.samples[0].sample_id, "d1:0");
  EXPECT_EQ(built.samples[1].sample_id, "d1:1");
  EXPECT_EQ(built.samples[0].argument_text(built.samples[0].arg2), "NBC");
  // Extent widened to cover both arguments.
  EXPECT_EQ(built.samples[0].extent_span, (TokenSpan{0, 4}));
}

TEST(Samples, SharedSentence) {
  Document doc = ingest_document(testing::standoff_document()).document;
  doc.relations.push_back(doc.relations[0]);
  doc.relations.back().label = "Other";
  const BuildResult built = build_samples(doc);
  ASSERT_EQ(built.samples.size(), 3u);
  EXPECT_EQ(built.samples[0].sentence.get(), built.samples[2].sentence.get());
}

TEST(Samples, DanglingReference) {
  Document doc = ingest_document(testing::standoff_document()).document;
  doc.relations[0].arg2 = {0, 2, 3};
  EXPECT_THROW(build_samples(doc), ConsistencyError);
}

TEST(Samples, Canonicalize) {
  RelationSample sample = testing::nbc_sample();
  std::swap(sample.arg1, sample.arg2);
  const RelationSample swapped = canonicalize_sample(sample);
  EXPECT_EQ(swapped.arg1.span(), (TokenSpan{0, 1}));
  EXPECT_EQ(swapped.arg2.span(), (TokenSpan{5, 7}));
  EXPECT_TRUE(swapped.swapped);

  const RelationSample same = canonicalize_sample(testing::nbc_sample());
  EXPECT_FALSE(same.swapped);
  EXPECT_EQ(same.arg1, testing::nbc_sample().arg1);

  sample.arg1 = {0, 3, "", ""};
  sample.arg2 = {2, 4, "", ""};
  EXPECT_THROW(canonicalize_sample(sample), CanonicalizationError);
}

std::vector<RelationSample> numbered(int n) {
  std::vector<RelationSample> out;
  for (int i = 0; i < n; ++i) {
    RelationSample sample = testing::nbc_sample();
    sample.sample_id = "s" + std::to_string(i);
    out.push_back(sample);
  }
  return out;
}

TEST(Split, TenSamplesEightOneOne) {
  const auto samples = numbered(10);
  const SplitAssignment a = split_dataset(samples, std::nullopt, {0.8, 0.1, 0.1}, 7);
  const SplitAssignment b = split_dataset(samples, std::nullopt, {0.8, 0.1, 0.1}, 7);
  EXPECT_EQ(a, b);
  std::map<Split, int> counts;
  for (const auto& [id, split] : a) ++counts[split];
  EXPECT_EQ(counts[Split::kTrain], 8);
  EXPECT_EQ(counts[Split::kDev], 1);
  EXPECT_EQ(counts[Split::kTest], 1);
  EXPECT_EQ(a.size(), 10u);
}

TEST(Split, BaseIsKept) {
  const auto samples = numbered(10);
  SplitAssignment base;
  for (int i = 0; i < 10; ++i) base["s" + std::to_string(i)] = i < 5 ? Split::kTest : Split::kTrain;
  EXPECT_EQ(split_dataset(samples, base, {0.8, 0.1, 0.1}, 1), base);

  SplitAssignment partial{{"s0", Split::kDev}};
  const SplitAssignment out = split_dataset(samples, partial, {0.8, 0.1, 0.1}, 1);
  EXPECT_EQ(out.at("s0"), Split::kDev);
  std::map<Split, int> counts;
  for (const auto& [id, split] : out) ++counts[split];
  EXPECT_EQ(counts[Split::kDev], 1);

  SplitAssignment unknown{{"zz", Split::kDev}};
  EXPECT_THROW(split_dataset(samples, unknown, {0.8, 0.1, 0.1}, 1), SplitError);
}

TEST(Split, RatioChecks) {
  const auto samples = numbered(4);
  EXPECT_THROW(split_dataset(samples, std::nullopt, {0.5, 0.5, 0.1}, 1), SplitError);
  EXPECT_THROW(split_dataset(samples, std::nullopt, {1.0, 0.0, 0.0}, 1), SplitError);
}

TEST(Split, SeedChangesAssignment) {
  const auto samples = numbered(50);
  EXPECT_NE(split_dataset(samples, std::nullopt, {0.6, 0.2, 0.2}, 1),
            split_dataset(samples, std::nullopt, {0.6, 0.2, 0.2}, 2));
}

TEST(Stats, CountsAndGenres) {
  auto samples = numbered(3);
  samples[0].label = "Family";
  samples[1].label = "Family";
  samples[2].label = "Employer";
  samples[2].genre = "web";
  const StatsReport report = corpus_stats(samples);
  EXPECT_EQ(report.labels, (Histogram{{"Family", 2}, {"Employer", 1}}));
  EXPECT_EQ(report.labels_by_genre.at("news"), (Histogram{{"Family", 2}}));
  EXPECT_EQ(report.sample_count, 3);
  EXPECT_EQ(corpus_stats({}).labels.size(), 0u);
}

TEST(Stats, GenreHistogramsSumToOverall) {
  SyntheticOptions options;
  options.count = 120;
  const auto docs = synthetic_corpus(options);
  const auto samples = samples_from_corpus(docs).samples;
  const StatsReport report = corpus_stats(samples);
  Histogram summed;
  for (const auto& [genre, histogram] : report.labels_by_genre) {
    for (const auto& [label, count] : histogram) summed[label] += count;
  }
  EXPECT_EQ(summed, report.labels);
  Histogram recount;
  for (const auto& sample : samples) ++recount[sample.label];
  EXPECT_EQ(recount, report.labels);
}

TEST(Serialization, RoundTrip) {
  const Document doc = ingest_document(testing::standoff_document()).document;
  const auto dir = testing::scratch_dir("corpus");
  const std::vector<Document> docs{doc};
  save_corpus(dir / "c.jsonl", docs);
  const LoadResult loaded = load_corpus(dir / "c.jsonl");
  ASSERT_EQ(loaded.documents.size(), 1u);
  EXPECT_EQ(loaded.documents[0], doc);
  EXPECT_EQ(loaded.unknown_fields, 0);

  SplitAssignment splits{{"d1:0", Split::kTrain}, {"d1:1", Split::kTest}};
  save_split(dir / "s.jsonl", splits);
  EXPECT_EQ(load_split(dir / "s.jsonl"), splits);
}

TEST(Serialization, UnknownFieldsAndErrors) {
  const Document doc = ingest_document(testing::standoff_document()).document;
  Json record = document_to_json(doc);
  record["extra"] = 1;
  record["sentences"][0]["tokens"][0]["lemma"] = "he";
  const LoadResult loaded = load_corpus_text(record.dump() + "\n");
  EXPECT_EQ(loaded.unknown_fields, 2);
  EXPECT_EQ(loaded.documents[0], doc);

  const std::string line = document_to_json(doc).dump();
  try {
    load_corpus_text(line + "\n" + line.substr(0, line.size() / 2) + "\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }

  Json versioned = document_to_json(doc);
  versioned["schema_version"] = "99";
  EXPECT_THROW(load_corpus_text(versioned.dump() + "\n"), SchemaVersionError);
}

}  // namespace
}  // namespace extentlab
