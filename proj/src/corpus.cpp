#include "extentlab/corpus.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "extentlab/errors.hpp"

namespace extentlab {

namespace {

std::string lowercase(std::string_view text) {
  std::string out(text);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string describe_span(int start, int end) {
  return "[" + std::to_string(start) + ", " + std::to_string(end) + ")";
}

}  // namespace

// -- Sentence --------------------------------------------------------------

void validate_sentence(const Sentence& sentence) {
  const int n = sentence.size();
  const int text_size = static_cast<int>(sentence.text.size());
  const std::string where =
      sentence.doc_id + " sentence " + std::to_string(sentence.sent_index);
  if (n == 0) throw IngestError(where + ": no tokens");
  int roots = 0;
  for (int i = 0; i < n; ++i) {
    const Token& token = sentence.tokens[i];
    if (token.index != i) {
      throw IngestError(where + ": token " + std::to_string(i) +
                        " has index " + std::to_string(token.index));
    }
    if (token.char_start < 0 || token.char_start >= token.char_end ||
        token.char_end > text_size) {
      throw IngestError(where + ": token " + std::to_string(i) +
                        " has invalid offsets " +
                        describe_span(token.char_start, token.char_end));
    }
    if (i > 0 && token.char_start < sentence.tokens[i - 1].char_end) {
      throw IngestError(where + ": token offsets not increasing at " +
                        std::to_string(i));
    }
    if (sentence.text.compare(token.char_start,
                              token.char_end - token.char_start,
                              token.text) != 0) {
      throw IngestError(where + ": token " + std::to_string(i) + " text '" +
                        token.text + "' does not match sentence text");
    }
    if (token.head == kRootHead) {
      ++roots;
    } else if (token.head < 0 || token.head >= n || token.head == i) {
      throw IngestError(where + ": token " + std::to_string(i) +
                        " has head " + std::to_string(token.head) +
                        " out of range");
    }
  }
  if (roots != 1) {
    throw IngestError(where + ": expected exactly one root, found " +
                      std::to_string(roots));
  }
  // Every head chain must reach the root within n steps.
  for (int i = 0; i < n; ++i) {
    int node = i;
    int steps = 0;
    while (sentence.tokens[node].head != kRootHead) {
      node = sentence.tokens[node].head;
      if (++steps > n) {
        throw IngestError(where + ": dependency cycle through token " +
                          std::to_string(i));
      }
    }
  }
}

// -- Small vocabularies ----------------------------------------------------

std::string_view to_string(SyntacticClass cls) {
  switch (cls) {
    case SyntacticClass::kNone: return "NONE";
    case SyntacticClass::kPossessive: return "Possessive";
    case SyntacticClass::kPreposition: return "Preposition";
    case SyntacticClass::kPreMod: return "PreMod";
    case SyntacticClass::kCoordination: return "Coordination";
    case SyntacticClass::kFormulaic: return "Formulaic";
    case SyntacticClass::kParticipial: return "Participial";
    case SyntacticClass::kVerbal: return "Verbal";
    case SyntacticClass::kOther: return "Other";
  }
  return "NONE";
}

SyntacticClass syntactic_class_from_string(std::string_view name) {
  std::string key;
  for (char c : name) {
    if (std::isalpha(static_cast<unsigned char>(c))) {
      key += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
  }
  if (key == "possessive") return SyntacticClass::kPossessive;
  if (key == "preposition") return SyntacticClass::kPreposition;
  if (key == "premod" || key == "premodifier") return SyntacticClass::kPreMod;
  if (key == "coordination") return SyntacticClass::kCoordination;
  if (key == "formulaic") return SyntacticClass::kFormulaic;
  if (key == "participial") return SyntacticClass::kParticipial;
  if (key == "verbal") return SyntacticClass::kVerbal;
  if (key == "other") return SyntacticClass::kOther;
  return SyntacticClass::kNone;
}

std::string_view to_string(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kDev: return "dev";
    case Split::kTest: return "test";
  }
  return "train";
}

Split split_from_string(std::string_view name) {
  const std::string key = lowercase(name);
  if (key == "train") return Split::kTrain;
  if (key == "dev" || key == "validation") return Split::kDev;
  if (key == "test") return Split::kTest;
  throw InvalidArgument("unknown split '" + std::string(name) + "'");
}

// -- RelationSample / LabelSet ---------------------------------------------

TokenSet RelationSample::argument_tokens() const {
  TokenSet out;
  for (int i = arg1.start; i < arg1.end; ++i) out.insert(i);
  for (int i = arg2.start; i < arg2.end; ++i) out.insert(i);
  return out;
}

std::string RelationSample::argument_text(const ArgumentSpan& arg) const {
  const auto& tokens = sentence->tokens;
  const int begin = tokens.at(arg.start).char_start;
  const int end = tokens.at(arg.end - 1).char_end;
  return sentence->text.substr(begin, end - begin);
}

LabelSet::LabelSet(std::vector<std::string> labels)
    : labels_(std::move(labels)) {
  if (labels_.empty()) throw InvalidArgument("label set is empty");
  std::set<std::string> seen;
  for (const auto& label : labels_) {
    if (!seen.insert(label).second) {
      throw InvalidArgument("duplicate label '" + label + "'");
    }
  }
}

std::optional<int> LabelSet::index_of(std::string_view label) const {
  for (int i = 0; i < size(); ++i) {
    if (labels_[i] == label) return i;
  }
  return std::nullopt;
}

int LabelSet::require_index(std::string_view label) const {
  if (auto index = index_of(label)) return *index;
  throw ValidationError("label '" + std::string(label) +
                        "' is not in the label set");
}

LabelSet label_set_of(std::span<const RelationSample> samples) {
  std::set<std::string> labels;
  for (const auto& sample : samples) labels.insert(sample.label);
  return LabelSet(std::vector<std::string>(labels.begin(), labels.end()));
}

// -- Ingestion -------------------------------------------------------------

TokenSpan snap_to_tokens(const Sentence& sentence, int char_start,
                         int char_end) {
  const int text_size = static_cast<int>(sentence.text.size());
  if (char_start < 0 || char_end > text_size || char_start >= char_end) {
    throw AlignmentError("span " + describe_span(char_start, char_end) +
                         " outside sentence text of length " +
                         std::to_string(text_size));
  }
  int first = -1;
  int last = -1;
  for (const auto& token : sentence.tokens) {
    if (token.char_end > char_start && token.char_start < char_end) {
      if (first < 0) first = token.index;
      last = token.index;
    }
  }
  if (first < 0) {
    throw AlignmentError("span " + describe_span(char_start, char_end) +
                         " covers no token");
  }
  return {first, last + 1};
}

namespace {

struct RawSentence {
  int doc_start = 0;
  int doc_end = 0;
};

}  // namespace

IngestResult ingest_document(const Json& raw) {
  const std::string context = "standoff record";
  IngestResult result;
  Document& doc = result.document;
  doc.doc_id = required_field<std::string>(raw, "doc_id", context);
  doc.genre = optional_field<std::string>(raw, "genre", "", context);
  const auto text = required_field<std::string>(raw, "text", context);
  const int text_size = static_cast<int>(text.size());
  const auto raw_sentences = required_field<Json>(raw, "sentences", context);
  if (!raw_sentences.is_array()) {
    throw IngestError(context + ": field 'sentences' wrong type");
  }

  std::vector<RawSentence> bounds;
  for (std::size_t s = 0; s < raw_sentences.size(); ++s) {
    const std::string where = context + " sentence " + std::to_string(s);
    const auto raw_tokens =
        required_field<Json>(raw_sentences[s], "tokens", where);
    if (!raw_tokens.is_array() || raw_tokens.empty()) {
      throw IngestError(where + ": field 'tokens' must be a non-empty array");
    }
    RawSentence bound;
    bound.doc_start = required_field<int>(raw_tokens.front(), "start", where);
    bound.doc_end = required_field<int>(raw_tokens.back(), "end", where);
    if (bound.doc_start < 0 || bound.doc_end > text_size ||
        bound.doc_start >= bound.doc_end) {
      throw AlignmentError(where + ": tokens span " +
                           describe_span(bound.doc_start, bound.doc_end) +
                           " outside document text of length " +
                           std::to_string(text_size));
    }
    Sentence sentence;
    sentence.doc_id = doc.doc_id;
    sentence.sent_index = static_cast<int>(s);
    sentence.text = text.substr(bound.doc_start, bound.doc_end - bound.doc_start);
    for (std::size_t t = 0; t < raw_tokens.size(); ++t) {
      const auto& raw_token = raw_tokens[t];
      const std::string token_where = where + " token " + std::to_string(t);
      Token token;
      token.index = static_cast<int>(t);
      const int start = required_field<int>(raw_token, "start", token_where);
      const int end = required_field<int>(raw_token, "end", token_where);
      if (start < bound.doc_start || end > bound.doc_end || start >= end) {
        throw AlignmentError(token_where + ": offsets " +
                             describe_span(start, end) +
                             " outside sentence bounds");
      }
      token.char_start = start - bound.doc_start;
      token.char_end = end - bound.doc_start;
      token.text = optional_field<std::string>(
          raw_token, "text", text.substr(start, end - start), token_where);
      token.pos = required_field<std::string>(raw_token, "pos", token_where);
      token.head = required_field<int>(raw_token, "head", token_where);
      token.deprel =
          optional_field<std::string>(raw_token, "deprel", "", token_where);
      sentence.tokens.push_back(std::move(token));
    }
    validate_sentence(sentence);
    bounds.push_back(bound);
    doc.sentences.push_back(std::move(sentence));
  }

  // Entity mentions carry document-level character offsets.
  std::map<std::string, MentionRef> mention_by_id;
  std::set<std::string> dropped_ids;
  const auto raw_entities =
      optional_field<Json>(raw, "entities", Json::array(), context);
  for (std::size_t e = 0; e < raw_entities.size(); ++e) {
    const std::string where = context + " entity " + std::to_string(e);
    const auto& raw_entity = raw_entities[e];
    const auto type = optional_field<std::string>(raw_entity, "type", "", where);
    const auto subtype =
        optional_field<std::string>(raw_entity, "subtype", "", where);
    const auto mentions = required_field<Json>(raw_entity, "mentions", where);
    EntityCluster cluster;
    for (std::size_t m = 0; m < mentions.size(); ++m) {
      const std::string mention_where = where + " mention " + std::to_string(m);
      const auto& raw_mention = mentions[m];
      const auto id = optional_field<std::string>(
          raw_mention, "id", std::to_string(e) + "-" + std::to_string(m),
          mention_where);
      const int start = required_field<int>(raw_mention, "start", mention_where);
      const int end = required_field<int>(raw_mention, "end", mention_where);
      if (start < 0 || end > text_size || start >= end) {
        throw AlignmentError(mention_where + ": span " +
                             describe_span(start, end) +
                             " outside document text of length " +
                             std::to_string(text_size));
      }
      std::vector<int> hits;
      for (std::size_t s = 0; s < bounds.size(); ++s) {
        if (bounds[s].doc_end > start && bounds[s].doc_start < end) {
          hits.push_back(static_cast<int>(s));
        }
      }
      if (hits.size() != 1) {
        if (hits.empty()) {
          throw AlignmentError(mention_where + ": span " +
                               describe_span(start, end) +
                               " lies outside every sentence");
        }
        ++result.dropped_mentions;
        dropped_ids.insert(id);
        continue;
      }
      const int s = hits.front();
      const Sentence& sentence = doc.sentences[s];
      const TokenSpan span = snap_to_tokens(
          sentence, std::max(start, bounds[s].doc_start) - bounds[s].doc_start,
          std::min(end, bounds[s].doc_end) - bounds[s].doc_start);
      cluster.push_back({s, ArgumentSpan{span.start, span.end, type, subtype}});
      mention_by_id[id] = MentionRef{s, span.start, span.end};
    }
    if (!cluster.empty()) doc.entities.push_back(std::move(cluster));
  }

  const auto raw_relations =
      optional_field<Json>(raw, "relations", Json::array(), context);
  for (std::size_t r = 0; r < raw_relations.size(); ++r) {
    const std::string where = context + " relation " + std::to_string(r);
    const auto& raw_relation = raw_relations[r];
    RelationMention relation;
    relation.label = optional_field<std::string>(raw_relation, "label",
                                                 std::string(kNoLabel), where);
    relation.syntactic_class = syntactic_class_from_string(
        optional_field<std::string>(raw_relation, "syntactic_class", "", where));
    const auto arg1_id = required_field<std::string>(raw_relation, "arg1", where);
    const auto arg2_id = required_field<std::string>(raw_relation, "arg2", where);
    if (dropped_ids.count(arg1_id) || dropped_ids.count(arg2_id)) continue;
    auto arg1 = mention_by_id.find(arg1_id);
    auto arg2 = mention_by_id.find(arg2_id);
    if (arg1 == mention_by_id.end() || arg2 == mention_by_id.end()) {
      throw ConsistencyError(where + ": references unknown entity mention '" +
                             (arg1 == mention_by_id.end() ? arg1_id : arg2_id) +
                             "'");
    }
    relation.arg1 = arg1->second;
    relation.arg2 = arg2->second;
    const auto raw_extent =
        optional_field<Json>(raw_relation, "extent", Json(), where);
    if (raw_extent.is_object() && relation.arg1.sent == relation.arg2.sent) {
      const int s = relation.arg1.sent;
      const int start = required_field<int>(raw_extent, "start", where + " extent");
      const int end = required_field<int>(raw_extent, "end", where + " extent");
      if (start < 0 || end > text_size || start >= end) {
        throw AlignmentError(where + ": extent " + describe_span(start, end) +
                             " outside document text");
      }
      const int clipped_start = std::max(start, bounds[s].doc_start);
      const int clipped_end = std::min(end, bounds[s].doc_end);
      if (clipped_start < clipped_end) {
        relation.extent = snap_to_tokens(doc.sentences[s],
                                         clipped_start - bounds[s].doc_start,
                                         clipped_end - bounds[s].doc_start);
      }
    }
    doc.relations.push_back(relation);
  }
  return result;
}

// -- Samples ---------------------------------------------------------------

namespace {

const EntityMention* find_mention(const Document& doc, const MentionRef& ref) {
  for (const auto& cluster : doc.entities) {
    for (const auto& mention : cluster) {
      if (mention.sent == ref.sent && mention.span.start == ref.start &&
          mention.span.end == ref.end) {
        return &mention;
      }
    }
  }
  return nullptr;
}

}  // namespace

BuildResult build_samples(const Document& doc,
                          std::span<const RelationMention> relations) {
  BuildResult result;
  std::map<int, std::shared_ptr<const Sentence>> shared;
  for (std::size_t r = 0; r < relations.size(); ++r) {
    const RelationMention& relation = relations[r];
    const EntityMention* arg1 = find_mention(doc, relation.arg1);
    const EntityMention* arg2 = find_mention(doc, relation.arg2);
    if (arg1 == nullptr || arg2 == nullptr) {
      const MentionRef& missing = arg1 == nullptr ? relation.arg1 : relation.arg2;
      throw ConsistencyError(
          doc.doc_id + " relation " + std::to_string(r) +
          ": no entity mention at sentence " + std::to_string(missing.sent) +
          " tokens " + describe_span(missing.start, missing.end));
    }
    if (arg1->sent != arg2->sent) {
      ++result.skipped_cross_sentence;
      continue;
    }
    auto& sentence = shared[arg1->sent];
    if (!sentence) {
      sentence = std::make_shared<const Sentence>(doc.sentences.at(arg1->sent));
    }
    RelationSample sample;
    sample.sample_id = doc.doc_id + ":" + std::to_string(r);
    sample.sentence = sentence;
    sample.arg1 = arg1->span;
    sample.arg2 = arg2->span;
    sample.label = relation.label;
    sample.syntactic_class = relation.syntactic_class;
    sample.genre = doc.genre;
    if (relation.extent) {
      // The annotated extent always covers both arguments.
      TokenSpan extent = *relation.extent;
      extent.start = std::min({extent.start, arg1->span.start, arg2->span.start});
      extent.end = std::max({extent.end, arg1->span.end, arg2->span.end});
      sample.extent_span = extent;
    }
    result.samples.push_back(std::move(sample));
  }
  return result;
}

BuildResult build_samples(const Document& doc) {
  return build_samples(doc, doc.relations);
}

RelationSample canonicalize_sample(RelationSample sample) {
  const int n = sample.size();
  for (const ArgumentSpan* arg : {&sample.arg1, &sample.arg2}) {
    if (arg->start < 0 || arg->start >= arg->end || arg->end > n) {
      throw CanonicalizationError(sample.sample_id + ": argument span " +
                                  describe_span(arg->start, arg->end) +
                                  " outside sentence of " + std::to_string(n) +
                                  " tokens");
    }
  }
  if (sample.arg1.span().overlaps(sample.arg2.span())) {
    throw CanonicalizationError(
        sample.sample_id + ": overlapping arguments " +
        describe_span(sample.arg1.start, sample.arg1.end) + " and " +
        describe_span(sample.arg2.start, sample.arg2.end));
  }
  if (sample.arg2.start < sample.arg1.start) {
    std::swap(sample.arg1, sample.arg2);
    sample.swapped = !sample.swapped;
  }
  return sample;
}

CorpusSamples samples_from_corpus(std::span<const Document> docs) {
  CorpusSamples out;
  for (const auto& doc : docs) {
    BuildResult built = build_samples(doc);
    out.skipped_cross_sentence += built.skipped_cross_sentence;
    for (auto& sample : built.samples) {
      try {
        out.samples.push_back(canonicalize_sample(std::move(sample)));
      } catch (const CanonicalizationError&) {
        ++out.rejected_overlapping;
      }
    }
  }
  return out;
}

std::vector<RelationSample> select_split(
    std::span<const RelationSample> samples, const SplitAssignment& splits,
    Split split) {
  std::vector<RelationSample> out;
  for (const auto& sample : samples) {
    auto it = splits.find(sample.sample_id);
    if (it != splits.end() && it->second == split) out.push_back(sample);
  }
  return out;
}

// -- Splitting -------------------------------------------------------------

namespace {

// Largest-remainder apportionment of `total` items over `weights`.
std::array<int, 3> apportion(int total, const std::array<double, 3>& weights) {
  const double weight_sum = weights[0] + weights[1] + weights[2];
  std::array<int, 3> counts{};
  std::array<double, 3> remainders{};
  int assigned = 0;
  for (int k = 0; k < 3; ++k) {
    const double exact = weight_sum > 0 ? total * weights[k] / weight_sum : 0.0;
    counts[k] = static_cast<int>(std::floor(exact + 1e-9));
    remainders[k] = exact - counts[k];
    assigned += counts[k];
  }
  while (assigned < total) {
    int best = 0;
    for (int k = 1; k < 3; ++k) {
      if (remainders[k] > remainders[best] + 1e-12) best = k;
    }
    ++counts[best];
    remainders[best] = -1.0;
    ++assigned;
  }
  return counts;
}

}  // namespace

SplitAssignment split_dataset(std::span<const RelationSample> samples,
                              const std::optional<SplitAssignment>& base_split,
                              SplitRatio ratio, std::uint64_t seed) {
  const std::array<double, 3> weights{ratio.train, ratio.dev, ratio.test};
  for (double w : weights) {
    if (!(w > 0.0)) throw SplitError("split ratios must be positive");
  }
  if (std::abs(weights[0] + weights[1] + weights[2] - 1.0) > 1e-9) {
    throw SplitError("split ratios must sum to 1");
  }

  std::vector<std::string> ids;
  for (const auto& sample : samples) ids.push_back(sample.sample_id);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());

  SplitAssignment assignment;
  std::array<int, 3> base_counts{};
  if (base_split) {
    for (const auto& [id, split] : *base_split) {
      if (!std::binary_search(ids.begin(), ids.end(), id)) {
        throw SplitError("base split references unknown sample '" + id + "'");
      }
      assignment[id] = split;
      ++base_counts[static_cast<int>(split)];
    }
  }

  std::vector<std::string> remaining;
  for (const auto& id : ids) {
    if (!assignment.count(id)) remaining.push_back(id);
  }

  // Fisher-Yates with an explicit draw so the permutation does not depend
  // on the standard library's distribution implementation.
  std::mt19937_64 rng(seed);
  for (std::size_t i = remaining.size(); i > 1; --i) {
    const std::size_t j = rng() % i;
    std::swap(remaining[i - 1], remaining[j]);
  }

  const auto targets = apportion(static_cast<int>(ids.size()), weights);
  std::array<double, 3> deficits{};
  double deficit_sum = 0.0;
  for (int k = 0; k < 3; ++k) {
    deficits[k] = std::max(0, targets[k] - base_counts[k]);
    deficit_sum += deficits[k];
  }
  const auto quotas = apportion(static_cast<int>(remaining.size()),
                                deficit_sum > 0 ? deficits : weights);
  std::size_t next = 0;
  for (int k = 0; k < 3; ++k) {
    for (int c = 0; c < quotas[k]; ++c) {
      assignment[remaining[next++]] = static_cast<Split>(k);
    }
  }
  return assignment;
}

// -- Statistics ------------------------------------------------------------

StatsReport corpus_stats(std::span<const RelationSample> samples) {
  StatsReport report;
  for (const auto& sample : samples) {
    const std::string cls(to_string(sample.syntactic_class));
    ++report.labels[sample.label];
    ++report.syntactic_classes[cls];
    ++report.labels_by_genre[sample.genre][sample.label];
    ++report.syntactic_classes_by_genre[sample.genre][cls];
    ++report.sample_count;
  }
  return report;
}

// -- Serialization ---------------------------------------------------------

Json sentence_to_json(const Sentence& sentence) {
  Json tokens = Json::array();
  for (const auto& token : sentence.tokens) {
    tokens.push_back({{"text", token.text},
                      {"start", token.char_start},
                      {"end", token.char_end},
                      {"pos", token.pos},
                      {"head", token.head},
                      {"deprel", token.deprel}});
  }
  return {{"text", sentence.text}, {"tokens", tokens}};
}

Sentence sentence_from_json(const Json& object, int& unknown_fields) {
  const std::string context = "sentence";
  unknown_fields += count_unknown_keys(object, {"text", "tokens"});
  Sentence sentence;
  sentence.text = required_field<std::string>(object, "text", context);
  const auto tokens = required_field<Json>(object, "tokens", context);
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    const auto& raw = tokens[t];
    unknown_fields += count_unknown_keys(
        raw, {"text", "start", "end", "pos", "head", "deprel"});
    Token token;
    token.index = static_cast<int>(t);
    token.text = required_field<std::string>(raw, "text", "token");
    token.char_start = required_field<int>(raw, "start", "token");
    token.char_end = required_field<int>(raw, "end", "token");
    token.pos = required_field<std::string>(raw, "pos", "token");
    token.head = required_field<int>(raw, "head", "token");
    token.deprel = optional_field<std::string>(raw, "deprel", "", "token");
    sentence.tokens.push_back(std::move(token));
  }
  return sentence;
}

namespace {

Json mention_ref_to_json(const MentionRef& ref) {
  return {{"sent", ref.sent}, {"start", ref.start}, {"end", ref.end}};
}

MentionRef mention_ref_from_json(const Json& object, int& unknown_fields) {
  unknown_fields += count_unknown_keys(object, {"sent", "start", "end"});
  return {required_field<int>(object, "sent", "relation argument"),
          required_field<int>(object, "start", "relation argument"),
          required_field<int>(object, "end", "relation argument")};
}

}  // namespace

Json document_to_json(const Document& doc) {
  Json sentences = Json::array();
  for (const auto& sentence : doc.sentences) {
    sentences.push_back(sentence_to_json(sentence));
  }
  Json entities = Json::array();
  for (const auto& cluster : doc.entities) {
    Json mentions = Json::array();
    for (const auto& mention : cluster) {
      mentions.push_back({{"sent", mention.sent},
                          {"start", mention.span.start},
                          {"end", mention.span.end},
                          {"type", mention.span.entity_type},
                          {"subtype", mention.span.entity_subtype}});
    }
    entities.push_back(mentions);
  }
  Json relations = Json::array();
  for (const auto& relation : doc.relations) {
    Json extent = nullptr;
    if (relation.extent) {
      extent = {{"start", relation.extent->start},
                {"end", relation.extent->end}};
    }
    relations.push_back(
        {{"label", relation.label},
         {"syntactic_class", std::string(to_string(relation.syntactic_class))},
         {"arg1", mention_ref_to_json(relation.arg1)},
         {"arg2", mention_ref_to_json(relation.arg2)},
         {"extent", extent}});
  }
  return {{"schema_version", std::string(kCorpusSchemaVersion)},
          {"doc_id", doc.doc_id},
          {"genre", doc.genre},
          {"sentences", sentences},
          {"entities", entities},
          {"relations", relations}};
}

Document document_from_json(const Json& object, int& unknown_fields) {
  const std::string context = "document";
  const auto version =
      optional_field<std::string>(object, "schema_version", "", context);
  if (version != kCorpusSchemaVersion) {
    throw SchemaVersionError("corpus schema version '" + version +
                             "' is not supported (expected '" +
                             std::string(kCorpusSchemaVersion) + "')");
  }
  unknown_fields += count_unknown_keys(
      object, {"schema_version", "doc_id", "genre", "sentences", "entities",
               "relations"});
  Document doc;
  doc.doc_id = required_field<std::string>(object, "doc_id", context);
  doc.genre = optional_field<std::string>(object, "genre", "", context);
  const auto sentences = required_field<Json>(object, "sentences", context);
  for (std::size_t s = 0; s < sentences.size(); ++s) {
    Sentence sentence = sentence_from_json(sentences[s], unknown_fields);
    sentence.doc_id = doc.doc_id;
    sentence.sent_index = static_cast<int>(s);
    validate_sentence(sentence);
    doc.sentences.push_back(std::move(sentence));
  }
  const auto entities =
      optional_field<Json>(object, "entities", Json::array(), context);
  for (const auto& raw_cluster : entities) {
    EntityCluster cluster;
    for (const auto& raw : raw_cluster) {
      unknown_fields +=
          count_unknown_keys(raw, {"sent", "start", "end", "type", "subtype"});
      EntityMention mention;
      mention.sent = required_field<int>(raw, "sent", "entity mention");
      mention.span.start = required_field<int>(raw, "start", "entity mention");
      mention.span.end = required_field<int>(raw, "end", "entity mention");
      mention.span.entity_type =
          optional_field<std::string>(raw, "type", "", "entity mention");
      mention.span.entity_subtype =
          optional_field<std::string>(raw, "subtype", "", "entity mention");
      if (mention.sent < 0 ||
          mention.sent >= static_cast<int>(doc.sentences.size()) ||
          mention.span.start < 0 || mention.span.start >= mention.span.end ||
          mention.span.end > doc.sentences[mention.sent].size()) {
        throw ConsistencyError(doc.doc_id + ": entity mention out of range");
      }
      cluster.push_back(std::move(mention));
    }
    if (cluster.empty()) {
      throw ConsistencyError(doc.doc_id + ": empty entity cluster");
    }
    doc.entities.push_back(std::move(cluster));
  }
  const auto relations =
      optional_field<Json>(object, "relations", Json::array(), context);
  for (const auto& raw : relations) {
    unknown_fields += count_unknown_keys(
        raw, {"label", "syntactic_class", "arg1", "arg2", "extent"});
    RelationMention relation;
    relation.label = optional_field<std::string>(raw, "label",
                                                 std::string(kNoLabel), "relation");
    relation.syntactic_class = syntactic_class_from_string(
        optional_field<std::string>(raw, "syntactic_class", "", "relation"));
    relation.arg1 = mention_ref_from_json(
        required_field<Json>(raw, "arg1", "relation"), unknown_fields);
    relation.arg2 = mention_ref_from_json(
        required_field<Json>(raw, "arg2", "relation"), unknown_fields);
    const auto extent = optional_field<Json>(raw, "extent", Json(), "relation");
    if (extent.is_object()) {
      unknown_fields += count_unknown_keys(extent, {"start", "end"});
      relation.extent = TokenSpan{required_field<int>(extent, "start", "extent"),
                                  required_field<int>(extent, "end", "extent")};
    }
    doc.relations.push_back(std::move(relation));
  }
  return doc;
}

void save_corpus(const std::filesystem::path& path,
                 std::span<const Document> docs) {
  std::vector<Json> records;
  for (const auto& doc : docs) records.push_back(document_to_json(doc));
  write_file_atomic(path, to_jsonl(records));
}

LoadResult load_corpus_text(std::string_view text) {
  LoadResult result;
  for_each_jsonl_text(text, [&](std::size_t line, const Json& record) {
    try {
      result.documents.push_back(
          document_from_json(record, result.unknown_fields));
    } catch (const SchemaVersionError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError("line " + std::to_string(line) + ": " + e.what(), line);
    }
  });
  return result;
}

LoadResult load_corpus(const std::filesystem::path& path) {
  return load_corpus_text(read_file(path));
}

void save_split(const std::filesystem::path& path,
                const SplitAssignment& splits) {
  std::vector<Json> records;
  for (const auto& [id, split] : splits) {
    records.push_back({{"sample_id", id}, {"split", std::string(to_string(split))}});
  }
  write_file_atomic(path, to_jsonl(records));
}

SplitAssignment load_split(const std::filesystem::path& path) {
  SplitAssignment splits;
  for_each_jsonl(path, [&](std::size_t line, const Json& record) {
    try {
      const auto id = required_field<std::string>(record, "sample_id", "split");
      const auto split = required_field<std::string>(record, "split", "split");
      if (!splits.emplace(id, split_from_string(split)).second) {
        throw SplitError("duplicate sample '" + id + "'");
      }
    } catch (const Error& e) {
      throw ParseError("line " + std::to_string(line) + ": " + e.what(), line);
    }
  });
  return splits;
}

}  // namespace extentlab
