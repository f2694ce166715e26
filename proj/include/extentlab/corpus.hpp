#ifndef EXTENTLAB_CORPUS_HPP_
#define EXTENTLAB_CORPUS_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "extentlab/io.hpp"
#include "extentlab/token_set.hpp"

namespace extentlab {

inline constexpr int kRootHead = -1;
inline constexpr std::string_view kCorpusSchemaVersion = "1";
inline constexpr std::string_view kNoLabel = "NONE";

struct Token {
  int index = 0;
  std::string text;
  int char_start = 0;  // offsets into Sentence::text, half-open
  int char_end = 0;
  std::string pos;     // UPOS-style coarse tag
  int head = kRootHead;
  std::string deprel;

  friend bool operator==(const Token&, const Token&) = default;
};

struct Sentence {
  std::string doc_id;
  int sent_index = 0;
  std::string text;
  std::vector<Token> tokens;

  int size() const { return static_cast<int>(tokens.size()); }

  friend bool operator==(const Sentence&, const Sentence&) = default;
};

// Checks offsets, surface strings and the dependency tree (single root,
// acyclic, heads in range). Throws IngestError describing the first
// violation.
void validate_sentence(const Sentence& sentence);

// Half-open token interval.
struct TokenSpan {
  int start = 0;
  int end = 0;

  int size() const { return end - start; }
  bool contains(int index) const { return start <= index && index < end; }
  bool covers(const TokenSpan& other) const {
    return start <= other.start && other.end <= end;
  }
  bool overlaps(const TokenSpan& other) const {
    return start < other.end && other.start < end;
  }

  friend bool operator==(const TokenSpan&, const TokenSpan&) = default;
};

struct ArgumentSpan {
  int start = 0;
  int end = 0;
  std::string entity_type;
  std::string entity_subtype;

  TokenSpan span() const { return {start, end}; }
  int size() const { return end - start; }
  bool contains(int index) const { return start <= index && index < end; }

  friend bool operator==(const ArgumentSpan&, const ArgumentSpan&) = default;
};

enum class SyntacticClass {
  kNone,
  kPossessive,
  kPreposition,
  kPreMod,
  kCoordination,
  kFormulaic,
  kParticipial,
  kVerbal,
  kOther,
};

std::string_view to_string(SyntacticClass cls);
// Accepts the canonical names case-insensitively plus "PreMod"/"Pre-Modifier"
// style spellings; anything unrecognised maps to kNone.
SyntacticClass syntactic_class_from_string(std::string_view name);

struct RelationSample {
  std::string sample_id;
  std::shared_ptr<const Sentence> sentence;
  ArgumentSpan arg1;
  ArgumentSpan arg2;
  std::string label{kNoLabel};
  SyntacticClass syntactic_class = SyntacticClass::kNone;
  std::optional<TokenSpan> extent_span;
  std::string genre;
  // Set by canonicalize_sample when the arguments were reordered; callers
  // owning directional labels mirror them.
  bool swapped = false;

  int size() const { return sentence ? sentence->size() : 0; }
  TokenSet argument_tokens() const;
  TokenSet all_tokens() const { return TokenSet::range(0, size()); }
  std::string argument_text(const ArgumentSpan& arg) const;
};

struct EntityMention {
  int sent = 0;
  ArgumentSpan span;

  friend bool operator==(const EntityMention&, const EntityMention&) = default;
};

using EntityCluster = std::vector<EntityMention>;

// Reference from a relation mention to an entity mention of the same
// document, by sentence and token span.
struct MentionRef {
  int sent = 0;
  int start = 0;
  int end = 0;

  friend bool operator==(const MentionRef&, const MentionRef&) = default;
};

struct RelationMention {
  std::string label{kNoLabel};
  SyntacticClass syntactic_class = SyntacticClass::kNone;
  MentionRef arg1;
  MentionRef arg2;
  std::optional<TokenSpan> extent;  // token span inside arg1's sentence

  friend bool operator==(const RelationMention&,
                         const RelationMention&) = default;
};

struct Document {
  std::string doc_id;
  std::string genre;
  std::vector<Sentence> sentences;
  std::vector<EntityCluster> entities;
  std::vector<RelationMention> relations;

  friend bool operator==(const Document&, const Document&) = default;
};

class LabelSet {
 public:
  LabelSet() = default;
  // Throws InvalidArgument on duplicates or an empty list.
  explicit LabelSet(std::vector<std::string> labels);

  int size() const { return static_cast<int>(labels_.size()); }
  const std::string& operator[](int index) const { return labels_.at(index); }
  std::optional<int> index_of(std::string_view label) const;
  // Throws ValidationError for labels outside the set.
  int require_index(std::string_view label) const;
  const std::vector<std::string>& labels() const { return labels_; }

  friend bool operator==(const LabelSet&, const LabelSet&) = default;

 private:
  std::vector<std::string> labels_;
};

// Sorted distinct labels of `samples`.
LabelSet label_set_of(std::span<const RelationSample> samples);

enum class Split { kTrain, kDev, kTest };

std::string_view to_string(Split split);
Split split_from_string(std::string_view name);

using SplitAssignment = std::map<std::string, Split>;

struct SplitRatio {
  double train = 0.8;
  double dev = 0.1;
  double test = 0.1;
};

// -- Ingestion -------------------------------------------------------------

struct IngestResult {
  Document document;
  // Entity mentions crossing a sentence boundary; dropped from clusters.
  int dropped_mentions = 0;
};

// Converts a standoff record (document-level character offsets, see
// README) into a token-aligned Document. Character spans snap outward to
// the smallest covering token span.
IngestResult ingest_document(const Json& raw);

// Smallest token span of `sentence` covering [char_start, char_end).
// Throws AlignmentError when the span leaves the sentence text or covers
// no token.
TokenSpan snap_to_tokens(const Sentence& sentence, int char_start,
                         int char_end);

struct BuildResult {
  std::vector<RelationSample> samples;
  int skipped_cross_sentence = 0;
};

// One sample per relation mention whose arguments share a sentence.
// Samples from one sentence share the Sentence object. Sample ids are
// "<doc_id>:<relation index>".
BuildResult build_samples(const Document& doc,
                          std::span<const RelationMention> relations);
BuildResult build_samples(const Document& doc);

// Orders the arguments so arg1 precedes arg2. Throws CanonicalizationError
// for overlapping spans.
RelationSample canonicalize_sample(RelationSample sample);

struct CorpusSamples {
  std::vector<RelationSample> samples;
  int skipped_cross_sentence = 0;
  int rejected_overlapping = 0;
};

// build_samples + canonicalize_sample over a corpus.
CorpusSamples samples_from_corpus(std::span<const Document> docs);

// Keeps the samples assigned to `split`, in input order.
std::vector<RelationSample> select_split(
    std::span<const RelationSample> samples, const SplitAssignment& splits,
    Split split);

SplitAssignment split_dataset(std::span<const RelationSample> samples,
                              const std::optional<SplitAssignment>& base_split,
                              SplitRatio ratio, std::uint64_t seed);

using Histogram = std::map<std::string, int>;

struct StatsReport {
  Histogram labels;
  Histogram syntactic_classes;
  std::map<std::string, Histogram> labels_by_genre;
  std::map<std::string, Histogram> syntactic_classes_by_genre;
  int sample_count = 0;

  friend bool operator==(const StatsReport&, const StatsReport&) = default;
};

StatsReport corpus_stats(std::span<const RelationSample> samples);

// -- Serialization ---------------------------------------------------------

Json document_to_json(const Document& doc);
// `unknown_fields` is incremented once per unrecognised key at any level.
Document document_from_json(const Json& object, int& unknown_fields);

struct LoadResult {
  std::vector<Document> documents;
  int unknown_fields = 0;
};

void save_corpus(const std::filesystem::path& path,
                 std::span<const Document> docs);
LoadResult load_corpus(const std::filesystem::path& path);
LoadResult load_corpus_text(std::string_view text);

void save_split(const std::filesystem::path& path,
                const SplitAssignment& splits);
SplitAssignment load_split(const std::filesystem::path& path);

Json sentence_to_json(const Sentence& sentence);
Sentence sentence_from_json(const Json& object, int& unknown_fields);

}  // namespace extentlab

#endif  // EXTENTLAB_CORPUS_HPP_
