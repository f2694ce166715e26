#ifndef EXTENTLAB_METRICS_HPP_
#define EXTENTLAB_METRICS_HPP_

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "extentlab/classifier.hpp"
#include "extentlab/corpus.hpp"
#include "extentlab/extents.hpp"

namespace extentlab {

inline constexpr std::string_view kRejectLabel = "REJECT";

struct LabelScores {
  std::string label;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  int support = 0;  // gold count

  friend bool operator==(const LabelScores&, const LabelScores&) = default;
};

struct EvalReport {
  std::vector<LabelScores> per_label;  // label-set order
  double micro_f1 = 0.0;
  double macro_f1 = 0.0;
  // confusion[gold][predicted]
  std::map<std::string, std::map<std::string, int>> confusion;
  int count = 0;

  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

// Single-label micro/macro F1. The macro mean runs over the labels that
// occur in gold or predictions. Throws InvalidArgument on length mismatch.
EvalReport f1_scores(std::span<const std::string> gold,
                     std::span<const std::string> predicted,
                     const LabelSet& labels);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population

  friend bool operator==(const MeanStd&, const MeanStd&) = default;
};

// Throws InvalidArgument for an empty input.
MeanStd mean_std(std::span<const double> values);

using Decisions = std::map<std::string, std::string>;  // sample_id -> label

// Fraction of samples with identical labels (REJECT is a label). Both
// sides must cover the same sample ids.
double label_agreement(const Decisions& a, const Decisions& b);

enum class ClassGranularity { kFine, kCoarse };

// Coarse classes: {OA, AS} are local, everything else is context.
std::string_view coarse_class(Stage stage);

double semantic_class_agreement(std::span<const SemanticExtent> a,
                                std::span<const SemanticExtent> b,
                                ClassGranularity granularity);

MeanStd extent_size_stats(std::span<const SemanticExtent> extents);

struct AgreementReport {
  double label_agreement = 0.0;
  double sc_coarse = 0.0;
  double sc_fine = 0.0;
  std::map<std::string, MeanStd> size_by_decider;
  int count = 0;

  friend bool operator==(const AgreementReport&, const AgreementReport&) = default;
};

AgreementReport agreement_report(std::span<const SemanticExtent> a,
                                 std::span<const SemanticExtent> b);

// Full-sentence decision for one sample.
struct PredictionRecord {
  std::string sample_id;
  std::string gold;
  std::string predicted;
  double confidence = 0.0;
  int sentence_length = 0;

  friend bool operator==(const PredictionRecord&, const PredictionRecord&) = default;
};

struct BreakdownRow {
  std::string name;
  int count = 0;
  std::optional<MeanStd> confidence;  // empty partition: no stats
  std::optional<double> micro_f1;
  std::optional<double> macro_f1;

  friend bool operator==(const BreakdownRow&, const BreakdownRow&) = default;
};

struct ConfidenceTable {
  std::vector<BreakdownRow> rows;

  friend bool operator==(const ConfidenceTable&, const ConfidenceTable&) = default;
};

inline constexpr std::string_view kRowComplete = "Complete dataset";
inline constexpr std::string_view kRowOnlyArguments = "Only Arguments";
inline constexpr std::string_view kRowNonOnlyArguments = "Non-Only Arguments";
inline constexpr std::string_view kRowAllTokens = "All tokens in extent";
inline constexpr std::string_view kRowNotAllTokens = "Not all tokens in extent";

// Rows: complete dataset, class OA, class != OA, extent == full sentence,
// extent != full sentence. Throws InvalidArgument when ids do not align.
ConfidenceTable confidence_breakdown(std::span<const SemanticExtent> extents,
                                     std::span<const PredictionRecord> predictions,
                                     const LabelSet& labels);

enum class SampleGroup { kLocal, kSentenceLevel, kUnknown };

std::string_view to_string(SampleGroup group);
SampleGroup sample_group(SyntacticClass cls);

struct HistogramTable {
  // group -> semantic class -> count; every class listed for every group.
  std::map<std::string, std::map<std::string, int>> counts;

  friend bool operator==(const HistogramTable&, const HistogramTable&) = default;
};

// Semantic-class counts per local / sentence-level / UNKNOWN group.
HistogramTable class_histograms(std::span<const SemanticExtent> extents,
                                std::span<const RelationSample> samples);

struct AdversarialGroup {
  std::string group_id;
  RelationSample original;
  std::vector<RelationSample> variants;
};

struct GroupResult {
  std::string group_id;
  std::string original_prediction;
  int variants = 0;
  int changed = 0;
  double accuracy = 0.0;

  friend bool operator==(const GroupResult&, const GroupResult&) = default;
};

struct GroupError {
  std::string group_id;
  std::string message;

  friend bool operator==(const GroupError&, const GroupError&) = default;
};

struct AdversarialReport {
  std::vector<GroupResult> groups;
  MeanStd accuracy;
  MeanStd variant_confidence;
  std::vector<GroupError> rejected;

  friend bool operator==(const AdversarialReport&, const AdversarialReport&) = default;
};

// Checks that every variant repeats the original's argument surface
// strings. Throws ValidationError otherwise.
void validate_adversarial_group(const AdversarialGroup& group);

// A variant counts as correct when its prediction differs from the
// prediction on the group's original. Accuracy is aggregated per group and
// then across groups.
AdversarialReport adversarial_eval(const Classifier& classifier,
                                   std::span<const AdversarialGroup> groups);

struct AdversarialLoad {
  std::vector<AdversarialGroup> groups;
  std::vector<GroupError> rejected;
};

// Adversarial JSON Lines file. Groups whose records do not parse or align
// are rejected with an error record.
AdversarialLoad load_adversarial(const std::filesystem::path& path);
AdversarialLoad load_adversarial_text(std::string_view text);

void save_predictions(const std::filesystem::path& path,
                      std::span<const PredictionRecord> predictions);
std::vector<PredictionRecord> load_predictions(const std::filesystem::path& path);

}  // namespace extentlab

#endif  // EXTENTLAB_METRICS_HPP_
