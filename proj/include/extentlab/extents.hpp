#ifndef EXTENTLAB_EXTENTS_HPP_
#define EXTENTLAB_EXTENTS_HPP_

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "extentlab/classifier.hpp"
#include "extentlab/corpus.hpp"
#include "extentlab/syntax.hpp"
#include "extentlab/token_set.hpp"

namespace extentlab {

enum class ExtentMode { kExpanding, kReductive, kHuman };

std::string_view to_string(ExtentMode mode);
ExtentMode extent_mode_from_string(std::string_view name);

struct ExtentConfig {
  double theta = 0.5;
  int beam_width = 3;
  int max_steps = 0;  // 0: sentence length
  SaliencyPolicy saliency = SaliencyPolicy::kGradientOrOcclusion;

  // Throws InvalidArgument when theta leaves [0, 1] or beam_width < 1.
  void validate() const;
};

struct SemanticExtent {
  std::string sample_id;
  std::string decider_id;
  TokenSet tokens;
  Stage semantic_class = Stage::kOA;
  std::string predicted;
  double confidence = 0.0;
  ExtentMode mode = ExtentMode::kExpanding;
  bool threshold_met = false;
  // Set for reductive extents.
  std::optional<SaliencyMethod> saliency;

  friend bool operator==(const SemanticExtent&, const SemanticExtent&) = default;
};

// Grows the argument-only candidate along the expansion order until the
// prediction equals the full-sentence label with confidence > theta.
SemanticExtent expanding_extent(const Classifier& classifier,
                                const RelationSample& sample,
                                const PriorityAssignment& priorities,
                                const ExtentConfig& config,
                                std::string decider_id = {});

// Saliency-guided beam search that removes non-argument tokens while the
// prediction keeps the full-sentence label.
SemanticExtent reductive_extent(const Classifier& classifier,
                                const RelationSample& sample,
                                const PriorityAssignment& priorities,
                                const ExtentConfig& config,
                                std::string decider_id = {});

struct ExtentOutcome {
  std::string sample_id;
  std::optional<SemanticExtent> extent;
  std::string error_code;
  std::string error;
};

// Item-wise extents in input order. Per-sample failures become error
// outcomes. Priorities missing from `priorities` are computed.
std::vector<ExtentOutcome> extent_batch(
    const Classifier& classifier, std::span<const RelationSample> samples,
    const std::map<std::string, PriorityAssignment>& priorities,
    const ExtentConfig& config, ExtentMode mode, std::string decider_id = {});

Json to_json(const SemanticExtent& extent);
SemanticExtent semantic_extent_from_json(const Json& object);

void save_extents(const std::filesystem::path& path,
                  std::span<const SemanticExtent> extents);
// Reads extent records; annotation records (with "annotator_id") are read
// as human extents.
std::vector<SemanticExtent> load_extents(const std::filesystem::path& path);

}  // namespace extentlab

#endif  // EXTENTLAB_EXTENTS_HPP_
