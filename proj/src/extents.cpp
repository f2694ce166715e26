#include "extentlab/extents.hpp"

#include <algorithm>
#include <tuple>

#include "extentlab/errors.hpp"

namespace extentlab {

std::string_view to_string(ExtentMode mode) {
  switch (mode) {
    case ExtentMode::kExpanding: return "expanding";
    case ExtentMode::kReductive: return "reductive";
    case ExtentMode::kHuman: return "human";
  }
  return "expanding";
}

ExtentMode extent_mode_from_string(std::string_view name) {
  if (name == "expanding") return ExtentMode::kExpanding;
  if (name == "reductive") return ExtentMode::kReductive;
  if (name == "human") return ExtentMode::kHuman;
  throw InvalidArgument("unknown extent mode '" + std::string(name) + "'");
}

void ExtentConfig::validate() const {
  if (!(theta >= 0.0 && theta <= 1.0)) {
    throw InvalidArgument("theta must lie in [0, 1]");
  }
  if (beam_width < 1) throw InvalidArgument("beam_width must be at least 1");
  if (max_steps < 0) throw InvalidArgument("max_steps must not be negative");
}

SemanticExtent expanding_extent(const Classifier& classifier,
                                const RelationSample& sample,
                                const PriorityAssignment& priorities,
                                const ExtentConfig& config,
                                std::string decider_id) {
  config.validate();
  const int target = predict_full(classifier, sample).predicted;
  SemanticExtent extent;
  extent.sample_id = sample.sample_id;
  extent.decider_id = decider_id.empty() ? classifier.impl_id() : std::move(decider_id);
  extent.mode = ExtentMode::kExpanding;
  extent.tokens = sample.argument_tokens();
  extent.semantic_class = Stage::kOA;

  for (std::size_t step = 0;; ++step) {
    const PredictionResult result = predict_subset(classifier, sample, extent.tokens);
    extent.predicted = classifier.label_set()[result.predicted];
    extent.confidence = result.confidence;
    extent.threshold_met =
        result.predicted == target && result.confidence > config.theta;
    if (extent.threshold_met || step == priorities.order.size()) return extent;
    const int next = priorities.order[step];
    extent.tokens.insert(next);
    extent.semantic_class = priorities.stage_of(next);
  }
}

namespace {

struct BeamEntry {
  TokenSet tokens;
  double confidence = 0.0;
};

// Smaller first; among equal sizes the more confident candidate, then the
// lexicographically smaller index set.
bool beam_order(const BeamEntry& a, const BeamEntry& b) {
  if (a.tokens.size() != b.tokens.size()) return a.tokens.size() < b.tokens.size();
  if (a.confidence != b.confidence) return a.confidence > b.confidence;
  return a.tokens < b.tokens;
}

}  // namespace

SemanticExtent reductive_extent(const Classifier& classifier,
                                const RelationSample& sample,
                                const PriorityAssignment& priorities,
                                const ExtentConfig& config,
                                std::string decider_id) {
  config.validate();
  if (config.saliency == SaliencyPolicy::kGradientOnly &&
      !classifier.supports_gradients()) {
    throw CapabilityError(classifier.impl_id() +
                          " provides no gradients and occlusion is disabled");
  }
  const PredictionResult full = predict_full(classifier, sample);
  const int target = full.predicted;
  const TokenSet arguments = sample.argument_tokens();
  const int max_steps = config.max_steps > 0 ? config.max_steps : sample.size();
  const std::size_t width = static_cast<std::size_t>(config.beam_width);

  std::optional<SaliencyMethod> method;
  std::vector<BeamEntry> beam{{sample.all_tokens(), full.confidence}};
  for (int step = 0; step < max_steps; ++step) {
    std::vector<BeamEntry> next;
    for (const auto& entry : beam) {
      const TokenSet removable = entry.tokens.minus(arguments);
      if (removable.empty()) continue;
      const SaliencyScores scores =
          saliency(classifier, sample, entry.tokens, target, config.saliency);
      method = scores.method;
      std::vector<std::pair<double, int>> ranked;
      for (int token : removable) ranked.emplace_back(scores.score_of(token), token);
      std::sort(ranked.begin(), ranked.end());
      if (ranked.size() > width) ranked.resize(width);
      for (const auto& [score, token] : ranked) {
        TokenSet reduced = entry.tokens.without(token);
        const bool seen = std::any_of(next.begin(), next.end(), [&](const BeamEntry& e) {
          return e.tokens == reduced;
        });
        if (seen) continue;
        const PredictionResult result = predict_subset(classifier, sample, reduced);
        if (result.predicted == target) {
          next.push_back({std::move(reduced), result.confidence});
        }
      }
    }
    if (next.empty()) break;
    std::sort(next.begin(), next.end(), beam_order);
    if (next.size() > width) next.resize(width);
    beam = std::move(next);
  }

  const BeamEntry& best = *std::min_element(
      beam.begin(), beam.end(), [](const BeamEntry& a, const BeamEntry& b) {
        return std::make_tuple(a.tokens.size(), std::cref(a.tokens)) <
               std::make_tuple(b.tokens.size(), std::cref(b.tokens));
      });
  SemanticExtent extent;
  extent.sample_id = sample.sample_id;
  extent.decider_id = decider_id.empty() ? classifier.impl_id() : std::move(decider_id);
  extent.mode = ExtentMode::kReductive;
  extent.tokens = best.tokens;
  extent.semantic_class = priorities.class_of(best.tokens);
  const PredictionResult result = predict_subset(classifier, sample, best.tokens);
  extent.predicted = classifier.label_set()[result.predicted];
  extent.confidence = result.confidence;
  extent.threshold_met = result.predicted == target;
  extent.saliency = method.value_or(
      classifier.supports_gradients() &&
              config.saliency != SaliencyPolicy::kOcclusionOnly
          ? SaliencyMethod::kGradient
          : SaliencyMethod::kOcclusion);
  return extent;
}

std::vector<ExtentOutcome> extent_batch(
    const Classifier& classifier, std::span<const RelationSample> samples,
    const std::map<std::string, PriorityAssignment>& priorities,
    const ExtentConfig& config, ExtentMode mode, std::string decider_id) {
  if (mode == ExtentMode::kHuman) {
    throw InvalidArgument("human extents come from the annotation service");
  }
  std::vector<ExtentOutcome> outcomes;
  outcomes.reserve(samples.size());
  for (const auto& sample : samples) {
    ExtentOutcome outcome;
    outcome.sample_id = sample.sample_id;
    try {
      auto it = priorities.find(sample.sample_id);
      const PriorityAssignment computed =
          it == priorities.end() ? stage_assignment(sample) : PriorityAssignment{};
      const PriorityAssignment& pa = it == priorities.end() ? computed : it->second;
      outcome.extent =
          mode == ExtentMode::kExpanding
              ? expanding_extent(classifier, sample, pa, config, decider_id)
              : reductive_extent(classifier, sample, pa, config, decider_id);
    } catch (const Error& e) {
      outcome.error_code = e.code();
      outcome.error = e.what();
    } catch (const std::exception& e) {
      outcome.error_code = "internal_error";
      outcome.error = e.what();
    }
    outcomes.push_back(std::move(outcome));
  }
  return outcomes;
}

Json to_json(const SemanticExtent& extent) {
  Json out = {{"sample_id", extent.sample_id},
              {"decider_id", extent.decider_id},
              {"mode", std::string(to_string(extent.mode))},
              {"tokens", extent.tokens.indices()},
              {"semantic_class", std::string(to_string(extent.semantic_class))},
              {"predicted", extent.predicted},
              {"confidence", extent.confidence},
              {"threshold_met", extent.threshold_met}};
  if (extent.saliency) out["saliency"] = std::string(to_string(*extent.saliency));
  return out;
}

SemanticExtent semantic_extent_from_json(const Json& object) {
  const std::string context = "extent";
  SemanticExtent extent;
  extent.sample_id = required_field<std::string>(object, "sample_id", context);
  if (object.contains("annotator_id")) {
    // Annotation store record.
    extent.decider_id = required_field<std::string>(object, "annotator_id", context);
    extent.mode = ExtentMode::kHuman;
    extent.tokens =
        TokenSet(required_field<std::vector<int>>(object, "revealed_tokens", context));
    extent.semantic_class =
        stage_from_string(required_field<std::string>(object, "semantic_class", context));
    extent.predicted = required_field<std::string>(object, "label", context);
    extent.confidence = 1.0;
    extent.threshold_met = true;
    return extent;
  }
  extent.decider_id = required_field<std::string>(object, "decider_id", context);
  extent.mode = extent_mode_from_string(required_field<std::string>(object, "mode", context));
  extent.tokens = TokenSet(required_field<std::vector<int>>(object, "tokens", context));
  extent.semantic_class =
      stage_from_string(required_field<std::string>(object, "semantic_class", context));
  extent.predicted = required_field<std::string>(object, "predicted", context);
  extent.confidence = required_field<double>(object, "confidence", context);
  extent.threshold_met = required_field<bool>(object, "threshold_met", context);
  if (auto it = object.find("saliency"); it != object.end() && it->is_string()) {
    extent.saliency = it->get<std::string>() == "gradient" ? SaliencyMethod::kGradient
                                                           : SaliencyMethod::kOcclusion;
  }
  return extent;
}

void save_extents(const std::filesystem::path& path,
                  std::span<const SemanticExtent> extents) {
  std::vector<Json> records;
  for (const auto& extent : extents) records.push_back(to_json(extent));
  write_file_atomic(path, to_jsonl(records));
}

std::vector<SemanticExtent> load_extents(const std::filesystem::path& path) {
  std::vector<SemanticExtent> extents;
  for_each_jsonl(path, [&](std::size_t line, const Json& record) {
    try {
      extents.push_back(semantic_extent_from_json(record));
    } catch (const Error& e) {
      throw ParseError("line " + std::to_string(line) + ": " + e.what(), line);
    }
  });
  return extents;
}

}  // namespace extentlab
