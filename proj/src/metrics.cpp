#include "extentlab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>

#include "extentlab/errors.hpp"

namespace extentlab {

EvalReport f1_scores(std::span<const std::string> gold,
                     std::span<const std::string> predicted,
                     const LabelSet& labels) {
  if (gold.size() != predicted.size()) {
    throw InvalidArgument("gold and predicted label lists differ in length (" +
                          std::to_string(gold.size()) + " vs " +
                          std::to_string(predicted.size()) + ")");
  }
  std::vector<std::string> order = labels.labels();
  std::set<std::string> extra;
  for (const auto* list : {&gold, &predicted}) {
    for (const auto& label : *list) {
      if (!labels.index_of(label)) extra.insert(label);
    }
  }
  order.insert(order.end(), extra.begin(), extra.end());

  EvalReport report;
  report.count = static_cast<int>(gold.size());
  std::map<std::string, int> true_positive, gold_count, predicted_count;
  int correct = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    ++report.confusion[gold[i]][predicted[i]];
    ++gold_count[gold[i]];
    ++predicted_count[predicted[i]];
    if (gold[i] == predicted[i]) {
      ++true_positive[gold[i]];
      ++correct;
    }
  }
  double macro_sum = 0.0;
  int macro_labels = 0;
  for (const auto& label : order) {
    LabelScores scores;
    scores.label = label;
    const int tp = true_positive[label];
    const int g = gold_count[label];
    const int p = predicted_count[label];
    scores.support = g;
    scores.precision = p > 0 ? static_cast<double>(tp) / p : 0.0;
    scores.recall = g > 0 ? static_cast<double>(tp) / g : 0.0;
    const double denom = scores.precision + scores.recall;
    scores.f1 = denom > 0 ? 2.0 * scores.precision * scores.recall / denom : 0.0;
    if (g + p > 0) {
      macro_sum += scores.f1;
      ++macro_labels;
    }
    report.per_label.push_back(std::move(scores));
  }
  report.micro_f1 = gold.empty() ? 0.0 : static_cast<double>(correct) / gold.size();
  report.macro_f1 = macro_labels > 0 ? macro_sum / macro_labels : 0.0;
  return report;
}

MeanStd mean_std(std::span<const double> values) {
  if (values.empty()) throw InvalidArgument("mean of an empty set");
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(values.size());
  double squares = 0.0;
  for (double v : values) squares += (v - mean) * (v - mean);
  return {mean, std::sqrt(squares / static_cast<double>(values.size()))};
}

namespace {

template <typename MapA, typename MapB>
void require_same_ids(const MapA& a, const MapB& b, std::string_view what) {
  if (a.size() != b.size() ||
      !std::equal(a.begin(), a.end(), b.begin(),
                  [](const auto& x, const auto& y) { return x.first == y.first; })) {
    throw InvalidArgument(std::string(what) + ": sample ids do not match");
  }
  if (a.empty()) throw InvalidArgument(std::string(what) + ": no samples");
}

std::map<std::string, const SemanticExtent*> index_extents(
    std::span<const SemanticExtent> extents, std::string_view what) {
  std::map<std::string, const SemanticExtent*> out;
  for (const auto& extent : extents) {
    if (!out.emplace(extent.sample_id, &extent).second) {
      throw InvalidArgument(std::string(what) + ": duplicate sample '" +
                            extent.sample_id + "'");
    }
  }
  return out;
}

}  // namespace

double label_agreement(const Decisions& a, const Decisions& b) {
  require_same_ids(a, b, "label agreement");
  int same = 0;
  for (const auto& [id, label] : a) {
    if (b.at(id) == label) ++same;
  }
  return static_cast<double>(same) / static_cast<double>(a.size());
}

std::string_view coarse_class(Stage stage) {
  return stage == Stage::kOA || stage == Stage::kAS ? "LOCAL" : "CONTEXT";
}

double semantic_class_agreement(std::span<const SemanticExtent> a,
                                std::span<const SemanticExtent> b,
                                ClassGranularity granularity) {
  const auto left = index_extents(a, "semantic class agreement");
  const auto right = index_extents(b, "semantic class agreement");
  require_same_ids(left, right, "semantic class agreement");
  int same = 0;
  for (const auto& [id, extent] : left) {
    const Stage x = extent->semantic_class;
    const Stage y = right.at(id)->semantic_class;
    const bool equal = granularity == ClassGranularity::kFine
                           ? x == y
                           : coarse_class(x) == coarse_class(y);
    if (equal) ++same;
  }
  return static_cast<double>(same) / static_cast<double>(left.size());
}

MeanStd extent_size_stats(std::span<const SemanticExtent> extents) {
  if (extents.empty()) throw InvalidArgument("extent size of an empty set");
  std::vector<double> sizes;
  for (const auto& extent : extents) sizes.push_back(extent.tokens.size());
  return mean_std(sizes);
}

AgreementReport agreement_report(std::span<const SemanticExtent> a,
                                 std::span<const SemanticExtent> b) {
  AgreementReport report;
  Decisions left, right;
  for (const auto& extent : a) left[extent.sample_id] = extent.predicted;
  for (const auto& extent : b) right[extent.sample_id] = extent.predicted;
  report.label_agreement = label_agreement(left, right);
  report.sc_fine = semantic_class_agreement(a, b, ClassGranularity::kFine);
  report.sc_coarse = semantic_class_agreement(a, b, ClassGranularity::kCoarse);
  report.count = static_cast<int>(left.size());
  std::string name_a = a.front().decider_id;
  std::string name_b = b.front().decider_id;
  if (name_a == name_b) {
    name_a += " (a)";
    name_b += " (b)";
  }
  report.size_by_decider[name_a] = extent_size_stats(a);
  report.size_by_decider[name_b] = extent_size_stats(b);
  return report;
}

ConfidenceTable confidence_breakdown(std::span<const SemanticExtent> extents,
                                     std::span<const PredictionRecord> predictions,
                                     const LabelSet& labels) {
  const auto by_id = index_extents(extents, "confidence breakdown");
  std::map<std::string, const PredictionRecord*> prediction_by_id;
  for (const auto& record : predictions) {
    if (!prediction_by_id.emplace(record.sample_id, &record).second) {
      throw InvalidArgument("confidence breakdown: duplicate prediction for '" +
                            record.sample_id + "'");
    }
  }
  require_same_ids(by_id, prediction_by_id, "confidence breakdown");

  struct Partition {
    std::string_view name;
    std::function<bool(const SemanticExtent&, const PredictionRecord&)> keep;
  };
  const std::vector<Partition> partitions = {
      {kRowComplete, [](const auto&, const auto&) { return true; }},
      {kRowOnlyArguments,
       [](const auto& e, const auto&) { return e.semantic_class == Stage::kOA; }},
      {kRowNonOnlyArguments,
       [](const auto& e, const auto&) { return e.semantic_class != Stage::kOA; }},
      {kRowAllTokens,
       [](const auto& e, const auto& p) { return e.tokens.size() == p.sentence_length; }},
      {kRowNotAllTokens,
       [](const auto& e, const auto& p) { return e.tokens.size() != p.sentence_length; }},
  };

  ConfidenceTable table;
  for (const auto& partition : partitions) {
    BreakdownRow row;
    row.name = partition.name;
    std::vector<double> confidences;
    std::vector<std::string> gold, predicted;
    for (const auto& record : predictions) {
      if (!partition.keep(*by_id.at(record.sample_id), record)) continue;
      confidences.push_back(record.confidence);
      gold.push_back(record.gold);
      predicted.push_back(record.predicted);
    }
    row.count = static_cast<int>(confidences.size());
    if (row.count > 0) {
      row.confidence = mean_std(confidences);
      const EvalReport scores = f1_scores(gold, predicted, labels);
      row.micro_f1 = scores.micro_f1;
      row.macro_f1 = scores.macro_f1;
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::string_view to_string(SampleGroup group) {
  switch (group) {
    case SampleGroup::kLocal: return "local";
    case SampleGroup::kSentenceLevel: return "sentence_level";
    case SampleGroup::kUnknown: return "UNKNOWN";
  }
  return "UNKNOWN";
}

SampleGroup sample_group(SyntacticClass cls) {
  switch (cls) {
    case SyntacticClass::kNone: return SampleGroup::kUnknown;
    case SyntacticClass::kVerbal:
    case SyntacticClass::kOther: return SampleGroup::kSentenceLevel;
    default: return SampleGroup::kLocal;
  }
}

HistogramTable class_histograms(std::span<const SemanticExtent> extents,
                                std::span<const RelationSample> samples) {
  std::map<std::string, SyntacticClass> class_of;
  for (const auto& sample : samples) class_of[sample.sample_id] = sample.syntactic_class;
  HistogramTable table;
  auto ensure_group = [&](SampleGroup group) -> std::map<std::string, int>& {
    auto& counts = table.counts[std::string(to_string(group))];
    for (int s = 0; s < kStageCount; ++s) {
      counts.try_emplace(std::string(to_string(static_cast<Stage>(s))), 0);
    }
    return counts;
  };
  ensure_group(SampleGroup::kLocal);
  ensure_group(SampleGroup::kSentenceLevel);
  for (const auto& extent : extents) {
    auto it = class_of.find(extent.sample_id);
    const SampleGroup group =
        it == class_of.end() ? SampleGroup::kUnknown : sample_group(it->second);
    ++ensure_group(group)[std::string(to_string(extent.semantic_class))];
  }
  return table;
}

void validate_adversarial_group(const AdversarialGroup& group) {
  const std::string arg1 = group.original.argument_text(group.original.arg1);
  const std::string arg2 = group.original.argument_text(group.original.arg2);
  for (const auto& variant : group.variants) {
    if (variant.argument_text(variant.arg1) != arg1 ||
        variant.argument_text(variant.arg2) != arg2) {
      throw ValidationError("group " + group.group_id + ": variant " +
                            variant.sample_id +
                            " changes the argument texts");
    }
  }
}

AdversarialReport adversarial_eval(const Classifier& classifier,
                                   std::span<const AdversarialGroup> groups) {
  AdversarialReport report;
  std::vector<double> accuracies;
  std::vector<double> confidences;
  for (const auto& group : groups) {
    try {
      validate_adversarial_group(group);
      if (group.variants.empty()) {
        throw ValidationError("group " + group.group_id + " has no variants");
      }
    } catch (const Error& e) {
      report.rejected.push_back({group.group_id, e.what()});
      continue;
    }
    GroupResult result;
    result.group_id = group.group_id;
    const int original = predict_full(classifier, group.original).predicted;
    result.original_prediction = classifier.label_set()[original];
    for (const auto& variant : group.variants) {
      const PredictionResult prediction = predict_full(classifier, variant);
      confidences.push_back(prediction.confidence);
      ++result.variants;
      if (prediction.predicted != original) ++result.changed;
    }
    result.accuracy = static_cast<double>(result.changed) / result.variants;
    accuracies.push_back(result.accuracy);
    report.groups.push_back(std::move(result));
  }
  if (!accuracies.empty()) {
    report.accuracy = mean_std(accuracies);
    report.variant_confidence = mean_std(confidences);
  }
  return report;
}

namespace {

RelationSample adversarial_sample(const Json& record, const std::string& sample_id,
                                  const std::string& group_id) {
  const std::string context = "adversarial record " + sample_id;
  auto sentence = std::make_shared<Sentence>();
  sentence->doc_id = group_id;
  sentence->text = required_field<std::string>(record, "text", context);
  int unknown = 0;
  Json sentence_json = {{"text", sentence->text},
                        {"tokens", required_field<Json>(record, "tokens", context)}};
  *sentence = sentence_from_json(sentence_json, unknown);
  sentence->doc_id = group_id;
  validate_sentence(*sentence);

  RelationSample sample;
  sample.sample_id = sample_id;
  for (auto [key, arg] : {std::pair{"arg1_char", &sample.arg1},
                          std::pair{"arg2_char", &sample.arg2}}) {
    const auto span = required_field<std::vector<int>>(record, key, context);
    if (span.size() != 2) throw IngestError(context + ": " + key + " needs two offsets");
    const TokenSpan tokens = snap_to_tokens(*sentence, span[0], span[1]);
    arg->start = tokens.start;
    arg->end = tokens.end;
  }
  sample.sentence = std::move(sentence);
  sample.label = optional_field<std::string>(record, "intended_label",
                                             std::string(kNoLabel), context);
  sample.genre = "adversarial";
  return canonicalize_sample(std::move(sample));
}

}  // namespace

AdversarialLoad load_adversarial_text(std::string_view text) {
  struct Pending {
    std::optional<RelationSample> original;
    std::vector<RelationSample> variants;
    std::string error;
  };
  std::vector<std::string> order;
  std::map<std::string, Pending> pending;
  for_each_jsonl_text(text, [&](std::size_t line, const Json& record) {
    std::string group_id;
    try {
      group_id = required_field<std::string>(record, "group_id", "adversarial record");
    } catch (const Error& e) {
      throw ParseError("line " + std::to_string(line) + ": " + e.what(), line);
    }
    auto [it, inserted] = pending.try_emplace(group_id);
    if (inserted) order.push_back(group_id);
    Pending& group = it->second;
    if (!group.error.empty()) return;
    try {
      const auto role = required_field<std::string>(record, "role", "adversarial record");
      if (role == "original") {
        if (group.original) throw ValidationError("group has two originals");
        group.original = adversarial_sample(record, group_id + ":original", group_id);
      } else if (role == "variant") {
        group.variants.push_back(adversarial_sample(
            record, group_id + ":v" + std::to_string(group.variants.size()), group_id));
      } else {
        throw ValidationError("unknown role '" + role + "'");
      }
    } catch (const Error& e) {
      group.error = "line " + std::to_string(line) + ": " + e.what();
    }
  });

  AdversarialLoad out;
  for (const auto& id : order) {
    Pending& group = pending[id];
    if (group.error.empty() && !group.original) group.error = "group has no original";
    if (group.error.empty() && group.variants.empty()) group.error = "group has no variants";
    if (!group.error.empty()) {
      out.rejected.push_back({id, group.error});
      continue;
    }
    AdversarialGroup loaded{id, std::move(*group.original), std::move(group.variants)};
    try {
      validate_adversarial_group(loaded);
    } catch (const Error& e) {
      out.rejected.push_back({id, e.what()});
      continue;
    }
    out.groups.push_back(std::move(loaded));
  }
  return out;
}

AdversarialLoad load_adversarial(const std::filesystem::path& path) {
  return load_adversarial_text(read_file(path));
}

void save_predictions(const std::filesystem::path& path,
                      std::span<const PredictionRecord> predictions) {
  std::vector<Json> records;
  for (const auto& record : predictions) {
    records.push_back({{"sample_id", record.sample_id},
                       {"gold", record.gold},
                       {"predicted", record.predicted},
                       {"confidence", record.confidence},
                       {"sentence_length", record.sentence_length}});
  }
  write_file_atomic(path, to_jsonl(records));
}

std::vector<PredictionRecord> load_predictions(const std::filesystem::path& path) {
  std::vector<PredictionRecord> out;
  for_each_jsonl(path, [&](std::size_t line, const Json& record) {
    try {
      const std::string context = "prediction";
      out.push_back({required_field<std::string>(record, "sample_id", context),
                     required_field<std::string>(record, "gold", context),
                     required_field<std::string>(record, "predicted", context),
                     required_field<double>(record, "confidence", context),
                     required_field<int>(record, "sentence_length", context)});
    } catch (const Error& e) {
      throw ParseError("line " + std::to_string(line) + ": " + e.what(), line);
    }
  });
  return out;
}

}  // namespace extentlab
