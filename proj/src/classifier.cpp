#include "extentlab/classifier.hpp"

#include <numeric>
#include <random>

#include "extentlab/errors.hpp"
#include "extentlab/models.hpp"

namespace extentlab {

// -- Encoding --------------------------------------------------------------

int EncodedSample::position_of(int source) const {
  for (int i = 0; i < static_cast<int>(tokens.size()); ++i) {
    if (tokens[i].source == source) return i;
  }
  return -1;
}

TokenSet EncodedSample::visible() const {
  std::vector<int> sources;
  for (const auto& token : tokens) {
    if (token.source >= 0) sources.push_back(token.source);
  }
  return TokenSet(sources);
}

EncodedSample encode_sample(const RelationSample& sample,
                            const TokenSet& visible) {
  const int n = sample.size();
  for (int token : visible) {
    if (token < 0 || token >= n) {
      throw ContractError(sample.sample_id + ": visible token " +
                          std::to_string(token) + " outside sentence");
    }
  }
  for (int token : sample.argument_tokens()) {
    if (!visible.contains(token)) {
      throw ContractError(sample.sample_id + ": argument token " +
                          std::to_string(token) + " is not visible");
    }
  }
  EncodedSample encoded;
  auto marker = [&](std::string_view text) {
    encoded.tokens.push_back({std::string(text), -1, TokenRole::kMarker});
  };
  for (int token : visible) {
    const bool in_arg1 = sample.arg1.contains(token);
    const bool in_arg2 = sample.arg2.contains(token);
    if (in_arg1 && token == sample.arg1.start) marker(kArg1Begin);
    if (in_arg2 && token == sample.arg2.start) marker(kArg2Begin);
    const TokenRole role = in_arg1   ? TokenRole::kArg1
                           : in_arg2 ? TokenRole::kArg2
                                     : TokenRole::kContext;
    encoded.tokens.push_back({sample.sentence->tokens[token].text, token, role});
    if (in_arg1 && token == sample.arg1.end - 1) marker(kArg1End);
    if (in_arg2 && token == sample.arg2.end - 1) marker(kArg2End);
  }
  return encoded;
}

// -- Results ---------------------------------------------------------------

PredictionResult PredictionResult::from_distribution(
    Eigen::VectorXd distribution) {
  PredictionResult result;
  result.predicted = argmax(distribution);
  result.confidence = distribution(result.predicted);
  result.distribution = std::move(distribution);
  return result;
}

std::string_view to_string(SaliencyMethod method) {
  return method == SaliencyMethod::kGradient ? "gradient" : "occlusion";
}

double SaliencyScores::score_of(int token) const {
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i] == token) return scores[i];
  }
  throw InvalidArgument("token " + std::to_string(token) + " has no score");
}

TrainConfig TrainConfig::from_json(const Json& object) {
  TrainConfig config;
  config.seed = optional_field<std::uint64_t>(object, "seed", config.seed, "train config");
  config.epochs = optional_field<int>(object, "epochs", config.epochs, "train config");
  config.patience =
      optional_field<int>(object, "patience", config.patience, "train config");
  config.batch_size =
      optional_field<int>(object, "batch_size", config.batch_size, "train config");
  config.learning_rate = optional_field<double>(
      object, "learning_rate", config.learning_rate, "train config");
  if (config.epochs < 1 || config.patience < 1 || config.batch_size < 1 ||
      !(config.learning_rate > 0.0)) {
    throw InvalidArgument("train config values must be positive");
  }
  return config;
}

Json TrainConfig::to_json() const {
  return {{"seed", seed},
          {"epochs", epochs},
          {"patience", patience},
          {"batch_size", batch_size},
          {"learning_rate", learning_rate}};
}

Json TrainingReport::to_json() const {
  Json epoch_rows = Json::array();
  for (const auto& epoch : epochs) {
    epoch_rows.push_back({{"epoch", epoch.epoch},
                          {"train_loss", epoch.train_loss},
                          {"dev_micro_f1", epoch.dev_micro_f1}});
  }
  return {{"epochs", epoch_rows},
          {"best_epoch", best_epoch},
          {"best_dev_micro_f1", best_dev_micro_f1},
          {"early_stopped", early_stopped},
          {"seed", seed}};
}

std::vector<double> Classifier::input_gradient_norms(const EncodedSample&,
                                                     int) const {
  throw CapabilityError(impl_id() + " does not provide gradients");
}

// -- Contract operations ---------------------------------------------------

namespace {

double accuracy(const Classifier& classifier,
                std::span<const EncodedSample> encoded,
                std::span<const int> gold) {
  if (encoded.empty()) return 0.0;
  int correct = 0;
  for (std::size_t i = 0; i < encoded.size(); ++i) {
    if (classifier.predict(encoded[i]).predicted == gold[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(encoded.size());
}

void encode_all(const Classifier& classifier,
                std::span<const RelationSample> samples,
                std::vector<EncodedSample>& encoded, std::vector<int>& gold) {
  for (const auto& sample : samples) {
    gold.push_back(classifier.label_set().require_index(sample.label));
    encoded.push_back(encode_sample(sample, sample.all_tokens()));
  }
}

}  // namespace

TrainingReport fit(TrainableClassifier& classifier,
                   std::span<const RelationSample> train,
                   std::span<const RelationSample> dev,
                   const TrainConfig& config) {
  if (train.empty()) throw InvalidArgument("training set is empty");
  std::vector<EncodedSample> train_encoded;
  std::vector<int> train_gold;
  std::vector<EncodedSample> dev_encoded;
  std::vector<int> dev_gold;
  encode_all(classifier, train, train_encoded, train_gold);
  encode_all(classifier, dev, dev_encoded, dev_gold);
  if (dev_encoded.empty()) {
    dev_encoded = train_encoded;
    dev_gold = train_gold;
  }

  TrainingReport report;
  report.seed = config.seed;
  classifier.initialize(train_encoded, config);
  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(train_encoded.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  Json best_parameters = classifier.parameters();
  double best_f1 = -1.0;
  int stale = 0;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[rng() % i]);
    }
    EpochReport row;
    row.epoch = epoch;
    row.train_loss =
        classifier.train_epoch(train_encoded, train_gold, order, config);
    row.dev_micro_f1 = accuracy(classifier, dev_encoded, dev_gold);
    report.epochs.push_back(row);
    if (row.dev_micro_f1 > best_f1) {
      best_f1 = row.dev_micro_f1;
      report.best_epoch = epoch;
      best_parameters = classifier.parameters();
      stale = 0;
    } else if (++stale >= config.patience) {
      report.early_stopped = epoch < config.epochs;
      break;
    }
  }
  classifier.set_parameters(best_parameters);
  report.best_dev_micro_f1 = std::max(best_f1, 0.0);
  return report;
}

PredictionResult predict_subset(const Classifier& classifier,
                                const RelationSample& sample,
                                const TokenSet& visible) {
  return classifier.predict(encode_sample(sample, visible));
}

PredictionResult predict_full(const Classifier& classifier,
                              const RelationSample& sample) {
  return predict_subset(classifier, sample, sample.all_tokens());
}

std::vector<int> top_k_labels(const Classifier& classifier,
                              const RelationSample& sample, int k) {
  if (k < 1) throw InvalidArgument("k must be at least 1");
  const PredictionResult result = predict_full(classifier, sample);
  std::vector<int> order(result.distribution.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return result.distribution(a) > result.distribution(b);
  });
  order.resize(std::min<std::size_t>(order.size(), static_cast<std::size_t>(k)));
  return order;
}

SaliencyScores saliency(const Classifier& classifier,
                        const RelationSample& sample, const TokenSet& visible,
                        int reference, SaliencyPolicy policy) {
  if (reference < 0 || reference >= classifier.label_set().size()) {
    throw InvalidArgument("reference label index " + std::to_string(reference) +
                          " outside label set");
  }
  const EncodedSample encoded = encode_sample(sample, visible);
  SaliencyScores out;
  const bool use_gradient =
      policy != SaliencyPolicy::kOcclusionOnly && classifier.supports_gradients();
  if (policy == SaliencyPolicy::kGradientOnly && !use_gradient) {
    throw CapabilityError(classifier.impl_id() + " does not provide gradients");
  }
  if (use_gradient) {
    const auto norms = classifier.input_gradient_norms(encoded, reference);
    out.method = SaliencyMethod::kGradient;
    for (std::size_t i = 0; i < encoded.tokens.size(); ++i) {
      if (encoded.tokens[i].source < 0) continue;
      out.tokens.push_back(encoded.tokens[i].source);
      out.scores.push_back(norms[i]);
    }
    return out;
  }
  out.method = SaliencyMethod::kOcclusion;
  const double base = cross_entropy(classifier.predict(encoded).distribution,
                                    reference);
  const TokenSet arguments = sample.argument_tokens();
  for (int token : visible) {
    out.tokens.push_back(token);
    if (arguments.contains(token)) {
      out.scores.push_back(0.0);
      continue;
    }
    const double occluded = cross_entropy(
        predict_subset(classifier, sample, visible.without(token)).distribution,
        reference);
    out.scores.push_back(std::max(0.0, occluded - base));
  }
  return out;
}

// -- Persistence -----------------------------------------------------------

void save_classifier(const std::filesystem::path& dir,
                     const Classifier& classifier) {
  std::filesystem::create_directories(dir);
  const Json manifest = {{"label_set", classifier.label_set().labels()},
                         {"contract_version", std::string(kContractVersion)},
                         {"impl_id", classifier.impl_id()}};
  write_file_atomic(dir / "parameters.json", classifier.parameters().dump());
  write_file_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
}

std::unique_ptr<Classifier> load_classifier(const std::filesystem::path& dir) {
  Json manifest;
  Json parameters;
  try {
    manifest = Json::parse(read_file(dir / "manifest.json"));
    parameters = Json::parse(read_file(dir / "parameters.json"));
  } catch (const Json::parse_error& e) {
    throw ParseError(dir.string() + ": " + e.what(), 0);
  }
  const auto version =
      required_field<std::string>(manifest, "contract_version", "manifest");
  if (version != kContractVersion) {
    throw SchemaVersionError("model contract version '" + version +
                             "' is not supported");
  }
  LabelSet labels(
      required_field<std::vector<std::string>>(manifest, "label_set", "manifest"));
  const auto impl = required_field<std::string>(manifest, "impl_id", "manifest");
  if (impl == KeywordClassifier::kImplId) {
    return KeywordClassifier::from_parameters(std::move(labels), parameters);
  }
  if (impl == BagOfWordsClassifier::kImplId) {
    return BagOfWordsClassifier::from_parameters(std::move(labels), parameters);
  }
  if (impl == AttentionClassifier::kImplId) {
    return AttentionClassifier::from_parameters(std::move(labels), parameters);
  }
  throw InvalidArgument("unknown classifier implementation '" + impl + "'");
}

}  // namespace extentlab
