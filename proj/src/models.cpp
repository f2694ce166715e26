#include "extentlab/models.hpp"

#include <cmath>
#include <random>
#include <set>

#include "extentlab/errors.hpp"

namespace extentlab {

namespace {

Json matrix_to_json(const Eigen::MatrixXd& matrix) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < matrix.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < matrix.cols(); ++c) row.push_back(matrix(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const Json& rows, Eigen::Index cols,
                                 std::string_view what) {
  Eigen::MatrixXd matrix(static_cast<Eigen::Index>(rows.size()), cols);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (static_cast<Eigen::Index>(rows[r].size()) != cols) {
      throw ParseError(std::string(what) + ": row " + std::to_string(r) +
                           " has the wrong width",
                       0);
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      matrix(static_cast<Eigen::Index>(r), c) = rows[r][c].get<double>();
    }
  }
  return matrix;
}

Json vector_to_json(const Eigen::VectorXd& vector) {
  return std::vector<double>(vector.data(), vector.data() + vector.size());
}

Eigen::VectorXd vector_from_json(const Json& values, Eigen::Index size,
                                 std::string_view what) {
  const auto raw = values.get<std::vector<double>>();
  if (static_cast<Eigen::Index>(raw.size()) != size) {
    throw ParseError(std::string(what) + ": expected " + std::to_string(size) +
                         " values",
                     0);
  }
  return Eigen::Map<const Eigen::VectorXd>(raw.data(), size);
}

Eigen::VectorXd one_hot(int size, int index) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(size);
  out(index) = 1.0;
  return out;
}

}  // namespace

// -- KeywordClassifier -----------------------------------------------------

KeywordClassifier::KeywordClassifier(LabelSet labels,
                                     std::vector<KeywordRule> rules,
                                     std::string fallback_label,
                                     double fallback_confidence)
    : labels_(std::move(labels)),
      rules_(std::move(rules)),
      fallback_label_(std::move(fallback_label)),
      fallback_confidence_(fallback_confidence) {
  const double floor = labels_.size() > 1 ? 1.0 / labels_.size() : 0.0;
  auto check = [&](const std::string& label, double confidence) {
    if (!labels_.index_of(label)) {
      throw InvalidArgument("keyword rule label '" + label +
                            "' is not in the label set");
    }
    if (!(confidence > floor && confidence <= 1.0)) {
      throw InvalidArgument("keyword rule confidence must lie in (1/|labels|, 1]");
    }
  };
  for (const auto& rule : rules_) check(rule.label, rule.confidence);
  check(fallback_label_, fallback_confidence_);
}

std::unique_ptr<KeywordClassifier> KeywordClassifier::from_parameters(
    LabelSet labels, const Json& parameters) {
  std::vector<KeywordRule> rules;
  for (const auto& raw : required_field<Json>(parameters, "rules", "keyword mock")) {
    rules.push_back({required_field<std::string>(raw, "keyword", "keyword rule"),
                     required_field<std::string>(raw, "label", "keyword rule"),
                     required_field<double>(raw, "confidence", "keyword rule")});
  }
  const auto fallback = required_field<Json>(parameters, "fallback", "keyword mock");
  return std::make_unique<KeywordClassifier>(
      std::move(labels), std::move(rules),
      required_field<std::string>(fallback, "label", "keyword fallback"),
      required_field<double>(fallback, "confidence", "keyword fallback"));
}

Eigen::VectorXd KeywordClassifier::distribution_for(int label,
                                                    double confidence) const {
  const int n = labels_.size();
  if (n == 1) return Eigen::VectorXd::Ones(1);
  Eigen::VectorXd out = Eigen::VectorXd::Constant(n, (1.0 - confidence) / (n - 1));
  out(label) = confidence;
  return out;
}

PredictionResult KeywordClassifier::predict(const EncodedSample& encoded) const {
  for (const auto& rule : rules_) {
    for (const auto& token : encoded.tokens) {
      if (token.source >= 0 && token.text == rule.keyword) {
        return PredictionResult::from_distribution(distribution_for(
            labels_.require_index(rule.label), rule.confidence));
      }
    }
  }
  return PredictionResult::from_distribution(distribution_for(
      labels_.require_index(fallback_label_), fallback_confidence_));
}

Json KeywordClassifier::parameters() const {
  Json rules = Json::array();
  for (const auto& rule : rules_) {
    rules.push_back({{"keyword", rule.keyword},
                     {"label", rule.label},
                     {"confidence", rule.confidence}});
  }
  return {{"rules", rules},
          {"fallback",
           {{"label", fallback_label_}, {"confidence", fallback_confidence_}}}};
}

// -- BagOfWordsClassifier --------------------------------------------------

BagOfWordsClassifier::BagOfWordsClassifier(LabelSet labels)
    : labels_(std::move(labels)), bias_(Eigen::VectorXd::Zero(labels_.size())) {}

std::unique_ptr<BagOfWordsClassifier> BagOfWordsClassifier::from_parameters(
    LabelSet labels, const Json& parameters) {
  auto model = std::make_unique<BagOfWordsClassifier>(std::move(labels));
  model->set_parameters(parameters);
  return model;
}

void BagOfWordsClassifier::set_weight(const std::string& word,
                                      Eigen::VectorXd weights) {
  if (weights.size() != labels_.size()) {
    throw InvalidArgument("weight vector for '" + word +
                          "' must have one entry per label");
  }
  weights_[word] = std::move(weights);
}

void BagOfWordsClassifier::set_bias(Eigen::VectorXd bias) {
  if (bias.size() != labels_.size()) {
    throw InvalidArgument("bias must have one entry per label");
  }
  bias_ = std::move(bias);
}

Eigen::VectorXd BagOfWordsClassifier::weight_of(const std::string& word) const {
  auto it = weights_.find(word);
  if (it == weights_.end()) return Eigen::VectorXd::Zero(labels_.size());
  return it->second;
}

PredictionResult BagOfWordsClassifier::predict_gated(
    const EncodedSample& encoded, const Eigen::VectorXd& gates) const {
  Eigen::VectorXd logits = bias_;
  for (std::size_t i = 0; i < encoded.tokens.size(); ++i) {
    auto it = weights_.find(encoded.tokens[i].text);
    if (it != weights_.end()) logits += gates(static_cast<Eigen::Index>(i)) * it->second;
  }
  return PredictionResult::from_distribution(softmax(logits));
}

PredictionResult BagOfWordsClassifier::predict(
    const EncodedSample& encoded) const {
  return predict_gated(encoded, Eigen::VectorXd::Ones(
                                    static_cast<Eigen::Index>(encoded.tokens.size())));
}

std::vector<double> BagOfWordsClassifier::input_gradient_norms(
    const EncodedSample& encoded, int reference) const {
  const PredictionResult result = predict(encoded);
  const Eigen::VectorXd residual =
      result.distribution - one_hot(labels_.size(), reference);
  std::vector<double> norms;
  norms.reserve(encoded.tokens.size());
  for (const auto& token : encoded.tokens) {
    auto it = weights_.find(token.text);
    norms.push_back(it == weights_.end() ? 0.0 : std::abs(residual.dot(it->second)));
  }
  return norms;
}

Json BagOfWordsClassifier::parameters() const {
  Json weights = Json::object();
  for (const auto& [word, vector] : weights_) weights[word] = vector_to_json(vector);
  return {{"bias", vector_to_json(bias_)}, {"weights", weights}};
}

void BagOfWordsClassifier::set_parameters(const Json& parameters) {
  const Eigen::Index n = labels_.size();
  bias_ = vector_from_json(required_field<Json>(parameters, "bias", "bag-of-words"),
                           n, "bias");
  weights_.clear();
  const Json weights = required_field<Json>(parameters, "weights", "bag-of-words");
  for (const auto& item : weights.items()) {
    weights_[item.key()] = vector_from_json(item.value(), n, item.key());
  }
}

void BagOfWordsClassifier::initialize(std::span<const EncodedSample> train,
                                      const TrainConfig&) {
  weights_.clear();
  bias_ = Eigen::VectorXd::Zero(labels_.size());
  for (const auto& encoded : train) {
    for (const auto& token : encoded.tokens) {
      weights_.emplace(token.text, Eigen::VectorXd::Zero(labels_.size()));
    }
  }
}

double BagOfWordsClassifier::train_epoch(std::span<const EncodedSample> train,
                                         std::span<const int> gold,
                                         std::span<const std::size_t> order,
                                         const TrainConfig& config) {
  double total_loss = 0.0;
  const std::size_t batch = static_cast<std::size_t>(config.batch_size);
  for (std::size_t begin = 0; begin < order.size(); begin += batch) {
    const std::size_t end = std::min(order.size(), begin + batch);
    std::map<std::string, Eigen::VectorXd> word_grads;
    Eigen::VectorXd bias_grad = Eigen::VectorXd::Zero(labels_.size());
    for (std::size_t k = begin; k < end; ++k) {
      const EncodedSample& encoded = train[order[k]];
      const PredictionResult result = predict(encoded);
      total_loss += cross_entropy(result.distribution, gold[order[k]]);
      const Eigen::VectorXd residual =
          result.distribution - one_hot(labels_.size(), gold[order[k]]);
      bias_grad += residual;
      for (const auto& token : encoded.tokens) {
        auto [it, inserted] = word_grads.try_emplace(token.text, residual);
        if (!inserted) it->second += residual;
      }
    }
    const double scale = config.learning_rate / static_cast<double>(end - begin);
    bias_ -= scale * bias_grad;
    for (const auto& [word, grad] : word_grads) {
      auto [it, inserted] =
          weights_.try_emplace(word, Eigen::VectorXd::Zero(labels_.size()));
      it->second -= scale * grad;
    }
  }
  return total_loss / static_cast<double>(std::max<std::size_t>(order.size(), 1));
}

// -- AttentionClassifier ---------------------------------------------------

struct AttentionClassifier::Gradients {
  Eigen::MatrixXd embeddings;
  Eigen::MatrixXd role_embeddings;
  Eigen::VectorXd attention;
  Eigen::MatrixXd output_weights;
  Eigen::VectorXd output_bias;

  explicit Gradients(const AttentionClassifier& model)
      : embeddings(Eigen::MatrixXd::Zero(model.embeddings_.rows(),
                                         model.embeddings_.cols())),
        role_embeddings(Eigen::MatrixXd::Zero(model.role_embeddings_.rows(),
                                              model.role_embeddings_.cols())),
        attention(Eigen::VectorXd::Zero(model.attention_.size())),
        output_weights(Eigen::MatrixXd::Zero(model.output_weights_.rows(),
                                             model.output_weights_.cols())),
        output_bias(Eigen::VectorXd::Zero(model.output_bias_.size())) {}
};

struct AttentionClassifier::AdamState {
  Gradients first;
  Gradients second;
  int step = 0;

  explicit AdamState(const AttentionClassifier& model)
      : first(model), second(model) {}
};

namespace {

struct Forward {
  Eigen::VectorXd attention_weights;
  Eigen::VectorXd hidden;  // tanh(X^T a)
  Eigen::VectorXd distribution;
};

Forward run_forward(const Eigen::MatrixXd& inputs,
                    const Eigen::VectorXd& attention,
                    const Eigen::MatrixXd& output_weights,
                    const Eigen::VectorXd& output_bias) {
  Forward f;
  f.attention_weights = softmax(inputs * attention);
  f.hidden = (inputs.transpose() * f.attention_weights).array().tanh().matrix();
  f.distribution = softmax(output_weights * f.hidden + output_bias);
  return f;
}

template <typename Derived>
void adam_update(Eigen::MatrixBase<Derived>& parameter,
                 const Eigen::MatrixBase<Derived>& gradient,
                 Eigen::MatrixBase<Derived>& first,
                 Eigen::MatrixBase<Derived>& second, double learning_rate,
                 int step) {
  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr double kEpsilon = 1e-8;
  first = kBeta1 * first + (1.0 - kBeta1) * gradient;
  second = kBeta2 * second + (1.0 - kBeta2) * gradient.cwiseProduct(gradient);
  const double correction1 = 1.0 - std::pow(kBeta1, step);
  const double correction2 = 1.0 - std::pow(kBeta2, step);
  parameter -= (learning_rate * (first.array() / correction1) /
                ((second.array() / correction2).sqrt() + kEpsilon))
                   .matrix();
}

}  // namespace

AttentionClassifier::AttentionClassifier(LabelSet labels, int dimension)
    : labels_(std::move(labels)),
      dimension_(dimension),
      embeddings_(Eigen::MatrixXd::Zero(1, dimension)),
      role_embeddings_(Eigen::MatrixXd::Zero(kTokenRoleCount, dimension)),
      attention_(Eigen::VectorXd::Zero(dimension)),
      output_weights_(Eigen::MatrixXd::Zero(labels_.size(), dimension)),
      output_bias_(Eigen::VectorXd::Zero(labels_.size())) {
  if (dimension < 1) throw InvalidArgument("dimension must be positive");
}

std::unique_ptr<AttentionClassifier> AttentionClassifier::from_parameters(
    LabelSet labels, const Json& parameters) {
  const int dimension =
      required_field<int>(parameters, "dimension", "attention classifier");
  auto model = std::make_unique<AttentionClassifier>(std::move(labels), dimension);
  model->set_parameters(parameters);
  return model;
}

int AttentionClassifier::word_row(const std::string& word) const {
  auto it = vocabulary_.find(word);
  return it == vocabulary_.end() ? 0 : it->second;
}

Eigen::MatrixXd AttentionClassifier::inputs(const EncodedSample& encoded) const {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(encoded.tokens.size()), dimension_);
  for (std::size_t i = 0; i < encoded.tokens.size(); ++i) {
    const auto& token = encoded.tokens[i];
    out.row(static_cast<Eigen::Index>(i)) =
        embeddings_.row(word_row(token.text)) +
        role_embeddings_.row(static_cast<int>(token.role));
  }
  return out;
}

PredictionResult AttentionClassifier::predict_inputs(
    const Eigen::MatrixXd& inputs) const {
  if (inputs.rows() == 0) {
    return PredictionResult::from_distribution(softmax(output_bias_));
  }
  return PredictionResult::from_distribution(
      run_forward(inputs, attention_, output_weights_, output_bias_).distribution);
}

PredictionResult AttentionClassifier::predict(const EncodedSample& encoded) const {
  return predict_inputs(inputs(encoded));
}

Eigen::MatrixXd AttentionClassifier::input_gradients(const Eigen::MatrixXd& x,
                                                     int reference) const {
  const Forward f = run_forward(x, attention_, output_weights_, output_bias_);
  const Eigen::VectorXd d_logits =
      f.distribution - one_hot(labels_.size(), reference);
  const Eigen::VectorXd d_pre = (output_weights_.transpose() * d_logits)
                                    .cwiseProduct((1.0 - f.hidden.array().square()).matrix());
  const Eigen::VectorXd& a = f.attention_weights;
  const Eigen::VectorXd d_weights = x * d_pre;
  const Eigen::VectorXd d_scores =
      a.cwiseProduct((d_weights.array() - a.dot(d_weights)).matrix());
  return a * d_pre.transpose() + d_scores * attention_.transpose();
}

std::vector<double> AttentionClassifier::input_gradient_norms(
    const EncodedSample& encoded, int reference) const {
  const Eigen::MatrixXd grads = input_gradients(inputs(encoded), reference);
  std::vector<double> norms(static_cast<std::size_t>(grads.rows()));
  for (Eigen::Index i = 0; i < grads.rows(); ++i) norms[i] = grads.row(i).norm();
  return norms;
}

double AttentionClassifier::accumulate_gradients(const EncodedSample& encoded,
                                                 int gold,
                                                 Gradients& grads) const {
  const Eigen::MatrixXd x = inputs(encoded);
  const Forward f = run_forward(x, attention_, output_weights_, output_bias_);
  const Eigen::VectorXd d_logits = f.distribution - one_hot(labels_.size(), gold);
  grads.output_weights += d_logits * f.hidden.transpose();
  grads.output_bias += d_logits;
  const Eigen::VectorXd d_pre = (output_weights_.transpose() * d_logits)
                                    .cwiseProduct((1.0 - f.hidden.array().square()).matrix());
  const Eigen::VectorXd& a = f.attention_weights;
  const Eigen::VectorXd d_weights = x * d_pre;
  const Eigen::VectorXd d_scores =
      a.cwiseProduct((d_weights.array() - a.dot(d_weights)).matrix());
  grads.attention += x.transpose() * d_scores;
  const Eigen::MatrixXd d_inputs =
      a * d_pre.transpose() + d_scores * attention_.transpose();
  for (std::size_t i = 0; i < encoded.tokens.size(); ++i) {
    const auto& token = encoded.tokens[i];
    grads.embeddings.row(word_row(token.text)) += d_inputs.row(static_cast<Eigen::Index>(i));
    grads.role_embeddings.row(static_cast<int>(token.role)) +=
        d_inputs.row(static_cast<Eigen::Index>(i));
  }
  return cross_entropy(f.distribution, gold);
}

void AttentionClassifier::initialize(std::span<const EncodedSample> train,
                                     const TrainConfig& config) {
  std::set<std::string> words;
  for (const auto& encoded : train) {
    for (const auto& token : encoded.tokens) words.insert(token.text);
  }
  vocabulary_.clear();
  int row = 1;
  for (const auto& word : words) vocabulary_[word] = row++;

  std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto init = [&](Eigen::Index rows, Eigen::Index cols, double scale) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = scale * normal(rng);
    }
    return m;
  };
  const double scale = 1.0 / std::sqrt(static_cast<double>(dimension_));
  embeddings_ = init(row, dimension_, scale);
  embeddings_.row(0).setZero();
  role_embeddings_ = init(kTokenRoleCount, dimension_, scale);
  attention_ = init(dimension_, 1, scale);
  output_weights_ = init(labels_.size(), dimension_, scale);
  output_bias_ = Eigen::VectorXd::Zero(labels_.size());
  adam_ = std::make_shared<AdamState>(*this);
}

double AttentionClassifier::train_epoch(std::span<const EncodedSample> train,
                                        std::span<const int> gold,
                                        std::span<const std::size_t> order,
                                        const TrainConfig& config) {
  if (!adam_) adam_ = std::make_shared<AdamState>(*this);
  double total_loss = 0.0;
  const std::size_t batch = static_cast<std::size_t>(config.batch_size);
  for (std::size_t begin = 0; begin < order.size(); begin += batch) {
    const std::size_t end = std::min(order.size(), begin + batch);
    Gradients grads(*this);
    for (std::size_t k = begin; k < end; ++k) {
      total_loss += accumulate_gradients(train[order[k]], gold[order[k]], grads);
    }
    const double inv = 1.0 / static_cast<double>(end - begin);
    const int step = ++adam_->step;
    const double lr = config.learning_rate;
    grads.embeddings *= inv;
    grads.role_embeddings *= inv;
    grads.attention *= inv;
    grads.output_weights *= inv;
    grads.output_bias *= inv;
    adam_update(embeddings_, grads.embeddings, adam_->first.embeddings,
                adam_->second.embeddings, lr, step);
    adam_update(role_embeddings_, grads.role_embeddings,
                adam_->first.role_embeddings, adam_->second.role_embeddings, lr,
                step);
    adam_update(attention_, grads.attention, adam_->first.attention,
                adam_->second.attention, lr, step);
    adam_update(output_weights_, grads.output_weights, adam_->first.output_weights,
                adam_->second.output_weights, lr, step);
    adam_update(output_bias_, grads.output_bias, adam_->first.output_bias,
                adam_->second.output_bias, lr, step);
  }
  return total_loss / static_cast<double>(std::max<std::size_t>(order.size(), 1));
}

Json AttentionClassifier::parameters() const {
  std::vector<std::string> words(vocabulary_.size() + 1);
  words[0] = "";
  for (const auto& [word, row] : vocabulary_) words[row] = word;
  return {{"dimension", dimension_},
          {"vocabulary", words},
          {"embeddings", matrix_to_json(embeddings_)},
          {"role_embeddings", matrix_to_json(role_embeddings_)},
          {"attention", vector_to_json(attention_)},
          {"output_weights", matrix_to_json(output_weights_)},
          {"output_bias", vector_to_json(output_bias_)}};
}

void AttentionClassifier::set_parameters(const Json& parameters) {
  const std::string context = "attention classifier";
  if (required_field<int>(parameters, "dimension", context) != dimension_) {
    throw ParseError(context + ": dimension mismatch", 0);
  }
  const auto words =
      required_field<std::vector<std::string>>(parameters, "vocabulary", context);
  vocabulary_.clear();
  for (std::size_t row = 1; row < words.size(); ++row) {
    vocabulary_[words[row]] = static_cast<int>(row);
  }
  embeddings_ = matrix_from_json(required_field<Json>(parameters, "embeddings", context),
                                 dimension_, "embeddings");
  if (embeddings_.rows() != static_cast<Eigen::Index>(words.size())) {
    throw ParseError(context + ": vocabulary and embedding rows differ", 0);
  }
  role_embeddings_ = matrix_from_json(
      required_field<Json>(parameters, "role_embeddings", context), dimension_,
      "role_embeddings");
  attention_ = vector_from_json(required_field<Json>(parameters, "attention", context),
                                dimension_, "attention");
  output_weights_ = matrix_from_json(
      required_field<Json>(parameters, "output_weights", context), dimension_,
      "output_weights");
  output_bias_ = vector_from_json(
      required_field<Json>(parameters, "output_bias", context), labels_.size(),
      "output_bias");
  if (output_weights_.rows() != labels_.size() ||
      role_embeddings_.rows() != kTokenRoleCount) {
    throw ParseError(context + ": parameter shapes do not match the label set", 0);
  }
}

}  // namespace extentlab
