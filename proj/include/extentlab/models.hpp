#ifndef EXTENTLAB_MODELS_HPP_
#define EXTENTLAB_MODELS_HPP_

#include <Eigen/Dense>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "extentlab/classifier.hpp"

namespace extentlab {

struct KeywordRule {
  std::string keyword;
  std::string label;
  double confidence = 0.9;
};

// Rule-table decider. The first rule whose keyword is a visible token text
// decides; otherwise the fallback applies. The decided label receives the
// rule's confidence and the rest is spread evenly over the other labels.
// Not differentiable.
class KeywordClassifier final : public Classifier {
 public:
  static constexpr std::string_view kImplId = "keyword-mock";

  // Throws InvalidArgument for labels outside `labels` or confidences that
  // would not make the decided label the unique argmax.
  KeywordClassifier(LabelSet labels, std::vector<KeywordRule> rules,
                    std::string fallback_label, double fallback_confidence);

  static std::unique_ptr<KeywordClassifier> from_parameters(
      LabelSet labels, const Json& parameters);

  std::string impl_id() const override { return std::string(kImplId); }
  const LabelSet& label_set() const override { return labels_; }
  PredictionResult predict(const EncodedSample& encoded) const override;
  Json parameters() const override;

 private:
  Eigen::VectorXd distribution_for(int label, double confidence) const;

  LabelSet labels_;
  std::vector<KeywordRule> rules_;
  std::string fallback_label_;
  double fallback_confidence_;
};

// Linear bag-of-words decider: logits = bias + sum_i g_i * w[text_i], where
// g_i = 1 is the presence gate of encoded position i. The gate is the
// token's input representation, so its saliency is |(p - onehot)^T w[text]|.
class BagOfWordsClassifier final : public TrainableClassifier {
 public:
  static constexpr std::string_view kImplId = "bag-of-words";

  explicit BagOfWordsClassifier(LabelSet labels);

  static std::unique_ptr<BagOfWordsClassifier> from_parameters(
      LabelSet labels, const Json& parameters);

  // One weight per label.
  void set_weight(const std::string& word, Eigen::VectorXd weights);
  void set_bias(Eigen::VectorXd bias);

  std::string impl_id() const override { return std::string(kImplId); }
  const LabelSet& label_set() const override { return labels_; }
  PredictionResult predict(const EncodedSample& encoded) const override;
  bool supports_gradients() const override { return true; }
  std::vector<double> input_gradient_norms(const EncodedSample& encoded,
                                           int reference) const override;
  Json parameters() const override;

  // Forward pass with explicit gates (one per encoded position).
  PredictionResult predict_gated(const EncodedSample& encoded,
                                 const Eigen::VectorXd& gates) const;

  void initialize(std::span<const EncodedSample> train,
                  const TrainConfig& config) override;
  double train_epoch(std::span<const EncodedSample> train,
                     std::span<const int> gold,
                     std::span<const std::size_t> order,
                     const TrainConfig& config) override;
  void set_parameters(const Json& parameters) override;

 private:
  Eigen::VectorXd weight_of(const std::string& word) const;

  LabelSet labels_;
  std::map<std::string, Eigen::VectorXd> weights_;
  Eigen::VectorXd bias_;
};

// Compact trainable encoder used as the reference decider. Each encoded
// position has input x_i = E[word_i] + R[role_i]; attention pooling
// a = softmax(X u), h = tanh(X^T a), logits = W h + b. Trained with Adam.
class AttentionClassifier final : public TrainableClassifier {
 public:
  static constexpr std::string_view kImplId = "attention-pool";
  static constexpr int kDefaultDimension = 16;

  explicit AttentionClassifier(LabelSet labels,
                               int dimension = kDefaultDimension);

  static std::unique_ptr<AttentionClassifier> from_parameters(
      LabelSet labels, const Json& parameters);

  std::string impl_id() const override { return std::string(kImplId); }
  const LabelSet& label_set() const override { return labels_; }
  PredictionResult predict(const EncodedSample& encoded) const override;
  bool supports_gradients() const override { return true; }
  std::vector<double> input_gradient_norms(const EncodedSample& encoded,
                                           int reference) const override;
  Json parameters() const override;

  // Input representations, one row per encoded position.
  Eigen::MatrixXd inputs(const EncodedSample& encoded) const;
  // Forward pass from explicit input rows.
  PredictionResult predict_inputs(const Eigen::MatrixXd& inputs) const;
  // d CE(reference, p) / d inputs, one row per position.
  Eigen::MatrixXd input_gradients(const Eigen::MatrixXd& inputs,
                                  int reference) const;

  void initialize(std::span<const EncodedSample> train,
                  const TrainConfig& config) override;
  double train_epoch(std::span<const EncodedSample> train,
                     std::span<const int> gold,
                     std::span<const std::size_t> order,
                     const TrainConfig& config) override;
  void set_parameters(const Json& parameters) override;

 private:
  struct Gradients;
  struct AdamState;

  int word_row(const std::string& word) const;
  double accumulate_gradients(const EncodedSample& encoded, int gold,
                              Gradients& grads) const;

  LabelSet labels_;
  int dimension_;
  std::map<std::string, int> vocabulary_;  // row 0 is the unknown word
  Eigen::MatrixXd embeddings_;             // vocabulary x dimension
  Eigen::MatrixXd role_embeddings_;        // kTokenRoleCount x dimension
  Eigen::VectorXd attention_;              // dimension
  Eigen::MatrixXd output_weights_;         // labels x dimension
  Eigen::VectorXd output_bias_;            // labels
  std::shared_ptr<AdamState> adam_;
};

}  // namespace extentlab

#endif  // EXTENTLAB_MODELS_HPP_
