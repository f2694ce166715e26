#ifndef EXTENTLAB_CLASSIFIER_HPP_
#define EXTENTLAB_CLASSIFIER_HPP_

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "extentlab/corpus.hpp"
#include "extentlab/io.hpp"
#include "extentlab/token_set.hpp"

namespace extentlab {

inline constexpr std::string_view kArg1Begin = "<e1>";
inline constexpr std::string_view kArg1End = "</e1>";
inline constexpr std::string_view kArg2Begin = "<e2>";
inline constexpr std::string_view kArg2End = "</e2>";
inline constexpr std::string_view kContractVersion = "1";
inline constexpr double kProbabilityFloor = 1e-12;

enum class TokenRole { kContext = 0, kArg1, kArg2, kMarker };

inline constexpr int kTokenRoleCount = 4;

struct EncodedToken {
  std::string text;
  int source = -1;  // sentence token index, -1 for markers
  TokenRole role = TokenRole::kContext;
};

// Visible tokens in sentence order, each argument wrapped in its own
// begin/end marker pair. Hidden tokens are omitted.
struct EncodedSample {
  std::vector<EncodedToken> tokens;

  // Encoded position of sentence token `source`, or -1 when hidden.
  int position_of(int source) const;
  TokenSet visible() const;
};

// Throws ContractError when `visible` misses an argument token or names a
// token outside the sentence.
EncodedSample encode_sample(const RelationSample& sample,
                            const TokenSet& visible);

// exp(h_l) / sum_k exp(h_k), shifted by the maximum logit.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> softmax(
    const Eigen::MatrixBase<Derived>& logits) {
  using Scalar = typename Derived::Scalar;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> shifted =
      (logits.array() - logits.maxCoeff()).exp().matrix();
  return shifted / shifted.sum();
}

// -log dist[gold], with the probability floored at kProbabilityFloor.
template <typename Derived>
typename Derived::Scalar cross_entropy(const Eigen::MatrixBase<Derived>& dist,
                                       Eigen::Index gold) {
  using Scalar = typename Derived::Scalar;
  return -std::log(std::max(dist(gold), Scalar(kProbabilityFloor)));
}

// Index of the largest entry; the lowest index wins ties.
template <typename Derived>
int argmax(const Eigen::MatrixBase<Derived>& values) {
  int best = 0;
  for (Eigen::Index i = 1; i < values.size(); ++i) {
    if (values(i) > values(best)) best = static_cast<int>(i);
  }
  return best;
}

struct PredictionResult {
  Eigen::VectorXd distribution;
  int predicted = 0;
  double confidence = 0.0;

  static PredictionResult from_distribution(Eigen::VectorXd distribution);
};

enum class SaliencyMethod { kGradient, kOcclusion };

std::string_view to_string(SaliencyMethod method);

// What a caller accepts when asking for saliency.
enum class SaliencyPolicy { kGradientOnly, kOcclusionOnly, kGradientOrOcclusion };

struct SaliencyScores {
  std::vector<int> tokens;     // visible sentence tokens, ascending
  std::vector<double> scores;  // aligned with `tokens`
  SaliencyMethod method = SaliencyMethod::kGradient;

  double score_of(int token) const;
};

// Keys of the training config file.
struct TrainConfig {
  std::uint64_t seed = 13;
  int epochs = 30;
  int patience = 5;
  int batch_size = 16;
  double learning_rate = 0.02;

  static TrainConfig from_json(const Json& object);
  Json to_json() const;
};

// A relation decider. Implementations are read-only after training:
// predict and input_gradient_norms may run concurrently.
class Classifier {
 public:
  virtual ~Classifier() = default;

  virtual std::string impl_id() const = 0;
  virtual const LabelSet& label_set() const = 0;
  virtual PredictionResult predict(const EncodedSample& encoded) const = 0;

  virtual bool supports_gradients() const { return false; }
  // Euclidean norm of d CE(reference, p) / d x_i for every encoded position
  // i, where x_i is the position's input representation. Throws
  // CapabilityError unless supports_gradients().
  virtual std::vector<double> input_gradient_norms(const EncodedSample& encoded,
                                                   int reference) const;

  // Model state, excluding the manifest.
  virtual Json parameters() const = 0;
};

class TrainableClassifier : public Classifier {
 public:
  // Prepares vocabulary and initial weights. Called once by fit().
  virtual void initialize(std::span<const EncodedSample> train,
                          const TrainConfig& config) = 0;
  // One pass over train[order[0]], train[order[1]], ...; returns mean loss.
  virtual double train_epoch(std::span<const EncodedSample> train,
                             std::span<const int> gold,
                             std::span<const std::size_t> order,
                             const TrainConfig& config) = 0;
  virtual void set_parameters(const Json& parameters) = 0;
};

struct EpochReport {
  int epoch = 0;
  double train_loss = 0.0;
  double dev_micro_f1 = 0.0;
};

struct TrainingReport {
  std::vector<EpochReport> epochs;
  int best_epoch = 0;
  double best_dev_micro_f1 = 0.0;
  bool early_stopped = false;
  std::uint64_t seed = 0;

  Json to_json() const;
};

// Trains on full sentences with early stopping on dev micro-F1; the best
// epoch's parameters are kept. Uses train as dev when dev is empty.
TrainingReport fit(TrainableClassifier& classifier,
                   std::span<const RelationSample> train,
                   std::span<const RelationSample> dev,
                   const TrainConfig& config);

PredictionResult predict_subset(const Classifier& classifier,
                                const RelationSample& sample,
                                const TokenSet& visible);
PredictionResult predict_full(const Classifier& classifier,
                              const RelationSample& sample);

// The k most probable labels on the full sentence, descending, lowest
// index first on ties. k is clamped to the label count.
std::vector<int> top_k_labels(const Classifier& classifier,
                              const RelationSample& sample, int k);

// Per-token influence of the visible tokens on CE(reference, p). Gradient
// scores are input_gradient_norms; occlusion scores are the loss increase
// when the token is hidden (0 for argument tokens, floored at 0).
SaliencyScores saliency(const Classifier& classifier,
                        const RelationSample& sample, const TokenSet& visible,
                        int reference,
                        SaliencyPolicy policy = SaliencyPolicy::kGradientOnly);

// Model directory: manifest.json {"label_set","contract_version","impl_id"}
// plus parameters.json.
void save_classifier(const std::filesystem::path& dir,
                     const Classifier& classifier);
std::unique_ptr<Classifier> load_classifier(const std::filesystem::path& dir);

}  // namespace extentlab

#endif  // EXTENTLAB_CLASSIFIER_HPP_
