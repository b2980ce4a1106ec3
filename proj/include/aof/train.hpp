#pragma once

#include "aof/classifier.hpp"
#include "aof/dataset.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace aof {

struct TrainConfig {
  double learning_rate = 1e-3;
  int epochs = 30;
  int batch_size = 4;
  std::uint64_t seed = 0;
  double weight_decay = 0.0;
};

struct TrainReport {
  std::vector<double> epoch_loss;
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;  // NaN when the dataset has no test split
};

struct TrainResult {
  Classifier model;
  TrainReport report;
};

/// Per-coordinate Adam state for one parameter block.
class Adam {
 public:
  Adam(double learning_rate, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

  /// Advances the step counter. Call once per update, before step().
  void tick() { ++t_; }

  /// param -= lr * mhat / (sqrt(vhat) + eps) using slot `slot`'s moments.
  void step(std::size_t slot, Eigen::Ref<Eigen::MatrixXd> param, const Eigen::Ref<const Eigen::MatrixXd>& grad);

  long steps() const noexcept { return t_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
  std::vector<Eigen::MatrixXd> m_, v_;
};

using EpochCallback = std::function<void(int epoch, double mean_loss)>;

/// Mini-batch Adam on softmax cross-entropy over the train split.
/// Deterministic given cfg.seed. Throws TrainingDiverged on a non-finite loss.
TrainResult train(const LabeledDataset& dataset, const TrainConfig& cfg, ModelDims dims,
                  const EpochCallback& on_epoch = {});

/// Fraction of clouds whose predicted class equals the label. Unlabeled
/// clouds throw InvalidArgument; an empty dataset yields 0.
double accuracy(const Classifier& model, const LabeledDataset& dataset);
double accuracy(const Classifier& model, const std::vector<PointCloud>& clouds);

}  // namespace aof
