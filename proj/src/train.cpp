#include "aof/train.hpp"

#include "aof/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace aof {

Adam::Adam(double learning_rate, double beta1, double beta2, double eps)
    : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(eps) {
  if (!(learning_rate > 0.0)) throw InvalidArgument("learning rate must be positive");
}

void Adam::step(std::size_t slot, Eigen::Ref<Eigen::MatrixXd> param, const Eigen::Ref<const Eigen::MatrixXd>& grad) {
  if (t_ < 1) throw InvalidArgument("Adam::tick() must precede step()");
  if (slot >= m_.size()) {
    m_.resize(slot + 1);
    v_.resize(slot + 1);
  }
  auto& m = m_[slot];
  auto& v = v_[slot];
  if (m.size() == 0) {
    m = Eigen::MatrixXd::Zero(param.rows(), param.cols());
    v = Eigen::MatrixXd::Zero(param.rows(), param.cols());
  }
  if (m.rows() != grad.rows() || m.cols() != grad.cols() || param.rows() != grad.rows() || param.cols() != grad.cols()) {
    throw ShapeError("Adam slot shape changed between steps");
  }
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  m = beta1_ * m + (1.0 - beta1_) * grad;
  v = beta2_ * v + (1.0 - beta2_) * grad.cwiseProduct(grad);
  param.array() -= lr_ * (m.array() / c1) / ((v.array() / c2).sqrt() + eps_);
}

double accuracy(const Classifier& model, const std::vector<PointCloud>& clouds) {
  if (clouds.empty()) return 0.0;
  int correct = 0;
  for (const auto& c : clouds) {
    if (!c.label) throw InvalidArgument("accuracy needs labeled clouds");
    correct += predict(model, c.points()) == *c.label;
  }
  return static_cast<double>(correct) / static_cast<double>(clouds.size());
}

double accuracy(const Classifier& model, const LabeledDataset& dataset) { return accuracy(model, dataset.clouds); }

TrainResult train(const LabeledDataset& dataset, const TrainConfig& cfg, ModelDims dims, const EpochCallback& on_epoch) {
  if (!(cfg.learning_rate > 0.0)) throw InvalidArgument("learning_rate must be positive");
  if (cfg.epochs < 1) throw InvalidArgument("epochs must be at least 1");
  if (cfg.batch_size < 1) throw InvalidArgument("batch_size must be at least 1");
  if (cfg.weight_decay < 0.0) throw InvalidArgument("weight_decay must be non-negative");
  dataset.validate();
  if (dataset.num_classes() > dims.classes) throw InvalidArgument("dataset has more classes than the model outputs");

  const LabeledDataset train_set = dataset.subset(Split::Train);
  const LabeledDataset test_set = dataset.subset(Split::Test);
  if (train_set.size() == 0) throw InvalidArgument("dataset has no training clouds");

  std::mt19937_64 rng(cfg.seed);
  Classifier model = Classifier::random(dims, rng());
  Adam adam(cfg.learning_rate);

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  TrainReport report;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      ParameterGradients sum = zero_gradients(dims);
      double batch_loss = 0.0;
      for (std::size_t b = start; b < end; ++b) {
        const PointCloud& cloud = train_set.clouds[order[b]];
        ForwardResult fw = forward(model, cloud.points());
        Eigen::VectorXd dz;
        batch_loss += cross_entropy(fw.logits, *cloud.label, &dz);
        ParameterGradients g;
        backward(model, fw.tape, dz, nullptr, &g);
        for (std::size_t l = 0; l < kNumLayers; ++l) {
          sum[l].weight += g[l].weight;
          sum[l].bias += g[l].bias;
        }
      }
      if (!std::isfinite(batch_loss)) throw TrainingDiverged(epoch + 1);
      epoch_loss += batch_loss;

      const double scale = 1.0 / static_cast<double>(end - start);
      adam.tick();
      auto& layers = model.mutable_layers();
      for (std::size_t l = 0; l < kNumLayers; ++l) {
        Eigen::MatrixXd gw = sum[l].weight * scale;
        if (cfg.weight_decay > 0.0) gw += cfg.weight_decay * layers[l].weight;
        adam.step(2 * l, layers[l].weight, gw);
        adam.step(2 * l + 1, layers[l].bias, sum[l].bias * scale);
      }
    }
    epoch_loss /= static_cast<double>(order.size());
    if (!std::isfinite(epoch_loss)) throw TrainingDiverged(epoch + 1);
    report.epoch_loss.push_back(epoch_loss);
    if (on_epoch) on_epoch(epoch + 1, epoch_loss);
  }

  report.train_accuracy = accuracy(model, train_set);
  report.test_accuracy =
      test_set.size() > 0 ? accuracy(model, test_set) : std::numeric_limits<double>::quiet_NaN();
  return {std::move(model), std::move(report)};
}

}  // namespace aof
