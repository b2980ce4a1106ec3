#pragma once

#include "aof/pointcloud.hpp"

#include <Eigen/Core>

#include <array>
#include <cstdint>

namespace aof {

/// Hidden widths and class count of the classifier.
struct ModelDims {
  int h1 = 64;
  int h2 = 128;
  int h3 = 64;
  int classes = 5;

  friend bool operator==(const ModelDims&, const ModelDims&) = default;
};

inline constexpr ModelDims kVictimDims{64, 128, 64, 5};
inline constexpr ModelDims kTransferDims{48, 96, 48, 5};

/// Affine map y = W x + b, with W stored out x in.
struct DenseLayer {
  Eigen::MatrixXd weight;
  Eigen::VectorXd bias;
};

/// Layer order: two shared per-point layers (3 -> h1 -> h2), then the head
/// (h2 -> h3 -> classes).
inline constexpr std::size_t kNumLayers = 4;
using LayerArray = std::array<DenseLayer, kNumLayers>;

/// PointNet-style classifier: shared per-point MLP with ReLU, max pool over
/// points, dense head with ReLU on the hidden layer. Logits come out raw.
///
/// Every mutable access bumps `version()`, which tapes use to detect that the
/// parameters changed after the forward pass that produced them.
class Classifier {
 public:
  /// All-zero parameters.
  explicit Classifier(ModelDims dims);

  /// He-normal weights, zero biases.
  static Classifier random(ModelDims dims, std::uint64_t seed);

  ModelDims dims() const noexcept { return dims_; }
  const LayerArray& layers() const noexcept { return layers_; }
  const DenseLayer& layer(std::size_t i) const { return layers_.at(i); }
  DenseLayer& mutable_layer(std::size_t i);
  LayerArray& mutable_layers();

  std::uint64_t version() const noexcept { return version_; }
  Eigen::Index parameter_count() const;

 private:
  void touch();

  ModelDims dims_;
  LayerArray layers_;
  std::uint64_t version_;
};

/// Same shapes as Classifier::layers(), holding gradients.
using ParameterGradients = LayerArray;

ParameterGradients zero_gradients(ModelDims dims);

/// Activations cached by a forward pass, enough for an exact backward pass.
struct GradientTape {
  std::uint64_t model_version = 0;
  ModelDims dims;
  Points input;
  Eigen::MatrixXd pre1, act1;     // N x h1
  Eigen::MatrixXd pre2, act2;     // N x h2
  Eigen::VectorXi argmax;         // h2, lowest maximizing point index
  Eigen::VectorXd pooled;         // h2
  Eigen::VectorXd pre3, act3;     // h3
};

struct ForwardResult {
  Eigen::VectorXd logits;
  GradientTape tape;
};

/// Throws ShapeError if the cloud is empty or the model shapes do not chain.
ForwardResult forward(const Classifier& model, const Points& points);

/// Logits only.
Eigen::VectorXd logits(const Classifier& model, const Points& points);

/// Argmax of the logits, lowest class index on ties.
int predict(const Classifier& model, const Points& points);
int argmax(const Eigen::VectorXd& values);

/// Gradient of <loss_grad_logits, Z> with respect to the input coordinates.
/// Max-pool ties route the whole gradient to the lowest-index maximizer.
/// Throws StaleTape if the model changed since the forward pass.
Points backward_input(const Classifier& model, const GradientTape& tape,
                      const Eigen::VectorXd& loss_grad_logits);

ParameterGradients backward_params(const Classifier& model, const GradientTape& tape,
                                   const Eigen::VectorXd& loss_grad_logits);

/// Both gradients in one pass; either output may be null.
void backward(const Classifier& model, const GradientTape& tape, const Eigen::VectorXd& loss_grad_logits,
              Points* input_grad, ParameterGradients* param_grads);

/// Softmax cross-entropy of logits against a label; writes dloss/dlogits
/// when `grad` is non-null.
double cross_entropy(const Eigen::VectorXd& logits, int label, Eigen::VectorXd* grad = nullptr);

}  // namespace aof
