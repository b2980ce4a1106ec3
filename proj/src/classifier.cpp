#include "aof/classifier.hpp"

#include "aof/error.hpp"

#include <atomic>
#include <cmath>
#include <random>
#include <string>

namespace aof {

namespace {

std::uint64_t next_version() {
  static std::atomic<std::uint64_t> counter{1};
  return counter.fetch_add(1, std::memory_order_relaxed);
}

std::array<std::pair<int, int>, kNumLayers> layer_shapes(ModelDims d) {
  return {{{d.h1, 3}, {d.h2, d.h1}, {d.h3, d.h2}, {d.classes, d.h3}}};
}

void check_dims(ModelDims d) {
  if (d.h1 < 1 || d.h2 < 1 || d.h3 < 1 || d.classes < 1) throw InvalidArgument("model dimensions must be positive");
}

}  // namespace

Classifier::Classifier(ModelDims dims) : dims_(dims), version_(next_version()) {
  check_dims(dims);
  const auto shapes = layer_shapes(dims);
  for (std::size_t i = 0; i < kNumLayers; ++i) {
    layers_[i].weight = Eigen::MatrixXd::Zero(shapes[i].first, shapes[i].second);
    layers_[i].bias = Eigen::VectorXd::Zero(shapes[i].first);
  }
}

Classifier Classifier::random(ModelDims dims, std::uint64_t seed) {
  Classifier model(dims);
  std::mt19937_64 rng(seed);
  for (auto& layer : model.layers_) {
    std::normal_distribution<double> g(0.0, std::sqrt(2.0 / static_cast<double>(layer.weight.cols())));
    // Filled row by row so the draw order matches the file layout.
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) layer.weight(r, c) = g(rng);
    }
  }
  model.touch();
  return model;
}

DenseLayer& Classifier::mutable_layer(std::size_t i) {
  touch();
  return layers_.at(i);
}

LayerArray& Classifier::mutable_layers() {
  touch();
  return layers_;
}

void Classifier::touch() { version_ = next_version(); }

Eigen::Index Classifier::parameter_count() const {
  Eigen::Index total = 0;
  for (const auto& l : layers_) total += l.weight.size() + l.bias.size();
  return total;
}

ParameterGradients zero_gradients(ModelDims dims) {
  ParameterGradients g;
  const auto shapes = layer_shapes(dims);
  for (std::size_t i = 0; i < kNumLayers; ++i) {
    g[i].weight = Eigen::MatrixXd::Zero(shapes[i].first, shapes[i].second);
    g[i].bias = Eigen::VectorXd::Zero(shapes[i].first);
  }
  return g;
}

namespace {

void check_shapes(const Classifier& model, const Points& points) {
  if (points.rows() < 1) throw ShapeError("forward needs at least one point");
  const auto shapes = layer_shapes(model.dims());
  for (std::size_t i = 0; i < kNumLayers; ++i) {
    const auto& l = model.layer(i);
    if (l.weight.rows() != shapes[i].first || l.weight.cols() != shapes[i].second ||
        l.bias.size() != shapes[i].first) {
      throw ShapeError("layer " + std::to_string(i) + " does not match the model dimensions");
    }
  }
}

}  // namespace

ForwardResult forward(const Classifier& model, const Points& points) {
  check_shapes(model, points);
  const auto& L = model.layers();
  ForwardResult out;
  GradientTape& t = out.tape;
  t.model_version = model.version();
  t.dims = model.dims();
  t.input = points;

  t.pre1.noalias() = points * L[0].weight.transpose();
  t.pre1.rowwise() += L[0].bias.transpose();
  t.act1 = t.pre1.cwiseMax(0.0);

  t.pre2.noalias() = t.act1 * L[1].weight.transpose();
  t.pre2.rowwise() += L[1].bias.transpose();
  t.act2 = t.pre2.cwiseMax(0.0);

  const Eigen::Index h2 = t.act2.cols();
  t.argmax.resize(h2);
  t.pooled.resize(h2);
  for (Eigen::Index c = 0; c < h2; ++c) {
    Eigen::Index best = 0;
    double value = t.act2(0, c);
    for (Eigen::Index p = 1; p < t.act2.rows(); ++p) {
      if (t.act2(p, c) > value) {
        value = t.act2(p, c);
        best = p;
      }
    }
    t.argmax(c) = static_cast<int>(best);
    t.pooled(c) = value;
  }

  t.pre3 = L[2].weight * t.pooled + L[2].bias;
  t.act3 = t.pre3.cwiseMax(0.0);
  out.logits = L[3].weight * t.act3 + L[3].bias;
  return out;
}

Eigen::VectorXd logits(const Classifier& model, const Points& points) {
  check_shapes(model, points);
  const auto& L = model.layers();
  Eigen::MatrixXd h1 = points * L[0].weight.transpose();
  h1.rowwise() += L[0].bias.transpose();
  h1 = h1.cwiseMax(0.0);
  Eigen::MatrixXd h2 = h1 * L[1].weight.transpose();
  h2.rowwise() += L[1].bias.transpose();
  const Eigen::VectorXd pooled = h2.cwiseMax(0.0).colwise().maxCoeff().transpose();
  const Eigen::VectorXd h3 = (L[2].weight * pooled + L[2].bias).cwiseMax(0.0);
  return L[3].weight * h3 + L[3].bias;
}

int argmax(const Eigen::VectorXd& values) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < values.size(); ++i) {
    if (values(i) > values(best)) best = i;
  }
  return static_cast<int>(best);
}

int predict(const Classifier& model, const Points& points) { return argmax(logits(model, points)); }

void backward(const Classifier& model, const GradientTape& tape, const Eigen::VectorXd& dz, Points* input_grad,
              ParameterGradients* param_grads) {
  if (tape.model_version != model.version() || !(tape.dims == model.dims())) {
    throw StaleTape("gradient tape does not belong to the current model parameters");
  }
  if (dz.size() != model.dims().classes) throw ShapeError("loss gradient length must equal the class count");
  const auto& L = model.layers();
  const Eigen::Index n = tape.input.rows();

  const Eigen::VectorXd dpre3 = (L[3].weight.transpose() * dz).cwiseProduct((tape.pre3.array() > 0.0).cast<double>().matrix());
  const Eigen::VectorXd dpooled = L[2].weight.transpose() * dpre3;

  // Only the pooled maximizer of each channel receives gradient.
  const Eigen::Index h1 = model.dims().h1, h2 = model.dims().h2;
  Eigen::MatrixXd dpre1 = Eigen::MatrixXd::Zero(n, h1);
  Eigen::VectorXd db2 = Eigen::VectorXd::Zero(h2);
  Eigen::MatrixXd dw2;
  if (param_grads) dw2 = Eigen::MatrixXd::Zero(h2, h1);
  for (Eigen::Index c = 0; c < h2; ++c) {
    const Eigen::Index p = tape.argmax(c);
    if (!(tape.pre2(p, c) > 0.0) || dpooled(c) == 0.0) continue;
    const double g = dpooled(c);
    db2(c) = g;
    dpre1.row(p).noalias() += g * L[1].weight.row(c);
    if (param_grads) dw2.row(c) = g * tape.act1.row(p);
  }
  dpre1 = dpre1.cwiseProduct((tape.pre1.array() > 0.0).cast<double>().matrix());

  if (input_grad) *input_grad = dpre1 * L[0].weight;

  if (param_grads) {
    ParameterGradients& g = *param_grads;
    g[3].weight = dz * tape.act3.transpose();
    g[3].bias = dz;
    g[2].weight = dpre3 * tape.pooled.transpose();
    g[2].bias = dpre3;
    g[1].weight = std::move(dw2);
    g[1].bias = db2;
    g[0].weight = dpre1.transpose() * tape.input;
    g[0].bias = dpre1.colwise().sum().transpose();
  }
}

Points backward_input(const Classifier& model, const GradientTape& tape, const Eigen::VectorXd& dz) {
  Points out;
  backward(model, tape, dz, &out, nullptr);
  return out;
}

ParameterGradients backward_params(const Classifier& model, const GradientTape& tape, const Eigen::VectorXd& dz) {
  ParameterGradients out;
  backward(model, tape, dz, nullptr, &out);
  return out;
}

double cross_entropy(const Eigen::VectorXd& z, int label, Eigen::VectorXd* grad) {
  if (label < 0 || label >= z.size()) throw InvalidArgument("label out of range for cross-entropy");
  const double zmax = z.maxCoeff();
  const Eigen::VectorXd e = (z.array() - zmax).exp().matrix();
  const double sum = e.sum();
  if (grad) {
    *grad = e / sum;
    (*grad)(label) -= 1.0;
  }
  return std::log(sum) + zmax - z(label);
}

}  // namespace aof
