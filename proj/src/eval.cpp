#include "aof/eval.hpp"

#include "aof/error.hpp"
#include "aof/parallel.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace aof {

namespace {

void count_outcomes(EvalReport& r, const std::vector<PointCloud>& clean, const std::vector<int>& clean_pred,
                    const std::vector<int>& adv_pred, int num_classes) {
  r.total = static_cast<int>(clean.size());
  r.per_class.assign(static_cast<std::size_t>(num_classes), ClassCounts{});
  for (std::size_t i = 0; i < clean.size(); ++i) {
    const int label = *clean[i].label;
    if (clean_pred[i] != label) continue;
    ++r.correct_clean;
    ++r.attacked;
    auto& pc = r.per_class[static_cast<std::size_t>(label)];
    ++pc.correct_clean;
    if (adv_pred[i] != label) {
      ++r.fooled;
      ++pc.fooled;
    }
  }
  if (r.attacked > 0) r.asr = static_cast<double>(r.fooled) / static_cast<double>(r.attacked);
}

void check_labels(const Classifier& model, const std::vector<PointCloud>& clean) {
  for (const auto& c : clean) {
    if (!c.label) throw InvalidArgument("evaluation needs labeled clean clouds");
    if (*c.label < 0 || *c.label >= model.dims().classes) throw InvalidArgument("label exceeds model class count");
  }
}

std::vector<int> predictions(const Classifier& model, const std::vector<PointCloud>& clouds, int threads) {
  std::vector<int> out(clouds.size());
  parallel_for(clouds.size(), threads, [&](std::size_t i) { out[i] = predict(model, clouds[i].points()); });
  return out;
}

}  // namespace

EvalReport asr(const Classifier& model, const std::vector<PointCloud>& clean, const std::vector<PointCloud>& adversarial,
               int threads) {
  if (clean.size() != adversarial.size()) throw ShapeError("clean and adversarial sequences differ in length");
  check_labels(model, clean);
  EvalReport r;
  count_outcomes(r, clean, predictions(model, clean, threads), predictions(model, adversarial, threads),
                 model.dims().classes);
  return r;
}

TransferMatrix transfer_matrix(const std::vector<Classifier>& models, const std::vector<PointCloud>& clouds,
                               const AttackConfig& cfg, std::uint64_t seed, int threads) {
  if (models.empty()) throw InvalidArgument("transfer_matrix needs at least one model");
  const auto n = static_cast<Eigen::Index>(models.size());
  TransferMatrix out;
  out.asr = Eigen::MatrixXd::Constant(n, n, std::numeric_limits<double>::quiet_NaN());
  out.reports.resize(models.size());
  for (std::size_t i = 0; i < models.size(); ++i) {
    out.attacks.push_back(attack_batch(models[i], clouds, cfg, seed, threads));
    const auto adv = adversarial_clouds(out.attacks.back(), clouds);
    for (std::size_t j = 0; j < models.size(); ++j) {
      EvalReport r = asr(models[j], clouds, adv, threads);
      r.metadata["seed"] = std::to_string(seed);
      r.metadata["crafted_on"] = std::to_string(i);
      r.metadata["evaluated_on"] = std::to_string(j);
      if (r.asr) out.asr(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = *r.asr;
      out.reports[i].push_back(std::move(r));
    }
  }
  return out;
}

EvalReport defense_eval(const Classifier& model, const std::vector<PointCloud>& clean,
                        const std::vector<PointCloud>& adversarial, DefenseKind defense, const DefenseConfig& cfg,
                        std::uint64_t seed, int threads) {
  if (clean.size() != adversarial.size()) throw ShapeError("clean and adversarial sequences differ in length");
  check_labels(model, clean);
  std::vector<int> adv_pred(adversarial.size());
  parallel_for(adversarial.size(), threads, [&](std::size_t i) {
    const PointCloud& a = adversarial[i];
    if (defense == DefenseKind::Srs) {
      const Eigen::Index keep = cfg.srs_keep > 0 ? cfg.srs_keep : (a.size() + 1) / 2;
      adv_pred[i] = predict(model, srs(a, keep, derive_seed(seed, i)).points());
    } else {
      adv_pred[i] = predict(model, sor(a, cfg.sor_k, cfg.sor_alpha).points());
    }
  });
  EvalReport r;
  count_outcomes(r, clean, predictions(model, clean, threads), adv_pred, model.dims().classes);
  r.metadata["defense"] = defense == DefenseKind::Srs ? "srs" : "sor";
  r.metadata["seed"] = std::to_string(seed);
  if (defense == DefenseKind::Srs) {
    r.metadata["srs_keep"] = cfg.srs_keep > 0 ? std::to_string(cfg.srs_keep) : std::string("ceil(N/2)");
  } else {
    r.metadata["sor_k"] = std::to_string(cfg.sor_k);
    r.metadata["sor_alpha"] = std::to_string(cfg.sor_alpha);
  }
  return r;
}

LfcSweep lfc_accuracy_sweep(const Classifier& model, const std::vector<PointCloud>& clouds,
                            const std::vector<Eigen::Index>& ms, int k, int threads) {
  if (ms.empty()) throw InvalidArgument("lfc_accuracy_sweep needs at least one m");
  for (const auto& c : clouds) {
    if (!c.label) throw InvalidArgument("lfc_accuracy_sweep needs labeled clouds");
    for (Eigen::Index m : ms) {
      if (m < 0 || m > c.size()) throw InvalidArgument("m must lie in [0, N] for every cloud");
    }
  }
  std::vector<std::vector<char>> correct(clouds.size());
  std::vector<char> original(clouds.size());
  parallel_for(clouds.size(), threads, [&](std::size_t i) {
    const PointCloud& c = clouds[i];
    const SpectralBasis basis = spectral_basis(c.points(), k);
    original[i] = predict(model, c.points()) == *c.label;
    for (Eigen::Index m : ms) correct[i].push_back(predict(model, basis.lowpass(c.points(), m)) == *c.label);
  });

  LfcSweep out;
  out.ms = ms;
  const double denom = clouds.empty() ? 1.0 : static_cast<double>(clouds.size());
  for (std::size_t j = 0; j < ms.size(); ++j) {
    int hits = 0;
    for (const auto& row : correct) hits += row[j];
    out.accuracy.push_back(hits / denom);
  }
  int hits = 0;
  for (char o : original) hits += o;
  out.original_accuracy = hits / denom;
  return out;
}

SpectralCdf spectral_cdf(std::span<const Points> perturbations, std::span<const SpectralBasis> bases) {
  if (perturbations.size() != bases.size()) throw ShapeError("each perturbation needs its own basis");
  if (perturbations.empty()) throw InvalidArgument("spectral_cdf needs at least one perturbation");
  const Eigen::Index n = perturbations.front().rows();
  SpectralCdf out;
  out.cumulative = Eigen::VectorXd::Zero(n);
  for (std::size_t s = 0; s < perturbations.size(); ++s) {
    const Points& d = perturbations[s];
    if (d.rows() != n || bases[s].size() != n) throw ShapeError("spectral_cdf needs a uniform point count");
    const Eigen::VectorXd weight = bases[s].analyze(d).rowwise().squaredNorm();
    const double total = weight.sum();
    if (!(total > 0.0)) {
      ++out.skipped;
      continue;
    }
    double running = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      running += weight(i);
      out.cumulative(i) += running / total;
    }
    ++out.used;
  }
  if (out.used == 0) throw InvalidArgument("every perturbation is zero; spectral distribution undefined");
  out.cumulative /= static_cast<double>(out.used);
  return out;
}

std::optional<double> mean_defined(std::span<const std::optional<double>> values) {
  double sum = 0.0;
  int count = 0;
  for (const auto& v : values) {
    if (v) {
      sum += *v;
      ++count;
    }
  }
  if (count == 0) return std::nullopt;
  return sum / count;
}

std::vector<AblationRow> ablation_sweep(AblationParameter parameter, const std::vector<double>& values,
                                        const AttackConfig& base_cfg, const std::vector<Classifier>& models,
                                        const std::vector<PointCloud>& clouds, std::uint64_t seed, int threads) {
  if (values.empty()) throw InvalidArgument("ablation_sweep needs at least one value");
  if (models.empty()) throw InvalidArgument("ablation_sweep needs a victim model");
  std::vector<AblationRow> rows;
  for (double value : values) {
    AttackConfig cfg = base_cfg;
    switch (parameter) {
      case AblationParameter::M: cfg.m = static_cast<Eigen::Index>(std::llround(value)); break;
      case AblationParameter::Gamma: cfg.gamma = value; break;
      case AblationParameter::EpsInf: cfg.eps_inf = value; break;
    }
    const auto batch = attack_batch(models[0], clouds, cfg, seed, threads);
    const auto adv = adversarial_clouds(batch, clouds);
    AblationRow row;
    row.value = value;
    row.white_box_asr = asr(models[0], clouds, adv, threads).asr;
    std::vector<std::optional<double>> transfers;
    for (std::size_t j = 1; j < models.size(); ++j) transfers.push_back(asr(models[j], clouds, adv, threads).asr);
    row.mean_transfer_asr = mean_defined(transfers);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace aof
