#include "aof/attack.hpp"

#include "aof/error.hpp"
#include "aof/parallel.hpp"
#include "aof/train.hpp"

#include <cmath>
#include <iostream>
#include <limits>
#include <mutex>
#include <random>

namespace aof {

void AttackConfig::validate() const {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw InvalidArgument("gamma must lie in [0, 1]");
  if (!(eps_inf > 0.0) || !std::isfinite(eps_inf)) throw InvalidArgument("eps_inf must be positive");
  if (m < 0) throw InvalidArgument("m must be non-negative");
  if (k < 1) throw InvalidArgument("k must be at least 1");
  if (n_iter < 1) throw InvalidArgument("n_iter must be at least 1");
  if (inits < 1) throw InvalidArgument("inits must be at least 1");
  if (!(learning_rate > 0.0)) throw InvalidArgument("learning_rate must be positive");
  if (!(kappa >= 0.0) || !std::isfinite(kappa)) throw InvalidArgument("kappa must be non-negative");
  if (mode.target && *mode.target < 0) throw InvalidArgument("target class must be non-negative");
  if (bandwidth && !(*bandwidth > 0.0)) throw InvalidArgument("bandwidth must be positive");
}

namespace {

int best_other(const Eigen::VectorXd& z, int skip) {
  int best = -1;
  for (int y = 0; y < z.size(); ++y) {
    if (y != skip && (best < 0 || z(y) > z(best))) best = y;
  }
  return best;
}

void check_label(const Eigen::VectorXd& z, int label) {
  if (z.size() < 2) throw InvalidArgument("margin loss needs at least two classes");
  if (label < 0 || label >= z.size()) throw InvalidArgument("class index out of range for margin loss");
}

}  // namespace

double margin_loss(const Eigen::VectorXd& z, int gt, double kappa, Eigen::VectorXd* grad) {
  check_label(z, gt);
  const int other = best_other(z, gt);
  const double gap = z(gt) - z(other);
  if (grad) *grad = Eigen::VectorXd::Zero(z.size());
  if (gap > -kappa) {
    if (grad) {
      (*grad)(gt) = 1.0;
      (*grad)(other) = -1.0;
    }
    return gap;
  }
  return -kappa;
}

double targeted_margin_loss(const Eigen::VectorXd& z, int target, double kappa, Eigen::VectorXd* grad) {
  check_label(z, target);
  const int other = best_other(z, target);
  const double gap = z(other) - z(target);
  if (grad) *grad = Eigen::VectorXd::Zero(z.size());
  if (gap > -kappa) {
    if (grad) {
      (*grad)(other) = 1.0;
      (*grad)(target) = -1.0;
    }
    return gap;
  }
  return -kappa;
}

namespace {

// Margin loss of one cloud and its gradient with respect to the coordinates.
double cloud_loss(const Classifier& model, const Points& cloud, int label, const AttackConfig& cfg, Points* grad) {
  ForwardResult fw = forward(model, cloud);
  Eigen::VectorXd dz;
  const double loss = cfg.mode.targeted() ? targeted_margin_loss(fw.logits, label, cfg.kappa, &dz)
                                          : margin_loss(fw.logits, label, cfg.kappa, &dz);
  if (grad) *grad = backward_input(model, fw.tape, dz);
  return loss;
}

int attack_label(const PointCloud& cloud, const AttackConfig& cfg) {
  if (cfg.mode.target) return *cfg.mode.target;
  if (!cloud.label) throw InvalidArgument("untargeted attack needs a labeled cloud");
  return *cloud.label;
}

Points clip(const Points& delta, double eps) { return delta.cwiseMax(-eps).cwiseMin(eps); }

Points initial_perturbation(Eigen::Index n, int init, double eps, std::uint64_t seed) {
  if (init == 0) return Points::Zero(n, 3);
  std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(init)));
  std::uniform_real_distribution<double> u(-eps / 10.0, eps / 10.0);
  Points d(n, 3);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int a = 0; a < 3; ++a) d(i, a) = u(rng);
  }
  return d;
}

Eigen::Index effective_m(Eigen::Index m, Eigen::Index n) {
  if (m <= n) return m;
  static std::once_flag once;
  std::call_once(once, [&] {
    std::cerr << "warning: m=" << m << " exceeds the cloud size N=" << n << "; clamping m to N\n";
  });
  return n;
}

struct Candidate {
  Points delta;
  double loss = 0.0;
};

template <typename RunInit>
AttackResult select_best(const Classifier& model, const PointCloud& cloud, const AttackConfig& cfg, int label,
                         Eigen::Index m_used, RunInit&& run_init) {
  std::optional<AttackResult> best;
  std::optional<AttackResult> last;
  for (int init = 0; init < cfg.inits; ++init) {
    Candidate cand = run_init(init);
    Points adv_points = cloud.points() + cand.delta;
    const int pred = argmax(logits(model, adv_points));
    const bool success = cfg.mode.targeted() ? pred == label : pred != label;
    AttackResult r{cloud.with_points(std::move(adv_points)), std::move(cand.delta), success, pred,
                   cfg.n_iter * cfg.inits, cand.loss, m_used};
    if (success && (!best || linf_norm(r.perturbation) < linf_norm(best->perturbation))) best = r;
    last = std::move(r);
  }
  return best ? *best : *last;
}

}  // namespace

LossAndGradient aof_loss(const Classifier& model, const Points& adv, const Points& adv_lfc, int label,
                         const AttackConfig& cfg) {
  if (adv.rows() != adv_lfc.rows()) throw ShapeError("X' and X'_lfc must have the same number of points");
  const double g = cfg.gamma;
  LossAndGradient out;
  out.gradient = Points::Zero(adv.rows(), 3);
  // A term with zero weight is skipped; it contributes exactly nothing.
  if (g < 1.0) {
    Points grad;
    out.loss += (1.0 - g) * cloud_loss(model, adv, label, cfg, &grad);
    out.gradient += (1.0 - g) * grad;
  }
  if (g > 0.0) {
    Points grad;
    out.loss += g * cloud_loss(model, adv_lfc, label, cfg, &grad);
    out.gradient += g * grad;
  }
  return out;
}

AttackResult aof_attack(const Classifier& model, const PointCloud& cloud, const AttackConfig& cfg,
                        std::uint64_t seed) {
  cfg.validate();
  const int label = attack_label(cloud, cfg);
  const Points& x = cloud.points();
  const Eigen::Index n = x.rows();
  const Eigen::Index m = effective_m(cfg.m, n);

  // The basis is fixed by the clean geometry for the whole attack.
  const SpectralBasis basis = spectral_basis(x, cfg.k, cfg.bandwidth);
  const Points x_lfc = basis.lowpass(x, m);

  auto run_init = [&](int init) {
    Points delta = initial_perturbation(n, init, cfg.eps_inf, seed);
    Adam adam(cfg.learning_rate);
    for (int it = 0; it < cfg.n_iter; ++it) {
      PerturbationSplit split = project_perturbation(delta, basis, m);
      const LossAndGradient lg = aof_loss(model, x + delta, x_lfc + split.lfc, label, cfg);
      adam.tick();
      adam.step(0, split.lfc, lg.gradient);
      split.lfc = basis.lowpass(split.lfc, m);
      delta = clip(split.lfc + split.hfc, cfg.eps_inf);
    }
    const PerturbationSplit split = project_perturbation(delta, basis, m);
    const double loss = aof_loss(model, x + delta, x_lfc + split.lfc, label, cfg).loss;
    return Candidate{std::move(delta), loss};
  };
  return select_best(model, cloud, cfg, label, m, run_init);
}

AttackResult baseline_attack(const Classifier& model, const PointCloud& cloud, const AttackConfig& cfg,
                             std::uint64_t seed) {
  cfg.validate();
  const int label = attack_label(cloud, cfg);
  const Points& x = cloud.points();
  const Eigen::Index n = x.rows();

  auto run_init = [&](int init) {
    Points delta = initial_perturbation(n, init, cfg.eps_inf, seed);
    Adam adam(cfg.learning_rate);
    for (int it = 0; it < cfg.n_iter; ++it) {
      Points grad;
      cloud_loss(model, x + delta, label, cfg, &grad);
      adam.tick();
      adam.step(0, delta, grad);
      delta = clip(delta, cfg.eps_inf);
    }
    const double loss = cloud_loss(model, x + delta, label, cfg, nullptr);
    return Candidate{std::move(delta), loss};
  };
  return select_best(model, cloud, cfg, label, n, run_init);
}

AttackResult run_attack(const Classifier& model, const PointCloud& cloud, const AttackConfig& cfg, std::uint64_t seed) {
  return cfg.variant == AttackVariant::Aof ? aof_attack(model, cloud, cfg, seed) : baseline_attack(model, cloud, cfg, seed);
}

std::vector<BatchItem> attack_batch(const Classifier& model, const std::vector<PointCloud>& clouds,
                                    const AttackConfig& cfg, std::uint64_t seed, int threads) {
  cfg.validate();
  std::vector<BatchItem> out(clouds.size());
  parallel_for(clouds.size(), threads, [&](std::size_t i) {
    try {
      out[i].result = run_attack(model, clouds[i], cfg, derive_seed(seed, i));
    } catch (const std::exception& e) {
      out[i].error = e.what();
    }
  });
  return out;
}

std::vector<PointCloud> adversarial_clouds(const std::vector<BatchItem>& batch, const std::vector<PointCloud>& clean) {
  if (batch.size() != clean.size()) throw ShapeError("batch and clean cloud counts differ");
  std::vector<PointCloud> out;
  out.reserve(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    out.push_back(batch[i].result ? batch[i].result->adversarial : clean[i]);
  }
  return out;
}

}  // namespace aof
