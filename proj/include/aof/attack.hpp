#pragma once

#include "aof/classifier.hpp"
#include "aof/dataset.hpp"
#include "aof/spectral.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace aof {

enum class AttackVariant { Aof, BaselineFullSpectrum };

/// Untargeted when `target` is empty.
struct AttackMode {
  std::optional<int> target;

  bool targeted() const noexcept { return target.has_value(); }
};

/// Attack hyperparameters. Defaults are the reference protocol: Adam with
/// lr 0.01, 200 iterations, 2 initializations, margin 30, balance 0.25,
/// 100 low-frequency eigenvectors and an l_inf budget of 0.18.
struct AttackConfig {
  Eigen::Index m = 100;
  int k = 10;
  double gamma = 0.25;
  double kappa = 30.0;
  double eps_inf = 0.18;
  int n_iter = 200;
  int inits = 2;
  double learning_rate = 0.01;
  AttackMode mode;
  AttackVariant variant = AttackVariant::Aof;
  std::optional<double> bandwidth;  // kernel eps; mean kNN distance when empty

  /// Throws InvalidArgument on out-of-range values (m is checked against N
  /// by the attack itself).
  void validate() const;
};

struct AttackResult {
  PointCloud adversarial;
  Points perturbation;
  bool success = false;
  int victim_pred = -1;
  int iterations_used = 0;
  double final_loss = 0.0;
  Eigen::Index m_used = 0;  // effective low-frequency size after clamping to N
};

/// Untargeted margin loss max(Z_gt - max_{y != gt} Z_y, -kappa); writes the
/// gradient with respect to the logits when `grad` is non-null.
double margin_loss(const Eigen::VectorXd& logits, int gt, double kappa, Eigen::VectorXd* grad = nullptr);

/// Targeted margin loss max(max_{y != t} Z_y - Z_t, -kappa).
double targeted_margin_loss(const Eigen::VectorXd& logits, int target, double kappa,
                            Eigen::VectorXd* grad = nullptr);

struct LossAndGradient {
  double loss = 0.0;
  Points gradient;  // with respect to the low-frequency perturbation
};

/// (1 - gamma) l(X') + gamma l(X'_lfc), differentiated with respect to a free
/// N x 3 low-frequency perturbation that enters both X' and X'_lfc with unit
/// Jacobian. `label` is the ground truth (untargeted) or the target class.
LossAndGradient aof_loss(const Classifier& model, const Points& adv, const Points& adv_lfc, int label,
                         const AttackConfig& cfg);

/// Frequency-domain attack. The eigenbasis comes from the clean cloud once;
/// every iteration re-splits the perturbation, takes an Adam step on its
/// low-frequency part, projects that part back onto the first m eigenvectors,
/// recombines and clips to the l_inf budget.
///
/// The first initialization starts from zero, later ones from
/// uniform(-eps/10, eps/10) noise. The successful candidate with the smallest
/// l_inf norm is returned, else the last one.
AttackResult aof_attack(const Classifier& model, const PointCloud& cloud, const AttackConfig& cfg,
                        std::uint64_t seed = 0);

/// Same loop with the whole perturbation receiving the gradient of the
/// margin loss on X' only.
AttackResult baseline_attack(const Classifier& model, const PointCloud& cloud, const AttackConfig& cfg,
                             std::uint64_t seed = 0);

/// Dispatches on cfg.variant.
AttackResult run_attack(const Classifier& model, const PointCloud& cloud, const AttackConfig& cfg,
                        std::uint64_t seed = 0);

struct BatchItem {
  std::optional<AttackResult> result;
  std::string error;  // empty on success
};

/// Attacks every cloud independently, cloud i with seed derive_seed(seed, i).
/// Results do not depend on `threads`. Per-cloud failures are captured in
/// BatchItem::error.
std::vector<BatchItem> attack_batch(const Classifier& model, const std::vector<PointCloud>& clouds,
                                    const AttackConfig& cfg, std::uint64_t seed, int threads = 1);

/// Adversarial clouds of a batch; failed items fall back to the clean cloud.
std::vector<PointCloud> adversarial_clouds(const std::vector<BatchItem>& batch,
                                           const std::vector<PointCloud>& clean);

}  // namespace aof
