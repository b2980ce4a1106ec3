#pragma once

#include "aof/attack.hpp"
#include "aof/classifier.hpp"
#include "aof/defense.hpp"
#include "aof/spectral.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace aof {

struct ClassCounts {
  int correct_clean = 0;  // |S| restricted to the class
  int fooled = 0;         // |T| restricted to the class
};

/// Attack success rate |T| / |S_adv| where S is the set of clean clouds the
/// evaluation model classifies correctly, S_adv their adversarial
/// counterparts and T the members of S_adv it misclassifies.
struct EvalReport {
  std::optional<double> asr;  // empty when |S_adv| == 0
  int total = 0;
  int correct_clean = 0;  // |S|
  int attacked = 0;       // |S_adv|
  int fooled = 0;         // |T|
  std::vector<ClassCounts> per_class;
  std::map<std::string, std::string> metadata;
};

/// Throws ShapeError if the sequences differ in length, InvalidArgument on an
/// unlabeled clean cloud.
EvalReport asr(const Classifier& model, const std::vector<PointCloud>& clean,
               const std::vector<PointCloud>& adversarial, int threads = 1);

struct TransferMatrix {
  Eigen::MatrixXd asr;  // (i, j): crafted on model i, evaluated on model j; NaN if undefined
  std::vector<std::vector<EvalReport>> reports;
  std::vector<std::vector<BatchItem>> attacks;  // per crafting model
};

/// Attacks `clouds` against every model and evaluates each campaign on every
/// model. Membership in S is decided by the evaluation model.
TransferMatrix transfer_matrix(const std::vector<Classifier>& models, const std::vector<PointCloud>& clouds,
                               const AttackConfig& cfg, std::uint64_t seed, int threads = 1);

enum class DefenseKind { Srs, Sor };

/// Applies `defense` to each adversarial cloud (SRS cloud i seeded with
/// derive_seed(seed, i)) before classification. S is defined on the
/// undefended clean clouds.
EvalReport defense_eval(const Classifier& model, const std::vector<PointCloud>& clean,
                        const std::vector<PointCloud>& adversarial, DefenseKind defense,
                        const DefenseConfig& cfg, std::uint64_t seed, int threads = 1);

struct LfcSweep {
  std::vector<Eigen::Index> ms;
  std::vector<double> accuracy;  // one per m
  double original_accuracy = 0.0;
};

/// Accuracy of the model on the low-frequency component with m eigenvectors,
/// for every m. The basis of each cloud is computed once.
LfcSweep lfc_accuracy_sweep(const Classifier& model, const std::vector<PointCloud>& clouds,
                            const std::vector<Eigen::Index>& ms, int k, int threads = 1);

/// Mean over samples of the cumulative share of perturbation energy in the
/// first i+1 eigenvectors.
struct SpectralCdf {
  Eigen::VectorXd cumulative;
  int used = 0;
  int skipped = 0;  // zero perturbations
};

/// Energy at index i of a sample is sum over axes of <delta_axis, v_i>^2,
/// normalized to sum 1 per sample. Throws ShapeError on mixed sizes and
/// InvalidArgument when every perturbation is zero.
SpectralCdf spectral_cdf(std::span<const Points> perturbations, std::span<const SpectralBasis> bases);

enum class AblationParameter { M, Gamma, EpsInf };

struct AblationRow {
  double value = 0.0;
  std::optional<double> white_box_asr;
  std::optional<double> mean_transfer_asr;  // over models[1..]
};

/// One attack campaign against models[0] per value.
std::vector<AblationRow> ablation_sweep(AblationParameter parameter, const std::vector<double>& values,
                                        const AttackConfig& base_cfg, const std::vector<Classifier>& models,
                                        const std::vector<PointCloud>& clouds, std::uint64_t seed,
                                        int threads = 1);

/// Mean of the defined entries, empty if none are.
std::optional<double> mean_defined(std::span<const std::optional<double>> values);

}  // namespace aof
