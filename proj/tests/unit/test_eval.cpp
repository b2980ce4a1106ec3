#include "aof/attack.hpp"
#include "aof/dataset.hpp"
#include "aof/defense.hpp"
#include "aof/error.hpp"
#include "aof/eval.hpp"
#include "aof/report.hpp"
#include "aof/spectral.hpp"
#include "aof/train.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

using namespace aof;
using aof::testing::random_points;
using aof::testing::TempDir;

namespace {

// logits = per-axis max coordinate
Classifier axis_model() {
  Classifier m(ModelDims{3, 3, 3, 3});
  auto& L = m.mutable_layers();
  for (auto& layer : L) layer.weight = Eigen::MatrixXd::Identity(3, 3);
  L[0].bias.setConstant(10.0);
  L[3].bias.setConstant(-10.0);
  return m;
}

PointCloud point(double x, double y, double z, std::optional<int> label = std::nullopt) {
  return PointCloud(Points(Eigen::RowVector3d(x, y, z)), label);
}

struct SmallSetup {
  LabeledDataset data = generate_shape_dataset(10, 32, 3, 3);
  std::vector<Classifier> models;
  std::vector<PointCloud> test;
  SmallSetup() {
    TrainConfig cfg;
    cfg.epochs = 6;
    cfg.seed = 1;
    models.push_back(train(data, cfg, ModelDims{16, 32, 16, 3}).model);
    cfg.seed = 2;
    models.push_back(train(data, cfg, ModelDims{12, 24, 12, 3}).model);
    test = data.subset(Split::Test).clouds;
    const auto extra = data.subset(Split::Train).clouds;
    test.insert(test.end(), extra.begin(), extra.begin() + 6);
  }
};

AttackConfig quick_config() {
  AttackConfig cfg;
  cfg.n_iter = 10;
  cfg.inits = 1;
  cfg.m = 10;
  cfg.k = 6;
  cfg.eps_inf = 0.1;
  return cfg;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("asr hand-enumerated case") {
  const Classifier m = axis_model();
  const std::vector<PointCloud> clean{point(1, 0, 0, 0), point(0, 1, 0, 1), point(0, 0, 1, 2), point(1, 0, 0, 1)};
  const std::vector<PointCloud> adv{point(0, 1, 0), point(1, 0, 0), point(0, 0, 1), point(0, 1, 0)};
  const EvalReport r = asr(m, clean, adv);
  REQUIRE(r.asr.has_value());
  CHECK(*r.asr == 2.0 / 3.0);
  CHECK(r.total == 4);
  CHECK(r.correct_clean == 3);
  CHECK(r.attacked == 3);
  CHECK(r.fooled == 2);
  CHECK(r.per_class[0].fooled == 1);
  CHECK(r.per_class[2].fooled == 0);
}

TEST_CASE("asr zero perturbation and undefined cases") {
  const Classifier m = axis_model();
  const std::vector<PointCloud> clean{point(1, 0, 0, 0), point(0, 1, 0, 1), point(0, 0, 1, 2)};
  const EvalReport zero = asr(m, clean, clean);
  CHECK(zero.asr == 0.0);

  const std::vector<PointCloud> wrong{point(1, 0, 0, 1), point(0, 1, 0, 2)};
  const EvalReport undefined = asr(m, wrong, wrong);
  CHECK(!undefined.asr.has_value());
  CHECK(undefined.attacked == 0);
  CHECK(undefined.fooled == 0);

  const std::vector<PointCloud> all_fooled_adv{point(0, 1, 0), point(0, 0, 1), point(1, 0, 0)};
  CHECK(asr(m, clean, all_fooled_adv).asr == 1.0);

  CHECK_THROWS_AS(asr(m, clean, wrong), ShapeError);
  CHECK_THROWS_AS(asr(m, {point(1, 0, 0)}, {point(1, 0, 0)}), InvalidArgument);
}

TEST_CASE("report cardinality chain and range") {
  SmallSetup s;
  const auto batch = attack_batch(s.models[0], s.test, quick_config(), 5);
  const auto adv = adversarial_clouds(batch, s.test);
  for (const auto& m : s.models) {
    const EvalReport r = asr(m, s.test, adv);
    CHECK(r.fooled <= r.attacked);
    CHECK(r.attacked <= r.correct_clean);
    CHECK(r.correct_clean <= r.total);
    if (r.asr) {
      CHECK(*r.asr >= 0.0);
      CHECK(*r.asr <= 1.0);
    }
  }
}

TEST_CASE("transfer matrix diagonal equals white-box campaign ASR") {
  SmallSetup s;
  const AttackConfig cfg = quick_config();
  const TransferMatrix tm = transfer_matrix(s.models, s.test, cfg, 9);
  REQUIRE(tm.asr.rows() == 2);
  for (int i = 0; i < 2; ++i) {
    const auto adv = adversarial_clouds(tm.attacks[static_cast<std::size_t>(i)], s.test);
    const EvalReport wb = asr(s.models[static_cast<std::size_t>(i)], s.test, adv);
    CHECK(wb.asr.has_value());
    CHECK(tm.asr(i, i) == *wb.asr);
  }
  const TransferMatrix single = transfer_matrix({s.models[0]}, s.test, cfg, 9);
  CHECK(single.asr(0, 0) == tm.asr(0, 0));

  const auto rows = ablation_sweep(AblationParameter::Gamma, {cfg.gamma}, cfg, s.models, s.test, 9);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].white_box_asr == tm.asr(0, 0));
  CHECK(rows[0].mean_transfer_asr == tm.asr(0, 1));
}

TEST_CASE("defense evaluation") {
  SmallSetup s;
  const Classifier& m = s.models[0];
  const auto batch = attack_batch(m, s.test, quick_config(), 2);
  const auto adv = adversarial_clouds(batch, s.test);

  DefenseConfig identity;
  identity.srs_keep = 32;
  const EvalReport plain = asr(m, s.test, adv);
  const EvalReport id = defense_eval(m, s.test, adv, DefenseKind::Srs, identity, 4);
  CHECK(id.asr == plain.asr);
  CHECK(id.fooled == plain.fooled);

  // zero perturbation: ASR equals the defense's own damage on S
  DefenseConfig half;
  const EvalReport dmg = defense_eval(m, s.test, s.test, DefenseKind::Srs, half, 4);
  int in_s = 0, broken = 0;
  for (std::size_t i = 0; i < s.test.size(); ++i) {
    if (predict(m, s.test[i].points()) != *s.test[i].label) continue;
    ++in_s;
    const PointCloud d = srs(s.test[i], 16, derive_seed(4, i));
    broken += predict(m, d.points()) != *s.test[i].label;
  }
  REQUIRE(dmg.asr.has_value());
  CHECK(*dmg.asr == static_cast<double>(broken) / in_s);

  const EvalReport sor_dmg = defense_eval(m, s.test, s.test, DefenseKind::Sor, half, 4);
  int sor_broken = 0;
  for (const auto& c : s.test) {
    if (predict(m, c.points()) != *c.label) continue;
    sor_broken += predict(m, sor(c, 2, 1.1).points()) != *c.label;
  }
  CHECK(*sor_dmg.asr == static_cast<double>(sor_broken) / in_s);
}

TEST_CASE("lfc accuracy sweep") {
  SmallSetup s;
  const LfcSweep sweep = lfc_accuracy_sweep(s.models[0], s.test, {1, 8, 32}, 10);
  REQUIRE(sweep.accuracy.size() == 3);
  CHECK(sweep.accuracy[2] == sweep.original_accuracy);
  CHECK(sweep.original_accuracy == accuracy(s.models[0], s.test));
  CHECK_THROWS_AS(lfc_accuracy_sweep(s.models[0], s.test, {33}, 10), InvalidArgument);
}

TEST_CASE("spectral cdf: step, uniform and dense oracle") {
  const Points p = random_points(16, 3);
  const SpectralBasis b = spectral_basis(p, 5);
  const Eigen::MatrixXd& v = b.eigenvectors();

  Points step = Points::Zero(16, 3);
  step.col(2) = v.col(0);
  std::vector<Points> d{step};
  std::vector<SpectralBasis> bases{b};
  SpectralCdf cdf = spectral_cdf(d, bases);
  CHECK((cdf.cumulative.array() - 1.0).abs().maxCoeff() <= 1e-12);

  Points uniform = Points::Zero(16, 3);
  uniform.col(0) = v * Eigen::VectorXd::Ones(16);
  d = {uniform};
  cdf = spectral_cdf(d, bases);
  for (int i = 0; i < 16; ++i) CHECK(std::abs(cdf.cumulative(i) - (i + 1) / 16.0) <= 1e-10);

  d = {random_points(16, 7), Points::Zero(16, 3), random_points(16, 8)};
  bases = {b, b, b};
  cdf = spectral_cdf(d, bases);
  CHECK(cdf.used == 2);
  CHECK(cdf.skipped == 1);
  CHECK(std::abs(cdf.cumulative(15) - 1.0) <= 1e-9);
  for (int i = 1; i < 16; ++i) CHECK(cdf.cumulative(i) >= cdf.cumulative(i - 1));
  for (int i = 0; i < 16; ++i) {
    const Eigen::MatrixXd proj = v.leftCols(i + 1) * v.leftCols(i + 1).transpose();
    double expected = 0;
    for (std::size_t s = 0; s < 3; s += 2) expected += (proj * d[s]).squaredNorm() / d[s].squaredNorm();
    CHECK(std::abs(cdf.cumulative(i) - expected / 2) <= 1e-8);
  }

  d = {Points::Zero(16, 3)};
  bases = {b};
  CHECK_THROWS_AS(spectral_cdf(d, bases), InvalidArgument);
}

TEST_CASE("mean_defined") {
  std::vector<std::optional<double>> v{0.5, std::nullopt, 1.0};
  CHECK(mean_defined(v) == 0.75);
  v = {std::nullopt};
  CHECK(!mean_defined(v));
}

TEST_CASE("report writers") {
  TempDir dir;
  const Classifier m = axis_model();
  const std::vector<PointCloud> clean{point(1, 0, 0, 0), point(0, 1, 0, 1), point(0, 0, 1, 2), point(1, 0, 0, 1)};
  const std::vector<PointCloud> adv{point(0, 1, 0), point(1, 0, 0), point(0, 0, 1), point(0, 1, 0)};
  write_eval_csv(dir / "e.csv", asr(m, clean, adv));
  const std::string e = slurp(dir / "e.csv");
  CHECK(e.rfind("metric,value\n", 0) == 0);
  CHECK(e.find("asr,0.66666666666666663\n") != std::string::npos);

  SpectralCdf cdf;
  cdf.cumulative = Eigen::Vector2d(0.25, 1.0);
  write_cdf_csv(dir / "c.csv", cdf);
  CHECK(slurp(dir / "c.csv") == "index,cumulative\n0,0.25\n1,1\n");

  write_key_values(dir / "kv.txt", {{"a", "1"}, {"b", "x y"}});
  CHECK(slurp(dir / "kv.txt") == "a=1\nb=x y\n");
  CHECK(format_real(0.1) == "0.10000000000000001");
}
