#include "aof/report.hpp"

#include "aof/error.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace aof {

std::string format_real(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

namespace {

std::string format_optional(const std::optional<double>& v) { return v ? format_real(*v) : std::string(); }

void write_text(const std::filesystem::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << body;
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace

void write_attack_csv(const std::filesystem::path& path, const std::vector<PointCloud>& clouds,
                      const std::vector<BatchItem>& batch) {
  if (clouds.size() != batch.size()) throw ShapeError("attack CSV needs one batch item per cloud");
  std::ostringstream s;
  s << "cloud_name,gt_label,victim_pred,success,linf_norm,iterations,final_loss\n";
  for (std::size_t i = 0; i < clouds.size(); ++i) {
    s << clouds[i].name << ',' << (clouds[i].label ? std::to_string(*clouds[i].label) : std::string()) << ',';
    if (const auto& r = batch[i].result) {
      s << r->victim_pred << ',' << (r->success ? 1 : 0) << ',' << format_real(linf_norm(r->perturbation)) << ','
        << r->iterations_used << ',' << format_real(r->final_loss) << '\n';
    } else {
      s << ",,,,\n";
    }
  }
  write_text(path, s.str());
}

void write_eval_csv(const std::filesystem::path& path, const EvalReport& report) {
  std::ostringstream s;
  s << "metric,value\n";
  s << "asr," << format_optional(report.asr) << '\n';
  s << "total," << report.total << '\n';
  s << "correct_clean," << report.correct_clean << '\n';
  s << "attacked," << report.attacked << '\n';
  s << "fooled," << report.fooled << '\n';
  for (std::size_t c = 0; c < report.per_class.size(); ++c) {
    s << "class_" << c << "_correct_clean," << report.per_class[c].correct_clean << '\n';
    s << "class_" << c << "_fooled," << report.per_class[c].fooled << '\n';
  }
  write_text(path, s.str());
}

void write_transfer_csv(const std::filesystem::path& path, const TransferMatrix& matrix,
                        const std::vector<std::string>& model_names) {
  const auto n = matrix.asr.rows();
  if (static_cast<Eigen::Index>(model_names.size()) != n) throw ShapeError("one name per model required");
  std::ostringstream s;
  s << "crafted_on";
  for (const auto& name : model_names) s << ',' << name;
  s << '\n';
  for (Eigen::Index i = 0; i < n; ++i) {
    s << model_names[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto& r = matrix.reports[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      s << ',' << format_optional(r.asr);
    }
    s << '\n';
  }
  write_text(path, s.str());
}

void write_cdf_csv(const std::filesystem::path& path, const SpectralCdf& cdf) {
  std::ostringstream s;
  s << "index,cumulative\n";
  for (Eigen::Index i = 0; i < cdf.cumulative.size(); ++i) s << i << ',' << format_real(cdf.cumulative(i)) << '\n';
  write_text(path, s.str());
}

void write_lfc_sweep_csv(const std::filesystem::path& path, const LfcSweep& sweep) {
  std::ostringstream s;
  s << "m,accuracy\n";
  for (std::size_t j = 0; j < sweep.ms.size(); ++j) s << sweep.ms[j] << ',' << format_real(sweep.accuracy[j]) << '\n';
  s << "original," << format_real(sweep.original_accuracy) << '\n';
  write_text(path, s.str());
}

void write_ablation_csv(const std::filesystem::path& path, const std::string& parameter,
                        const std::vector<AblationRow>& rows) {
  std::ostringstream s;
  s << parameter << ",white_box_asr,mean_transfer_asr\n";
  for (const auto& r : rows) {
    s << format_real(r.value) << ',' << format_optional(r.white_box_asr) << ',' << format_optional(r.mean_transfer_asr)
      << '\n';
  }
  write_text(path, s.str());
}

void write_key_values(const std::filesystem::path& path,
                      const std::vector<std::pair<std::string, std::string>>& entries) {
  std::ostringstream s;
  for (const auto& [k, v] : entries) s << k << '=' << v << '\n';
  write_text(path, s.str());
}

}  // namespace aof
