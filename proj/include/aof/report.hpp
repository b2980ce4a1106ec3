#pragma once

#include "aof/attack.hpp"
#include "aof/eval.hpp"

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace aof {

/// Shortest round-trip decimal for CSV output (printf "%.17g").
std::string format_real(double value);

/// `cloud_name,gt_label,victim_pred,success,linf_norm,iterations,final_loss`,
/// one row per cloud. Failed items get empty numeric fields.
void write_attack_csv(const std::filesystem::path& path, const std::vector<PointCloud>& clouds,
                      const std::vector<BatchItem>& batch);

/// Header `metric,value` plus per-class rows.
void write_eval_csv(const std::filesystem::path& path, const EvalReport& report);

void write_transfer_csv(const std::filesystem::path& path, const TransferMatrix& matrix,
                        const std::vector<std::string>& model_names);

/// Two columns: index,cumulative.
void write_cdf_csv(const std::filesystem::path& path, const SpectralCdf& cdf);

void write_lfc_sweep_csv(const std::filesystem::path& path, const LfcSweep& sweep);

void write_ablation_csv(const std::filesystem::path& path, const std::string& parameter,
                        const std::vector<AblationRow>& rows);

/// One `key=value` per line, UTF-8.
void write_key_values(const std::filesystem::path& path,
                      const std::vector<std::pair<std::string, std::string>>& entries);

}  // namespace aof
