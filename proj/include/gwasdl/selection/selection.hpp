#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gwasdl/assoc/gwas.hpp"
#include "gwasdl/core/cohort.hpp"
#include "gwasdl/core/split.hpp"
#include "gwasdl/nn/model.hpp"
#include "gwasdl/nn/train.hpp"

namespace gwasdl {

/// Which samples feed the association scan. PopulationLevel scans every
/// labelled sample before any split and therefore sees test labels.
enum class SelectionScope { PopulationLevel, TrainOnly };

std::string to_string(SelectionScope scope);
SelectionScope parse_selection_scope(const std::string& name);

struct SelectionResult {
    std::vector<std::size_t> snp_indices;  // ascending
    double threshold = 0.0;
    SelectionScope scope = SelectionScope::TrainOnly;
    std::size_t source_sample_count = 0;
    std::string disease;

    bool operator==(const SelectionResult&) const = default;
};

/// Indices of convergent SNPs with p < threshold. A threshold of 1 or more
/// keeps every convergent SNP.
std::vector<std::size_t> passing_snps(const std::vector<VariantStats>& stats, double threshold);

/// Scans the scope-defined samples and keeps SNPs with p < threshold.
/// TrainOnly scans a copy of the cohort holding only `train_indices`, so test
/// labels are never visible to the scan. Throws EmptySelection when nothing
/// passes and SpecInvalid for a threshold outside (0, 1].
SelectionResult select_snps(const Cohort& cohort, const std::string& disease, double threshold,
                            SelectionScope scope, std::span<const std::size_t> train_indices = {},
                            const ScanOptions& scan = {});

enum class LeakageModel { LogisticOnSelected, MlpStandard, CnnStandard };

std::string to_string(LeakageModel model);
LeakageModel parse_leakage_model(const std::string& name);

struct LeakageOptions {
    double threshold = 0.05;
    SplitSpec split;  // stratify_by "none" still stratifies on the disease
    LeakageModel model = LeakageModel::LogisticOnSelected;
    bool covariates_in_selection = false;
    double ridge_lambda = 1.0;  // LogisticOnSelected penalty
    nn::ModelConfig network;    // MlpStandard / CnnStandard template
    nn::TrainConfig training;
    ScanOptions scan;
};

struct LeakageReport {
    double auc_leaky = 0.5;
    double auc_clean = 0.5;
    std::size_t n_selected_leaky = 0;
    std::size_t n_selected_clean = 0;
    bool leaky_empty = false;  // EmptySelection fallback: AUC reported as 0.5
    bool clean_empty = false;
    double threshold = 0.0;
    std::uint64_t seed = 0;
    LeakageModel model_kind = LeakageModel::LogisticOnSelected;
    std::string disease;
    Split split;
};

/// Arm A selects on all labelled samples and then trains on the split; arm B
/// splits first and selects on the training rows only. Both arms share the
/// split and score the same test rows.
LeakageReport leakage_experiment(const Cohort& cohort, const std::string& disease, const LeakageOptions& options);

/// The split leakage_experiment would use for these options.
Split leakage_split(const Cohort& cohort, std::size_t disease, const LeakageOptions& options);

/// Scan on the training rows alone, for the clean arm.
std::vector<VariantStats> train_only_scan(const Cohort& cohort, const std::string& disease,
                                          std::span<const std::size_t> train_rows, const ScanOptions& scan);

/// leakage_experiment with both scans supplied, so that threshold sweeps scan
/// once. `population` covers every labelled sample; `train_only` comes from
/// train_only_scan over split.train.
LeakageReport leakage_from_scans(const Cohort& cohort, const std::string& disease, const Split& split,
                                 const std::vector<VariantStats>& population,
                                 const std::vector<VariantStats>& train_only, const LeakageOptions& options);

/// Test AUC of one arm given its selected SNPs. Exposed for the harnesses.
double score_selection(const Cohort& cohort, std::size_t disease, std::span<const std::size_t> snps,
                       const Split& split, const LeakageOptions& options);

/// Trims a CNN template so its conv stack fits `n_snps` inputs: trailing conv
/// layers are dropped, then the kernel shrinks, then the stride falls to 1.
nn::ModelConfig fit_conv_stack(nn::ModelConfig config, std::size_t n_snps);

}  // namespace gwasdl
