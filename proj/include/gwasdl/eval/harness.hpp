#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gwasdl/core/cohort.hpp"
#include "gwasdl/eval/report.hpp"
#include "gwasdl/nn/model.hpp"
#include "gwasdl/nn/train.hpp"
#include "gwasdl/selection/selection.hpp"

namespace gwasdl::eval {

struct BaselineOptions {
    std::vector<nn::ModelKind> architectures{nn::ModelKind::MlpStandard, nn::ModelKind::MlpChromosome,
                                             nn::ModelKind::CnnStandard, nn::ModelKind::CnnChromosome};
    bool covariate_arm = false;  // repeat every cell with covariates enabled
    std::vector<std::uint64_t> seeds{0};
    std::vector<std::string> diseases;  // empty: every usable disease
    double train_fraction = 0.8;
    nn::ModelConfig network;
    nn::TrainConfig training;
    bool record_timing = false;
};

struct SelectionOptions {
    std::vector<double> thresholds{0.01, 0.05, 0.1};
    std::vector<SelectionScope> scopes{SelectionScope::PopulationLevel, SelectionScope::TrainOnly};
    std::vector<std::uint64_t> seeds{0};
    std::vector<std::string> diseases;
    LeakageOptions leakage;  // threshold and split seed are overwritten per cell
    bool record_timing = false;
};

struct MultiLabelOptions {
    std::vector<std::uint64_t> seeds{0};
    bool covariate_arm = false;
    bool single_disease_baselines = false;  // CnnStandard per disease on the same split
    std::vector<std::string> baseline_diseases;  // restricts those baselines; empty: all
    double train_fraction = 0.8;
    nn::ModelConfig network;  // kind forced to MultiLabelCnn
    nn::TrainConfig training;
    bool record_timing = false;
};

/// Single-disease model per (disease, architecture, seed) on an 80/20 split
/// stratified by that disease, trained on every SNP.
ExperimentReport run_baseline(const Cohort& cohort, const BaselineOptions& options);

/// Paired leaky and clean rows per (disease, threshold, seed).
ExperimentReport run_selection_experiment(const Cohort& cohort, const SelectionOptions& options);

/// One multi-label CNN per seed over all usable diseases; per-disease test AUC
/// on rows where the disease is observed.
ExperimentReport run_multilabel(const Cohort& cohort, const MultiLabelOptions& options);

/// Split used by run_multilabel: rows with at least one observed label,
/// stratified by the disease with the fewest observations.
Split multilabel_split(const Cohort& cohort, const std::vector<std::size_t>& diseases, double train_fraction,
                       std::uint64_t seed);

/// Copy of the cohort keeping only the listed diseases, in that order.
Cohort with_diseases(const Cohort& cohort, const std::vector<std::size_t>& diseases);

}  // namespace gwasdl::eval
