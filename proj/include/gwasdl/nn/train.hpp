#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>

#include "gwasdl/core/cohort.hpp"
#include "gwasdl/nn/model.hpp"

namespace gwasdl::nn {

enum class Optimizer { Adam, SgdMomentum };

std::string to_string(Optimizer optimizer);
Optimizer parse_optimizer(const std::string& name);

struct TrainConfig {
    double learning_rate = 1e-3;
    std::size_t batch_size = 64;
    std::size_t epochs = 20;
    double weight_decay = 1e-4;  // L2 on weights, biases exempt
    std::uint64_t seed = 0;
    std::size_t early_stop_patience = 5;
    Optimizer optimizer = Optimizer::Adam;
    double momentum = 0.9;  // SgdMomentum only
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;

    /// Throws ConfigInvalid.
    void validate() const;
};

/// Masked mini-batch training of `model` on `train_rows`, early stopping on
/// the mean validation AUC over labels that `val_rows` can score. The
/// parameters of the best validation epoch are kept. Throws DegenerateLabels
/// when a label observed in the training rows lacks a case or a control.
TrainedModel train(TrainedModel model, const Cohort& cohort, std::span<const std::size_t> train_rows,
                   std::span<const std::size_t> val_rows, const TrainConfig& config);

/// Test AUC per model label over rows where that label is observed; NaN for
/// labels lacking a case or a control among those rows.
std::vector<double> label_aucs(const TrainedModel& model, const Cohort& cohort, std::span<const std::size_t> rows);

/// Mean of the finite label_aucs; NaN when none is scorable.
double mean_label_auc(const TrainedModel& model, const Cohort& cohort, std::span<const std::size_t> rows);

/// Masked BCE of the model on `rows` without dropout.
double evaluate_loss(const TrainedModel& model, const Cohort& cohort, std::span<const std::size_t> rows);

/// Per-epoch batch order for single-label training: cases and controls are
/// shuffled separately and interleaved so that every contiguous batch holds
/// the global case fraction to within one sample.
std::vector<std::size_t> stratified_order(std::span<const std::size_t> cases, std::span<const std::size_t> controls,
                                          Rng& rng);

struct FitOutcome {
    TrainedModel model;
    std::vector<double> test_auc;  // per label, NaN when unscorable
    std::size_t n_train = 0;       // rows used for gradient steps
    std::size_t n_val = 0;
    std::size_t n_test = 0;
};

/// Builds a model, carves a validation set of `val_fraction` out of
/// `train_rows` (stratified on the label with the fewest observations),
/// trains, and scores `test_rows`.
FitOutcome fit_and_score(const Cohort& cohort, const ModelConfig& model_config, const TrainConfig& train_config,
                         std::span<const std::size_t> train_rows, std::span<const std::size_t> test_rows,
                         double val_fraction = 0.1);

}  // namespace gwasdl::nn
