#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gwasdl/core/cohort.hpp"
#include "gwasdl/nn/tensor.hpp"
#include "gwasdl/rng.hpp"

namespace gwasdl::nn {

enum class ModelKind { MlpStandard, MlpChromosome, CnnStandard, CnnChromosome, MultiLabelCnn };

std::string to_string(ModelKind kind);
ModelKind parse_model_kind(const std::string& name);
bool is_chromosome_kind(ModelKind kind);
bool is_cnn_kind(ModelKind kind);

/// Architecture recipe. MLP kinds: input -> dense_widths -> head (the
/// chromosome variant spends dense_widths[0] on one dense sub-network per
/// chromosome). CNN kinds: conv_channels conv+ReLU layers -> adaptive max pool
/// -> flatten -> dense_widths -> head. Covariates join the flattened genomic
/// features entering the first shared dense layer.
struct ModelConfig {
    ModelKind kind = ModelKind::CnnStandard;
    std::size_t input_channels = 1;  // 1 = dosage, 3 = genotype probabilities
    std::vector<std::size_t> conv_channels{16, 32, 64};
    std::size_t kernel_size = 9;
    std::size_t stride = 4;
    std::size_t adaptive_pool_len = 64;
    std::vector<std::size_t> dense_widths{256};
    double dropout_p = 0.2;
    std::size_t n_labels = 1;
    std::vector<ChromosomeSpan> chromosome_boundaries;
    bool use_covariates = false;
    std::size_t n_covariates = 0;
    std::vector<std::string> label_names;  // optional; size n_labels when set

    /// Throws ConfigInvalid.
    void validate(std::size_t n_snps) const;
};

struct Parameter {
    std::string name;
    Tensor tensor;
    bool is_bias = false;
};

class Network {
public:
    Network() = default;
    /// Glorot-uniform weights (+-sqrt(6 / (fan_in + fan_out))), zero biases.
    Network(const ModelConfig& config, std::size_t n_snps, std::uint64_t seed);

    /// genotypes (N, input_channels, n_snps); covariates (N, n_covariates) or
    /// null. Returns logits (N, n_labels). Dropout is active only when
    /// `dropout_rng` is non-null.
    Tensor forward(const Tensor& genotypes, const Tensor* covariates, Rng* dropout_rng = nullptr) const;

    std::vector<Parameter>& parameters() { return params_; }
    const std::vector<Parameter>& parameters() const { return params_; }
    std::size_t parameter_count() const;
    const ModelConfig& config() const { return config_; }
    std::size_t n_snps() const { return n_snps_; }

    /// Deep copy of parameter values (graph-free).
    Network clone() const;

private:
    // Indices into params_.
    struct Dense {
        std::size_t weight = 0;
        std::size_t bias = 0;
    };
    struct Conv {
        std::size_t weight = 0;
        std::size_t bias = 0;
    };
    struct Branch {
        std::size_t begin = 0;
        std::size_t end = 0;
        std::vector<Conv> convs;
        std::optional<Dense> dense;
    };

    Dense add_dense(const std::string& name, std::size_t in, std::size_t out, Rng& rng);
    Conv add_conv(const std::string& name, std::size_t cin, std::size_t cout, std::size_t kernel, Rng& rng);
    const Tensor& param(std::size_t index) const { return params_[index].tensor; }

    ModelConfig config_;
    std::size_t n_snps_ = 0;
    std::vector<Parameter> params_;
    std::optional<Conv> mix_;
    std::vector<Branch> branches_;
    std::vector<Dense> head_;
    Dense output_;
};

/// Parameter count implied by a config, computed from the layer shapes alone.
std::size_t expected_parameter_count(const ModelConfig& config, std::size_t n_snps);

struct EpochRecord {
    double train_loss = 0.0;
    double val_auc = 0.0;  // NaN when the validation set cannot score any label
};

struct TrainedModel {
    ModelConfig config;
    std::size_t n_snps = 0;
    std::uint64_t seed = 0;
    Network network;
    std::vector<EpochRecord> history;
    std::size_t best_epoch = 0;  // 1-based epoch whose parameters were kept; 0 = initial

    bool trained() const { return !history.empty(); }
};

TrainedModel build_model(const ModelConfig& config, std::size_t n_snps, std::uint64_t seed);

/// (N, channels, m) input batch for the given rows. Missing calls are replaced
/// by `snp_means` (dosage) or the Hardy-Weinberg triple at that mean.
Tensor genotype_batch(const GenotypeMatrix& genotypes, std::span<const std::size_t> rows, std::size_t channels,
                      std::span<const double> snp_means, bool requires_grad = false);

/// Per-SNP mean dosage over all samples of the matrix.
std::vector<double> snp_means(const GenotypeMatrix& genotypes);

/// (N, n_covariates) from the cohort covariate table.
Tensor covariate_batch(const CovariateTable& covariates, std::span<const std::size_t> rows);

/// Disease column for each model label (label_names when set, otherwise the
/// first n_labels diseases of the cohort).
std::vector<std::size_t> label_columns(const ModelConfig& config, const PhenotypeTable& phenotypes);

/// n x K row-major probabilities, dropout disabled.
std::vector<double> predict(const TrainedModel& model, const Cohort& cohort, std::span<const std::size_t> rows,
                            std::size_t batch_size = 256);

}  // namespace gwasdl::nn
