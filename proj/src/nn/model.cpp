#include "gwasdl/nn/model.hpp"

#include <algorithm>
#include <cmath>

#include "gwasdl/error.hpp"
#include "gwasdl/nn/ops.hpp"

namespace gwasdl::nn {

std::string to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::MlpStandard: return "MlpStandard";
        case ModelKind::MlpChromosome: return "MlpChromosome";
        case ModelKind::CnnStandard: return "CnnStandard";
        case ModelKind::CnnChromosome: return "CnnChromosome";
        case ModelKind::MultiLabelCnn: return "MultiLabelCnn";
    }
    return "Unknown";
}

ModelKind parse_model_kind(const std::string& name) {
    for (const auto kind : {ModelKind::MlpStandard, ModelKind::MlpChromosome, ModelKind::CnnStandard,
                            ModelKind::CnnChromosome, ModelKind::MultiLabelCnn}) {
        if (to_string(kind) == name) {
            return kind;
        }
    }
    throw Error(ErrorCode::ConfigInvalid, "unknown model kind '" + name + "'");
}

bool is_chromosome_kind(ModelKind kind) {
    return kind == ModelKind::MlpChromosome || kind == ModelKind::CnnChromosome;
}

bool is_cnn_kind(ModelKind kind) { return kind != ModelKind::MlpStandard && kind != ModelKind::MlpChromosome; }

namespace {

// Length after the conv stack, or 0 if some layer would be shorter than its kernel.
std::size_t conv_stack_length(const ModelConfig& config, std::size_t length) {
    for (std::size_t layer = 0; layer < config.conv_channels.size(); ++layer) {
        if (length < config.kernel_size) {
            return 0;
        }
        length = (length - config.kernel_size) / config.stride + 1;
    }
    return length;
}

std::vector<std::pair<std::size_t, std::size_t>> branch_ranges(const ModelConfig& config, std::size_t n_snps) {
    std::vector<std::pair<std::size_t, std::size_t>> ranges;
    if (is_chromosome_kind(config.kind)) {
        for (const auto& span : config.chromosome_boundaries) {
            ranges.emplace_back(span.begin, span.end);
        }
    } else {
        ranges.emplace_back(0, n_snps);
    }
    return ranges;
}

}  // namespace

void ModelConfig::validate(std::size_t n_snps) const {
    auto fail = [](const std::string& msg) { throw Error(ErrorCode::ConfigInvalid, msg); };
    if (n_snps == 0) {
        fail("model needs at least one SNP");
    }
    if (input_channels != 1 && input_channels != 3) {
        fail("input_channels must be 1 or 3");
    }
    if (kind == ModelKind::MultiLabelCnn ? n_labels < 2 : n_labels != 1) {
        fail(to_string(kind) + (kind == ModelKind::MultiLabelCnn ? " needs n_labels >= 2" : " needs n_labels == 1"));
    }
    if (!label_names.empty() && label_names.size() != n_labels) {
        fail("label_names must list n_labels diseases");
    }
    if (!(dropout_p >= 0.0 && dropout_p < 1.0)) {
        fail("dropout_p must lie in [0, 1)");
    }
    if (use_covariates != (n_covariates > 0)) {
        fail("use_covariates requires n_covariates > 0 (and vice versa)");
    }
    for (const auto w : dense_widths) {
        if (w == 0) {
            fail("dense widths must be positive");
        }
    }
    if (is_chromosome_kind(kind)) {
        std::size_t next = 0;
        for (const auto& span : chromosome_boundaries) {
            if (span.begin != next || span.end <= span.begin) {
                fail("chromosome boundaries must partition the SNPs contiguously");
            }
            next = span.end;
        }
        if (next != n_snps || chromosome_boundaries.empty()) {
            fail("chromosome boundaries must cover all " + std::to_string(n_snps) + " SNPs");
        }
        if (kind == ModelKind::MlpChromosome && dense_widths.empty()) {
            fail("MlpChromosome needs dense_widths[0] for its per-chromosome layers");
        }
    }
    if (is_cnn_kind(kind)) {
        if (conv_channels.empty() || kernel_size == 0 || stride == 0 || adaptive_pool_len == 0) {
            fail("CNN kinds need conv channels, kernel, stride and pool length");
        }
        for (const auto& [begin, end] : branch_ranges(*this, n_snps)) {
            if (conv_stack_length(*this, end - begin) == 0) {
                fail("input of " + std::to_string(end - begin) + " SNPs is too short for the conv stack");
            }
        }
    }
}

std::size_t expected_parameter_count(const ModelConfig& config, std::size_t n_snps) {
    config.validate(n_snps);
    std::size_t count = config.input_channels == 3 ? 3 + 1 : 0;
    std::size_t features = 0;
    const auto ranges = branch_ranges(config, n_snps);
    for (const auto& [begin, end] : ranges) {
        if (is_cnn_kind(config.kind)) {
            std::size_t cin = 1;
            for (const auto cout : config.conv_channels) {
                count += cin * config.kernel_size * cout + cout;
                cin = cout;
            }
            features += cin * config.adaptive_pool_len;
        } else if (config.kind == ModelKind::MlpChromosome) {
            count += (end - begin) * config.dense_widths[0] + config.dense_widths[0];
            features += config.dense_widths[0];
        } else {
            features += end - begin;
        }
    }
    std::size_t in = features + config.n_covariates;
    const std::size_t skip = config.kind == ModelKind::MlpChromosome ? 1 : 0;
    for (std::size_t l = skip; l < config.dense_widths.size(); ++l) {
        count += in * config.dense_widths[l] + config.dense_widths[l];
        in = config.dense_widths[l];
    }
    return count + in * config.n_labels + config.n_labels;
}

Network::Dense Network::add_dense(const std::string& name, std::size_t in, std::size_t out, Rng& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
    std::vector<double> w(in * out);
    for (double& v : w) {
        v = rng.uniform(-limit, limit);
    }
    Dense d;
    d.weight = params_.size();
    params_.push_back({name + ".weight", Tensor::from({out, in}, std::move(w), true), false});
    d.bias = params_.size();
    params_.push_back({name + ".bias", Tensor::zeros({out}, true), true});
    return d;
}

Network::Conv Network::add_conv(const std::string& name, std::size_t cin, std::size_t cout, std::size_t kernel,
                                Rng& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>((cin + cout) * kernel));
    std::vector<double> w(cout * cin * kernel);
    for (double& v : w) {
        v = rng.uniform(-limit, limit);
    }
    Conv c;
    c.weight = params_.size();
    params_.push_back({name + ".weight", Tensor::from({cout, cin, kernel}, std::move(w), true), false});
    c.bias = params_.size();
    params_.push_back({name + ".bias", Tensor::zeros({cout}, true), true});
    return c;
}

Network::Network(const ModelConfig& config, std::size_t n_snps, std::uint64_t seed)
    : config_(config), n_snps_(n_snps) {
    config_.validate(n_snps);
    Rng rng(derive_seed(seed, "init"));
    if (config_.input_channels == 3) {
        mix_ = add_conv("channel_mix", 3, 1, 1, rng);
    }
    std::size_t features = 0;
    const auto ranges = branch_ranges(config_, n_snps);
    for (std::size_t b = 0; b < ranges.size(); ++b) {
        Branch branch;
        branch.begin = ranges[b].first;
        branch.end = ranges[b].second;
        const std::string prefix = ranges.size() > 1 ? "chr" + std::to_string(b) + "." : "";
        if (is_cnn_kind(config_.kind)) {
            std::size_t cin = 1;
            for (std::size_t l = 0; l < config_.conv_channels.size(); ++l) {
                branch.convs.push_back(
                    add_conv(prefix + "conv" + std::to_string(l), cin, config_.conv_channels[l], config_.kernel_size, rng));
                cin = config_.conv_channels[l];
            }
            features += cin * config_.adaptive_pool_len;
        } else if (config_.kind == ModelKind::MlpChromosome) {
            branch.dense = add_dense(prefix + "dense", branch.end - branch.begin, config_.dense_widths[0], rng);
            features += config_.dense_widths[0];
        } else {
            features += branch.end - branch.begin;
        }
        branches_.push_back(std::move(branch));
    }
    std::size_t in = features + config_.n_covariates;
    const std::size_t skip = config_.kind == ModelKind::MlpChromosome ? 1 : 0;
    for (std::size_t l = skip; l < config_.dense_widths.size(); ++l) {
        head_.push_back(add_dense("head" + std::to_string(l), in, config_.dense_widths[l], rng));
        in = config_.dense_widths[l];
    }
    output_ = add_dense("output", in, config_.n_labels, rng);
}

Tensor Network::forward(const Tensor& genotypes, const Tensor* covariates, Rng* dropout_rng) const {
    if (genotypes.rank() != 3 || genotypes.dim(1) != config_.input_channels || genotypes.dim(2) != n_snps_) {
        throw Error(ErrorCode::ShapeMismatch, "expected genotypes (N, " + std::to_string(config_.input_channels) +
                                                  ", " + std::to_string(n_snps_) + "), got " +
                                                  shape_string(genotypes.shape()));
    }
    const std::size_t n = genotypes.dim(0);
    Tensor x = genotypes;
    if (mix_) {
        x = channel_mix(x, param(mix_->weight), param(mix_->bias));
    }
    std::vector<Tensor> features;
    for (const auto& branch : branches_) {
        Tensor h = branches_.size() == 1 ? x : slice_last(x, branch.begin, branch.end);
        if (is_cnn_kind(config_.kind)) {
            for (const auto& conv : branch.convs) {
                h = relu(conv1d(h, param(conv.weight), param(conv.bias), config_.stride));
            }
            h = adaptive_max_pool1d(h, config_.adaptive_pool_len);
            h = reshape(h, {n, h.dim(1) * h.dim(2)});
        } else {
            h = reshape(h, {n, branch.end - branch.begin});
            if (branch.dense) {
                h = relu(affine(h, param(branch.dense->weight), param(branch.dense->bias)));
            }
        }
        features.push_back(std::move(h));
    }
    if (config_.use_covariates) {
        if (covariates == nullptr || covariates->rank() != 2 || covariates->dim(0) != n ||
            covariates->dim(1) != config_.n_covariates) {
            throw Error(ErrorCode::ShapeMismatch, "model expects (N, " + std::to_string(config_.n_covariates) +
                                                      ") covariates");
        }
        features.push_back(*covariates);
    }
    Tensor h = features.size() == 1 ? features[0] : concat_features(features);
    for (const auto& dense : head_) {
        h = relu(affine(h, param(dense.weight), param(dense.bias)));
        if (dropout_rng != nullptr) {
            h = dropout(h, config_.dropout_p, *dropout_rng, true);
        }
    }
    return affine(h, param(output_.weight), param(output_.bias));
}

std::size_t Network::parameter_count() const {
    std::size_t count = 0;
    for (const auto& p : params_) {
        count += p.tensor.size();
    }
    return count;
}

Network Network::clone() const {
    Network copy = *this;
    for (auto& p : copy.params_) {
        p.tensor = Tensor::from(p.tensor.shape(), std::vector<double>(p.tensor.values().begin(), p.tensor.values().end()),
                                true);
    }
    return copy;
}

TrainedModel build_model(const ModelConfig& config, std::size_t n_snps, std::uint64_t seed) {
    TrainedModel model;
    model.config = config;
    model.n_snps = n_snps;
    model.seed = seed;
    model.network = Network(config, n_snps, seed);
    return model;
}

std::vector<double> snp_means(const GenotypeMatrix& genotypes) {
    std::vector<double> means(genotypes.n_snps());
    for (std::size_t j = 0; j < means.size(); ++j) {
        means[j] = genotypes.mean_dosage(j);
    }
    return means;
}

Tensor genotype_batch(const GenotypeMatrix& genotypes, std::span<const std::size_t> rows, std::size_t channels,
                      std::span<const double> means, bool requires_grad) {
    const std::size_t n = rows.size();
    const std::size_t m = genotypes.n_snps();
    if (means.size() != m) {
        throw Error(ErrorCode::ShapeMismatch, "snp_means length differs from SNP count");
    }
    std::vector<double> x(n * channels * m);
    if (channels == 1) {
        if (genotypes.encoding() == GenotypeEncoding::Dosage) {
            for (std::size_t j = 0; j < m; ++j) {
                const auto col = genotypes.column(j);
                for (std::size_t r = 0; r < n; ++r) {
                    const double d = col[rows[r]];
                    x[r * m + j] = is_missing(d) ? means[j] : d;
                }
            }
        } else {
            for (std::size_t j = 0; j < m; ++j) {
                for (std::size_t r = 0; r < n; ++r) {
                    const double d = genotypes.dosage(rows[r], j);
                    x[r * m + j] = is_missing(d) ? means[j] : d;
                }
            }
        }
    } else if (channels == 3) {
        for (std::size_t j = 0; j < m; ++j) {
            const double q = means[j] / 2.0;
            const std::array<double, 3> hwe{(1.0 - q) * (1.0 - q), 2.0 * q * (1.0 - q), q * q};
            for (std::size_t r = 0; r < n; ++r) {
                auto p = genotypes.probabilities(rows[r], j);
                if (is_missing(p[0])) {
                    p = hwe;
                }
                for (std::size_t c = 0; c < 3; ++c) {
                    x[(r * 3 + c) * m + j] = p[c];
                }
            }
        }
    } else {
        throw Error(ErrorCode::ConfigInvalid, "channels must be 1 or 3");
    }
    return Tensor::from({n, channels, m}, std::move(x), requires_grad);
}

Tensor covariate_batch(const CovariateTable& covariates, std::span<const std::size_t> rows) {
    const std::size_t k = covariates.n_columns();
    std::vector<double> x(rows.size() * k);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < k; ++c) {
            x[r * k + c] = covariates.value(rows[r], c);
        }
    }
    return Tensor::from({rows.size(), k}, std::move(x));
}

std::vector<std::size_t> label_columns(const ModelConfig& config, const PhenotypeTable& phenotypes) {
    std::vector<std::size_t> cols;
    if (!config.label_names.empty()) {
        for (const auto& name : config.label_names) {
            cols.push_back(phenotypes.index_of(name));
        }
        return cols;
    }
    if (phenotypes.n_diseases() < config.n_labels) {
        throw Error(ErrorCode::ConfigInvalid, "cohort has fewer diseases than model labels");
    }
    for (std::size_t k = 0; k < config.n_labels; ++k) {
        cols.push_back(k);
    }
    return cols;
}

std::vector<double> predict(const TrainedModel& model, const Cohort& cohort, std::span<const std::size_t> rows,
                            std::size_t batch_size) {
    if (cohort.n_snps() != model.n_snps) {
        throw Error(ErrorCode::ShapeMismatch, "cohort has " + std::to_string(cohort.n_snps()) + " SNPs, model expects " +
                                                  std::to_string(model.n_snps));
    }
    const auto& config = model.config;
    if (config.use_covariates && cohort.covariates.n_columns() != config.n_covariates) {
        throw Error(ErrorCode::ShapeMismatch, "model expects " + std::to_string(config.n_covariates) + " covariates");
    }
    NoGradGuard no_grad;
    const auto means = snp_means(cohort.genotypes);
    const std::size_t k = config.n_labels;
    std::vector<double> out(rows.size() * k);
    batch_size = std::max<std::size_t>(batch_size, 1);
    for (std::size_t start = 0; start < rows.size(); start += batch_size) {
        const std::size_t stop = std::min(rows.size(), start + batch_size);
        const auto chunk = rows.subspan(start, stop - start);
        const Tensor x = genotype_batch(cohort.genotypes, chunk, config.input_channels, means);
        Tensor cov;
        if (config.use_covariates) {
            cov = covariate_batch(cohort.covariates, chunk);
        }
        const Tensor logits = model.network.forward(x, config.use_covariates ? &cov : nullptr);
        const Tensor probs = sigmoid(logits);
        std::copy(probs.values().begin(), probs.values().end(), out.begin() + static_cast<std::ptrdiff_t>(start * k));
    }
    return out;
}

}  // namespace gwasdl::nn
