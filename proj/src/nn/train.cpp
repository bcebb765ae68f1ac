#include "gwasdl/nn/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "gwasdl/core/split.hpp"
#include "gwasdl/error.hpp"
#include "gwasdl/eval/auc.hpp"
#include "gwasdl/nn/ops.hpp"

namespace gwasdl::nn {

std::string to_string(Optimizer optimizer) {
    return optimizer == Optimizer::Adam ? "Adam" : "SgdMomentum";
}

Optimizer parse_optimizer(const std::string& name) {
    if (name == "Adam") {
        return Optimizer::Adam;
    }
    if (name == "SgdMomentum") {
        return Optimizer::SgdMomentum;
    }
    throw Error(ErrorCode::ConfigInvalid, "unknown optimizer '" + name + "'");
}

void TrainConfig::validate() const {
    auto fail = [](const std::string& msg) { throw Error(ErrorCode::ConfigInvalid, msg); };
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
        fail("learning_rate must be finite and non-negative");
    }
    if (batch_size == 0) {
        fail("batch_size must be positive");
    }
    if (!(weight_decay >= 0.0)) {
        fail("weight_decay must be non-negative");
    }
    if (early_stop_patience == 0) {
        fail("early_stop_patience must be positive");
    }
    if (!(momentum >= 0.0 && momentum < 1.0) || !(adam_beta1 >= 0.0 && adam_beta1 < 1.0) ||
        !(adam_beta2 >= 0.0 && adam_beta2 < 1.0) || !(adam_epsilon > 0.0)) {
        fail("optimizer moments must lie in [0, 1) and epsilon must be positive");
    }
}

std::vector<std::size_t> stratified_order(std::span<const std::size_t> cases, std::span<const std::size_t> controls,
                                          Rng& rng) {
    std::vector<std::size_t> pos(cases.begin(), cases.end());
    std::vector<std::size_t> neg(controls.begin(), controls.end());
    rng.shuffle(pos);
    rng.shuffle(neg);
    const std::size_t n = pos.size() + neg.size();
    std::vector<std::size_t> order;
    order.reserve(n);
    std::size_t next_pos = 0;
    std::size_t next_neg = 0;
    for (std::size_t i = 0; i < n; ++i) {
        // Position i holds a case whenever the running case quota steps up.
        const bool take_case = (i + 1) * pos.size() / n > i * pos.size() / n;
        order.push_back(take_case ? pos[next_pos++] : neg[next_neg++]);
    }
    return order;
}

namespace {

struct Batch {
    Tensor genotypes;
    Tensor covariates;
    std::vector<double> labels;
    std::vector<std::uint8_t> mask;
    std::size_t observed = 0;
};

Batch make_batch(const TrainedModel& model, const Cohort& cohort, std::span<const std::size_t> rows,
                 std::span<const std::size_t> label_cols, std::span<const double> means) {
    Batch batch;
    const auto& config = model.config;
    batch.genotypes = genotype_batch(cohort.genotypes, rows, config.input_channels, means);
    if (config.use_covariates) {
        batch.covariates = covariate_batch(cohort.covariates, rows);
    }
    const std::size_t k = label_cols.size();
    batch.labels.assign(rows.size() * k, 0.0);
    batch.mask.assign(rows.size() * k, 0);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < k; ++c) {
            const auto y = cohort.phenotypes.label(rows[r], label_cols[c]);
            if (y != kMissingLabel) {
                batch.labels[r * k + c] = static_cast<double>(y);
                batch.mask[r * k + c] = 1;
                ++batch.observed;
            }
        }
    }
    return batch;
}

Tensor run_forward(const TrainedModel& model, const Batch& batch, Rng* dropout_rng) {
    return model.network.forward(batch.genotypes, model.config.use_covariates ? &batch.covariates : nullptr,
                                 dropout_rng);
}

std::vector<std::vector<double>> snapshot(const Network& network) {
    std::vector<std::vector<double>> values;
    for (const auto& p : network.parameters()) {
        values.emplace_back(p.tensor.values().begin(), p.tensor.values().end());
    }
    return values;
}

void restore(Network& network, const std::vector<std::vector<double>>& values) {
    auto& params = network.parameters();
    for (std::size_t i = 0; i < params.size(); ++i) {
        std::copy(values[i].begin(), values[i].end(), params[i].tensor.mutable_values().begin());
    }
}

class OptimizerState {
public:
    OptimizerState(const Network& network, const TrainConfig& config) : config_(config) {
        for (const auto& p : network.parameters()) {
            first_.emplace_back(p.tensor.size(), 0.0);
            second_.emplace_back(config.optimizer == Optimizer::Adam ? p.tensor.size() : 0, 0.0);
        }
    }

    void step(Network& network) {
        ++t_;
        const double lr = config_.learning_rate;
        const double bc1 = 1.0 - std::pow(config_.adam_beta1, static_cast<double>(t_));
        const double bc2 = 1.0 - std::pow(config_.adam_beta2, static_cast<double>(t_));
        auto& params = network.parameters();
        for (std::size_t i = 0; i < params.size(); ++i) {
            auto& tensor = params[i].tensor;
            if (!tensor.has_grad()) {
                continue;
            }
            const double decay = params[i].is_bias ? 0.0 : config_.weight_decay;
            auto w = tensor.mutable_values();
            const auto g = tensor.grad();
            auto& m = first_[i];
            for (std::size_t j = 0; j < w.size(); ++j) {
                const double grad = g[j] + decay * w[j];
                if (config_.optimizer == Optimizer::Adam) {
                    auto& v = second_[i];
                    m[j] = config_.adam_beta1 * m[j] + (1.0 - config_.adam_beta1) * grad;
                    v[j] = config_.adam_beta2 * v[j] + (1.0 - config_.adam_beta2) * grad * grad;
                    const double m_hat = m[j] / bc1;
                    const double v_hat = v[j] / bc2;
                    w[j] -= lr * (m_hat / (std::sqrt(v_hat) + config_.adam_epsilon));
                } else {
                    m[j] = config_.momentum * m[j] + grad;
                    w[j] -= lr * m[j];
                }
            }
        }
    }

private:
    TrainConfig config_;
    std::vector<std::vector<double>> first_;
    std::vector<std::vector<double>> second_;
    std::uint64_t t_ = 0;
};

}  // namespace

std::vector<double> label_aucs(const TrainedModel& model, const Cohort& cohort, std::span<const std::size_t> rows) {
    const auto cols = label_columns(model.config, cohort.phenotypes);
    const std::size_t k = cols.size();
    std::vector<double> aucs(k, std::numeric_limits<double>::quiet_NaN());
    if (rows.empty()) {
        return aucs;
    }
    const auto probs = predict(model, cohort, rows);
    for (std::size_t c = 0; c < k; ++c) {
        std::vector<double> scores;
        std::vector<std::int8_t> labels;
        std::size_t n_pos = 0;
        for (std::size_t r = 0; r < rows.size(); ++r) {
            const auto y = cohort.phenotypes.label(rows[r], cols[c]);
            if (y == kMissingLabel) {
                continue;
            }
            scores.push_back(probs[r * k + c]);
            labels.push_back(y);
            n_pos += y == 1 ? 1 : 0;
        }
        if (n_pos > 0 && n_pos < labels.size()) {
            aucs[c] = eval::auc_roc(scores, labels);
        }
    }
    return aucs;
}

double mean_label_auc(const TrainedModel& model, const Cohort& cohort, std::span<const std::size_t> rows) {
    double total = 0.0;
    std::size_t scored = 0;
    for (const double auc : label_aucs(model, cohort, rows)) {
        if (!std::isnan(auc)) {
            total += auc;
            ++scored;
        }
    }
    return scored == 0 ? std::numeric_limits<double>::quiet_NaN() : total / static_cast<double>(scored);
}

double evaluate_loss(const TrainedModel& model, const Cohort& cohort, std::span<const std::size_t> rows) {
    const auto cols = label_columns(model.config, cohort.phenotypes);
    const auto probs = predict(model, cohort, rows);
    std::vector<double> labels(probs.size(), 0.0);
    std::vector<std::uint8_t> mask(probs.size(), 0);
    const std::size_t k = cols.size();
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < k; ++c) {
            const auto y = cohort.phenotypes.label(rows[r], cols[c]);
            if (y != kMissingLabel) {
                labels[r * k + c] = y;
                mask[r * k + c] = 1;
            }
        }
    }
    return masked_bce_loss(probs, labels, mask);
}

TrainedModel train(TrainedModel model, const Cohort& cohort, std::span<const std::size_t> train_rows,
                   std::span<const std::size_t> val_rows, const TrainConfig& config) {
    config.validate();
    if (cohort.n_snps() != model.n_snps) {
        throw Error(ErrorCode::ShapeMismatch, "cohort SNP count differs from the model's");
    }
    if (model.config.use_covariates && cohort.covariates.n_columns() != model.config.n_covariates) {
        throw Error(ErrorCode::ShapeMismatch, "cohort covariate count differs from the model's");
    }
    const auto cols = label_columns(model.config, cohort.phenotypes);
    for (const auto col : cols) {
        std::size_t cases = 0;
        std::size_t controls = 0;
        for (const auto r : train_rows) {
            const auto y = cohort.phenotypes.label(r, col);
            cases += y == 1 ? 1 : 0;
            controls += y == 0 ? 1 : 0;
        }
        if (cases + controls > 0 && (cases == 0 || controls == 0)) {
            throw Error(ErrorCode::DegenerateLabels, "label '" + cohort.phenotypes.disease_names()[col] +
                                                         "' needs a case and a control in the training rows");
        }
    }
    if (config.epochs == 0) {
        return model;
    }

    const auto means = snp_means(cohort.genotypes);
    Rng batch_rng(derive_seed(config.seed, "batches"));
    Rng dropout_rng(derive_seed(config.seed, "dropout"));
    OptimizerState optimizer(model.network, config);

    // Single-label training uses case/control stratified batches and skips
    // unlabeled rows, which carry no loss.
    const bool single = cols.size() == 1;
    std::vector<std::size_t> cases;
    std::vector<std::size_t> controls;
    std::vector<std::size_t> all_rows(train_rows.begin(), train_rows.end());
    if (single) {
        for (const auto r : train_rows) {
            const auto y = cohort.phenotypes.label(r, cols[0]);
            if (y == 1) {
                cases.push_back(r);
            } else if (y == 0) {
                controls.push_back(r);
            }
        }
    }

    std::optional<double> best_auc;
    std::vector<std::vector<double>> best_params;
    std::size_t since_best = 0;
    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        std::vector<std::size_t> order;
        if (single) {
            order = stratified_order(cases, controls, batch_rng);
        } else {
            order = all_rows;
            batch_rng.shuffle(order);
        }
        double loss_total = 0.0;
        std::size_t loss_cells = 0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t stop = std::min(order.size(), start + config.batch_size);
            const std::span<const std::size_t> rows(order.data() + start, stop - start);
            const Batch batch = make_batch(model, cohort, rows, cols, means);
            if (batch.observed == 0) {
                continue;
            }
            for (auto& p : model.network.parameters()) {
                p.tensor.zero_grad();
            }
            const Tensor logits = run_forward(model, batch, model.config.dropout_p > 0.0 ? &dropout_rng : nullptr);
            const Tensor loss = masked_bce_with_logits(logits, batch.labels, batch.mask);
            backward(loss);
            optimizer.step(model.network);
            loss_total += loss.item() * static_cast<double>(batch.observed);
            loss_cells += batch.observed;
        }
        EpochRecord record;
        record.train_loss = loss_cells == 0 ? 0.0 : loss_total / static_cast<double>(loss_cells);
        record.val_auc = mean_label_auc(model, cohort, val_rows);
        model.history.push_back(record);

        if (!std::isnan(record.val_auc) && (!best_auc || record.val_auc > *best_auc)) {
            best_auc = record.val_auc;
            best_params = snapshot(model.network);
            model.best_epoch = epoch;
            since_best = 0;
        } else if (best_auc) {
            if (++since_best >= config.early_stop_patience) {
                break;
            }
        }
    }
    if (best_auc) {
        restore(model.network, best_params);
    } else {
        model.best_epoch = model.history.size();
    }
    return model;
}

FitOutcome fit_and_score(const Cohort& cohort, const ModelConfig& model_config, const TrainConfig& train_config,
                         std::span<const std::size_t> train_rows, std::span<const std::size_t> test_rows,
                         double val_fraction) {
    FitOutcome outcome;
    outcome.model = build_model(model_config, cohort.n_snps(), train_config.seed);
    const auto cols = label_columns(model_config, cohort.phenotypes);
    // Stratify the validation carve-out on the label observed least often.
    int stratum = -1;
    std::size_t fewest = std::numeric_limits<std::size_t>::max();
    for (const auto col : cols) {
        std::size_t observed = 0;
        for (const auto r : train_rows) {
            observed += cohort.phenotypes.observed(r, col) ? 1 : 0;
        }
        if (observed < fewest) {
            fewest = observed;
            stratum = static_cast<int>(col);
        }
    }
    Split inner;
    if (val_fraction > 0.0) {
        try {
            inner = split_rows(train_rows, &cohort.phenotypes, stratum, 1.0 - val_fraction,
                               derive_seed(train_config.seed, "validation"));
        } catch (const Error& e) {
            if (e.code() != ErrorCode::StratumTooSmall) {
                throw;
            }
            inner = split_rows(train_rows, nullptr, -1, 1.0 - val_fraction,
                               derive_seed(train_config.seed, "validation"));
        }
    } else {
        inner.train.assign(train_rows.begin(), train_rows.end());
    }
    outcome.model = train(std::move(outcome.model), cohort, inner.train, inner.test, train_config);
    outcome.test_auc = label_aucs(outcome.model, cohort, test_rows);
    outcome.n_train = inner.train.size();
    outcome.n_val = inner.test.size();
    outcome.n_test = test_rows.size();
    return outcome;
}

}  // namespace gwasdl::nn
