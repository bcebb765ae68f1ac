#include "gwasdl/attribution/saliency.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "gwasdl/error.hpp"
#include "gwasdl/nn/ops.hpp"

namespace gwasdl {

AttributionResult saliency(const nn::TrainedModel& model, const Cohort& cohort, std::size_t label,
                           std::span<const std::size_t> rows, std::size_t batch_size) {
    if (rows.empty()) {
        throw Error(ErrorCode::ConfigInvalid, "saliency needs at least one sample");
    }
    if (label >= model.config.n_labels) {
        throw Error(ErrorCode::ConfigInvalid, "label index out of range");
    }
    if (cohort.n_snps() != model.n_snps) {
        throw Error(ErrorCode::ShapeMismatch, "cohort SNP count differs from the model's");
    }
    AttributionResult result;
    const auto cols = nn::label_columns(model.config, cohort.phenotypes);
    result.disease = cohort.phenotypes.disease_names()[cols[label]];
    result.untrained_model = !model.trained();

    const std::size_t m = model.n_snps;
    const std::size_t channels = model.config.input_channels;
    const std::size_t k = model.config.n_labels;
    const auto means = nn::snp_means(cohort.genotypes);
    std::vector<double> totals(m, 0.0);
    batch_size = std::max<std::size_t>(batch_size, 1);
    for (std::size_t start = 0; start < rows.size(); start += batch_size) {
        const auto chunk = rows.subspan(start, std::min(batch_size, rows.size() - start));
        const nn::Tensor x = nn::genotype_batch(cohort.genotypes, chunk, channels, means, true);
        nn::Tensor cov;
        if (model.config.use_covariates) {
            cov = nn::covariate_batch(cohort.covariates, chunk);
        }
        const nn::Tensor logits = model.network.forward(x, model.config.use_covariates ? &cov : nullptr);
        // Samples do not interact without dropout, so the gradient of the
        // summed logit holds every per-sample gradient at once.
        std::vector<double> pick(chunk.size() * k, 0.0);
        for (std::size_t r = 0; r < chunk.size(); ++r) {
            pick[r * k + label] = 1.0;
        }
        nn::backward(nn::weighted_sum(logits, pick));
        const auto grad = x.grad();
        for (std::size_t r = 0; r < chunk.size(); ++r) {
            for (std::size_t c = 0; c < channels; ++c) {
                const double* g = grad.data() + (r * channels + c) * m;
                for (std::size_t j = 0; j < m; ++j) {
                    totals[j] += std::abs(g[j]);
                }
            }
        }
    }
    result.scores.resize(m);
    for (std::size_t j = 0; j < m; ++j) {
        result.scores[j] = totals[j] / static_cast<double>(rows.size());
    }
    return result;
}

std::vector<std::size_t> top_k(std::span<const double> scores, std::size_t k) {
    if (k > scores.size()) {
        throw Error(ErrorCode::KTooLarge,
                    "k = " + std::to_string(k) + " exceeds " + std::to_string(scores.size()) + " scores");
    }
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    order.resize(k);
    return order;
}

double causal_recall(std::span<const std::size_t> ranking, std::span<const std::size_t> causal, std::size_t k) {
    if (causal.empty()) {
        throw Error(ErrorCode::ConfigInvalid, "causal set is empty");
    }
    const std::set<std::size_t> truth(causal.begin(), causal.end());
    const std::size_t depth = std::min(k, ranking.size());
    std::size_t hits = 0;
    for (std::size_t i = 0; i < depth; ++i) {
        hits += truth.contains(ranking[i]) ? 1 : 0;
    }
    return static_cast<double>(hits) / static_cast<double>(std::min(k, truth.size()));
}

}  // namespace gwasdl
