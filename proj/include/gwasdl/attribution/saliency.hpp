#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "gwasdl/core/cohort.hpp"
#include "gwasdl/nn/model.hpp"

namespace gwasdl {

enum class AttributionMethod { SaliencyAbsGrad };

struct AttributionResult {
    std::string disease;
    std::vector<double> scores;       // one per SNP, non-negative
    std::vector<std::size_t> top_k;   // filled by the caller via top_k()
    AttributionMethod method = AttributionMethod::SaliencyAbsGrad;
    bool untrained_model = false;     // scored a model with no training epochs
};

/// score_j = mean over `rows` of |d logit(label) / d input_j|, summed over
/// input channels. Dropout is off. `label` indexes the model's outputs.
AttributionResult saliency(const nn::TrainedModel& model, const Cohort& cohort, std::size_t label,
                           std::span<const std::size_t> rows, std::size_t batch_size = 128);

/// Indices of the k largest scores, descending; equal scores keep ascending
/// index order. Throws KTooLarge when k exceeds the score count.
std::vector<std::size_t> top_k(std::span<const double> scores, std::size_t k);

/// |top_k[:k] intersect causal| / min(k, |causal|).
double causal_recall(std::span<const std::size_t> ranking, std::span<const std::size_t> causal, std::size_t k);

}  // namespace gwasdl
