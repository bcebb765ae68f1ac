#pragma once

#include <cstdint>
#include <span>

namespace gwasdl::eval {

/// Area under the ROC curve via the Mann-Whitney U statistic, using mid-ranks
/// so that tied scores count one half. Labels are 0/1. Throws DegenerateLabels
/// without at least one positive and one negative.
double auc_roc(std::span<const double> scores, std::span<const std::int8_t> labels);

/// O(n_pos * n_neg) reference implementation.
double auc_pairwise(std::span<const double> scores, std::span<const std::int8_t> labels);

}  // namespace gwasdl::eval
