#include "gwasdl/eval/auc.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

#include "gwasdl/error.hpp"

namespace gwasdl::eval {

namespace {

void check_inputs(std::span<const double> scores, std::span<const std::int8_t> labels, std::size_t& n_pos,
                  std::size_t& n_neg) {
    if (scores.size() != labels.size()) {
        throw Error(ErrorCode::ShapeMismatch, "scores and labels differ in length");
    }
    n_pos = 0;
    n_neg = 0;
    for (const auto y : labels) {
        if (y == 1) {
            ++n_pos;
        } else if (y == 0) {
            ++n_neg;
        } else {
            throw Error(ErrorCode::DegenerateLabels, "AUC labels must be 0 or 1");
        }
    }
    if (n_pos == 0 || n_neg == 0) {
        throw Error(ErrorCode::DegenerateLabels, "AUC needs at least one positive and one negative");
    }
}

}  // namespace

double auc_roc(std::span<const double> scores, std::span<const std::int8_t> labels) {
    std::size_t n_pos = 0;
    std::size_t n_neg = 0;
    check_inputs(scores, labels, n_pos, n_neg);
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    // Twice the rank sum keeps mid-ranks integral.
    std::uint64_t twice_rank_sum = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) {
            ++j;
        }
        const std::uint64_t twice_mid = (i + 1) + (j + 1);
        for (std::size_t t = i; t <= j; ++t) {
            if (labels[order[t]] == 1) {
                twice_rank_sum += twice_mid;
            }
        }
        i = j + 1;
    }
    const std::uint64_t twice_u = twice_rank_sum - static_cast<std::uint64_t>(n_pos) * (n_pos + 1);
    return static_cast<double>(twice_u) / (2.0 * static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double auc_pairwise(std::span<const double> scores, std::span<const std::int8_t> labels) {
    std::size_t n_pos = 0;
    std::size_t n_neg = 0;
    check_inputs(scores, labels, n_pos, n_neg);
    double total = 0.0;
    for (std::size_t a = 0; a < scores.size(); ++a) {
        if (labels[a] != 1) {
            continue;
        }
        for (std::size_t b = 0; b < scores.size(); ++b) {
            if (labels[b] != 0) {
                continue;
            }
            if (scores[a] > scores[b]) {
                total += 1.0;
            } else if (scores[a] == scores[b]) {
                total += 0.5;
            }
        }
    }
    return total / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

}  // namespace gwasdl::eval
