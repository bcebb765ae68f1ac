#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "fixtures.hpp"
#include "gwasdl/attribution/saliency.hpp"
#include "gwasdl/error.hpp"
#include "gwasdl/nn/train.hpp"

using namespace gwasdl;

namespace {

std::vector<std::size_t> iota_rows(std::size_t n) {
    std::vector<std::size_t> rows(n);
    std::iota(rows.begin(), rows.end(), 0);
    return rows;
}

nn::Parameter& parameter(nn::Network& net, const std::string& name) {
    for (auto& p : net.parameters()) {
        if (p.name == name) {
            return p;
        }
    }
    FAIL("no parameter " << name);
    throw;
}

}  // namespace

TEST_CASE("linear model saliency is the absolute weight") {
    const auto cohort = testing::planted_cohort(30, 12, {2}, 1.0, 3);
    nn::ModelConfig config;
    config.kind = nn::ModelKind::MlpStandard;
    config.dense_widths = {};
    auto model = nn::build_model(config, 12, 5);
    const auto& w = parameter(model.network, "output.weight").tensor.values();
    const auto result = saliency(model, cohort, 0, iota_rows(30), 7);
    REQUIRE(result.scores.size() == 12);
    for (std::size_t j = 0; j < 12; ++j) {
        CHECK(result.scores[j] == doctest::Approx(std::abs(w[j])).epsilon(1e-14));
    }
    CHECK(result.untrained_model);
    CHECK(result.disease == "disease");

    std::vector<std::size_t> by_weight = iota_rows(12);
    std::stable_sort(by_weight.begin(), by_weight.end(),
                     [&](std::size_t a, std::size_t b) { return std::abs(w[a]) > std::abs(w[b]); });
    CHECK(top_k(result.scores, 12) == by_weight);
}

TEST_CASE("single SNP linear model") {
    auto cohort = testing::planted_cohort(20, 1, {0}, 1.0, 8, 1);
    nn::ModelConfig config;
    config.kind = nn::ModelKind::MlpStandard;
    config.dense_widths = {};
    auto model = nn::build_model(config, 1, 2);
    parameter(model.network, "output.weight").tensor.mutable_values()[0] = -1.75;
    const auto result = saliency(model, cohort, 0, iota_rows(20));
    CHECK(result.scores[0] == 1.75);
}

TEST_CASE("zeroed input column has zero saliency") {
    const auto cohort = testing::planted_cohort(25, 40, {2}, 1.0, 3);
    for (const auto kind : {nn::ModelKind::MlpStandard, nn::ModelKind::MlpChromosome}) {
        nn::ModelConfig config;
        config.kind = kind;
        config.dense_widths = {8, 4};
        config.chromosome_boundaries = {{1, 0, 20}, {2, 20, 40}};
        auto model = nn::build_model(config, 40, 5);
        const std::string first = kind == nn::ModelKind::MlpStandard ? "head0.weight" : "chr1.dense.weight";
        const std::size_t column = kind == nn::ModelKind::MlpStandard ? 17 : 37 - 20;
        auto& w = parameter(model.network, first).tensor;
        const std::size_t fan_in = w.dim(1);
        for (std::size_t o = 0; o < w.dim(0); ++o) {
            w.mutable_values()[o * fan_in + column] = 0.0;
        }
        const auto result = saliency(model, cohort, 0, iota_rows(25));
        CHECK(result.scores[kind == nn::ModelKind::MlpStandard ? 17 : 37] == 0.0);
        CHECK(std::count(result.scores.begin(), result.scores.end(), 0.0) == 1);
    }
}

TEST_CASE("saliency ignores sample order and sums Prob3 channels") {
    auto cohort = testing::planted_cohort(40, 100, {2}, 1.0, 3);
    nn::ModelConfig config;
    config.kind = nn::ModelKind::CnnStandard;
    config.conv_channels = {3, 4};
    config.kernel_size = 5;
    config.stride = 2;
    config.adaptive_pool_len = 4;
    config.dense_widths = {6};
    const auto model = nn::build_model(config, 100, 1);
    auto rows = iota_rows(40);
    const auto forward = saliency(model, cohort, 0, rows, 16);
    std::reverse(rows.begin(), rows.end());
    const auto backward_order = saliency(model, cohort, 0, rows, 16);
    for (std::size_t j = 0; j < 100; ++j) {
        CHECK(std::abs(forward.scores[j] - backward_order.scores[j]) <= 1e-12);
        CHECK(forward.scores[j] >= 0.0);
    }

    auto prob_config = config;
    prob_config.input_channels = 3;
    GenotypeMatrix soft(40, 100, GenotypeEncoding::Prob3);
    for (std::size_t i = 0; i < 40; ++i) {
        for (std::size_t j = 0; j < 100; ++j) {
            auto p = cohort.genotypes.probabilities(i, j);
            for (auto& v : p) {
                v = 0.8 * v + 0.2 / 3.0;
            }
            soft.set_probabilities(i, j, p);
        }
    }
    cohort.genotypes = soft;
    const auto prob_model = nn::build_model(prob_config, 100, 1);
    const auto prob = saliency(prob_model, cohort, 0, iota_rows(40));
    CHECK(prob.scores.size() == 100);
    CHECK(std::all_of(prob.scores.begin(), prob.scores.end(), [](double s) { return s >= 0.0; }));

    CHECK_THROWS_AS(saliency(model, cohort, 0, std::vector<std::size_t>{}), Error);
    CHECK_THROWS_AS(saliency(model, cohort, 1, iota_rows(4)), Error);
}

TEST_CASE("top k ordering") {
    CHECK(top_k(std::vector<double>{3, 1, 3, 2}, 3) == std::vector<std::size_t>{0, 2, 3});
    CHECK(top_k(std::vector<double>(6, 0.25), 4) == std::vector<std::size_t>{0, 1, 2, 3});
    const std::vector<double> scores{0.1, 0.9, 0.4, 0.4, 0.0, 0.7};
    auto all = top_k(scores, scores.size());
    CHECK(all == std::vector<std::size_t>{1, 5, 2, 3, 0, 4});
    std::sort(all.begin(), all.end());
    CHECK(all == iota_rows(6));
    try {
        top_k(scores, 7);
        FAIL("expected KTooLarge");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::KTooLarge);
    }
}

TEST_CASE("causal recall") {
    const std::vector<std::size_t> ranking{4, 9, 1, 7, 3, 0, 2};
    CHECK(causal_recall(ranking, std::vector<std::size_t>{9, 4, 1}, 5) == 1.0);
    CHECK(causal_recall(ranking, std::vector<std::size_t>{5, 6, 8}, 7) == 0.0);
    const std::vector<std::size_t> ten{4, 9, 1, 100, 101, 102, 103, 104, 105, 106};
    CHECK(causal_recall(ranking, ten, 5) == doctest::Approx(0.6));

    Rng rng(14);
    std::vector<double> scores(200);
    for (auto& s : scores) {
        s = rng.uniform();
    }
    const auto ordered = top_k(scores, 200);
    const std::vector<std::size_t> causal{3, 50, 77, 120, 199, 0};
    std::size_t hits_before = 0;
    for (std::size_t k = 1; k <= 200; ++k) {
        const double recall = causal_recall(ordered, causal, k);
        const auto hits = static_cast<std::size_t>(std::lround(recall * static_cast<double>(std::min(k, causal.size()))));
        CHECK(hits >= hits_before);
        hits_before = hits;
        if (k >= causal.size()) {
            CHECK(recall >= causal_recall(ordered, causal, k - 1) - 1e-15);
        }
    }
}
