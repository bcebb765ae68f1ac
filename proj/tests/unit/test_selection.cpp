#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "fixtures.hpp"
#include "gwasdl/error.hpp"
#include "gwasdl/selection/selection.hpp"

using namespace gwasdl;

namespace {

Cohort null_cohort(std::size_t n, std::size_t m, std::uint64_t seed) {
    Cohort cohort = testing::simulated_cohort(n, m, seed);
    Rng rng(derive_seed(seed, "null-labels"));
    std::vector<std::int8_t> labels(n);
    for (auto& y : labels) {
        y = rng.uniform() < 0.5 ? 1 : 0;
    }
    testing::add_labels(cohort, "disease", std::move(labels));
    return cohort;
}

std::vector<std::size_t> iota_rows(std::size_t n) {
    std::vector<std::size_t> rows(n);
    std::iota(rows.begin(), rows.end(), 0);
    return rows;
}

}  // namespace

TEST_CASE("null selection size is binomial") {
    const auto cohort = null_cohort(600, 10000, 21);
    const auto population = select_snps(cohort, "disease", 0.05, SelectionScope::PopulationLevel);
    CHECK(population.snp_indices.size() >= 430);
    CHECK(population.snp_indices.size() <= 570);
    CHECK(population.source_sample_count == 600);

    const auto split = split_rows(iota_rows(600), &cohort.phenotypes, 0, 0.8, 3);
    const auto train_only = select_snps(cohort, "disease", 0.05, SelectionScope::TrainOnly, split.train);
    CHECK(train_only.snp_indices.size() >= 430);
    CHECK(train_only.snp_indices.size() <= 570);
    CHECK(train_only.source_sample_count == split.train.size());
    CHECK(std::is_sorted(train_only.snp_indices.begin(), train_only.snp_indices.end()));
}

TEST_CASE("threshold one keeps every convergent SNP") {
    auto cohort = null_cohort(200, 300, 4);
    // A monomorphic column never converges and stays out.
    for (std::size_t i = 0; i < 200; ++i) {
        cohort.genotypes.set_dosage(i, 7, 0.0);
    }
    const auto stats = gwas_scan(cohort, "disease");
    const auto convergent = std::count_if(stats.begin(), stats.end(), [](const auto& s) { return s.converged; });
    const auto all = select_snps(cohort, "disease", 1.0, SelectionScope::PopulationLevel);
    CHECK(all.snp_indices.size() == static_cast<std::size_t>(convergent));
    CHECK(std::find(all.snp_indices.begin(), all.snp_indices.end(), 7) == all.snp_indices.end());
}

TEST_CASE("selection argument checks") {
    const auto cohort = null_cohort(100, 50, 5);
    auto code = [&](auto fn) {
        try {
            fn();
        } catch (const Error& e) {
            return e.code();
        }
        return ErrorCode::IoFailure;
    };
    CHECK(code([&] { select_snps(cohort, "disease", 0.0, SelectionScope::PopulationLevel); }) ==
          ErrorCode::SpecInvalid);
    CHECK(code([&] { select_snps(cohort, "disease", 1.5, SelectionScope::PopulationLevel); }) ==
          ErrorCode::SpecInvalid);
    CHECK(code([&] { select_snps(cohort, "disease", 1e-300, SelectionScope::PopulationLevel); }) ==
          ErrorCode::EmptySelection);
    CHECK(code([&] { select_snps(cohort, "disease", 0.05, SelectionScope::TrainOnly); }) == ErrorCode::SpecInvalid);
}

TEST_CASE("planted causal SNP is selected in both scopes") {
    const auto cohort = testing::planted_cohort(2000, 200, {117}, 0.5, 9);
    const auto stats = gwas_scan(cohort, "disease");
    REQUIRE(stats[117].p_value < 1e-8);
    const auto population = select_snps(cohort, "disease", 0.01, SelectionScope::PopulationLevel);
    const auto split = split_rows(iota_rows(2000), &cohort.phenotypes, 0, 0.8, 1);
    const auto train_only = select_snps(cohort, "disease", 0.01, SelectionScope::TrainOnly, split.train);
    CHECK(std::binary_search(population.snp_indices.begin(), population.snp_indices.end(), 117));
    CHECK(std::binary_search(train_only.snp_indices.begin(), train_only.snp_indices.end(), 117));
}

TEST_CASE("selection size is monotone in the threshold") {
    const auto cohort = null_cohort(300, 2000, 13);
    const auto stats = gwas_scan(cohort, "disease");
    std::size_t previous = 0;
    for (const double t : {1e-4, 1e-3, 0.01, 0.05, 0.1, 0.2, 0.5, 1.0}) {
        const auto kept = passing_snps(stats, t);
        CHECK(kept.size() >= previous);
        previous = kept.size();
    }
}

TEST_CASE("train-only selection never reads test labels") {
    auto cohort = null_cohort(400, 3000, 17);
    const auto split = split_rows(iota_rows(400), &cohort.phenotypes, 0, 0.8, 2);
    const auto before = select_snps(cohort, "disease", 0.05, SelectionScope::TrainOnly, split.train);
    Rng rng(99);
    for (const auto r : split.test) {
        const double u = rng.uniform();
        cohort.phenotypes.set_label(r, 0, u < 0.3 ? 1 : (u < 0.6 ? 0 : kMissingLabel));
    }
    const auto after = select_snps(cohort, "disease", 0.05, SelectionScope::TrainOnly, split.train);
    CHECK(after == before);
    const auto leaky = select_snps(cohort, "disease", 0.05, SelectionScope::PopulationLevel);
    CHECK(leaky.source_sample_count != 400);
}

TEST_CASE("leakage experiment arms share the split") {
    const auto cohort = null_cohort(400, 5000, 31);
    LeakageOptions options;
    options.split.seed = 6;
    const auto report = leakage_experiment(cohort, "disease", options);
    const auto split = leakage_split(cohort, 0, options);
    CHECK(report.split.train == split.train);
    CHECK(report.split.test == split.test);
    const auto cases = cohort.phenotypes.case_count(0);
    CHECK(report.split.train.size() ==
          static_cast<std::size_t>(0.8 * static_cast<double>(cases)) +
              static_cast<std::size_t>(0.8 * static_cast<double>(400 - cases)));
    CHECK(report.auc_leaky >= 0.0);
    CHECK(report.auc_leaky <= 1.0);
    CHECK(report.auc_clean >= 0.0);
    CHECK(report.auc_clean <= 1.0);
    CHECK(report.auc_leaky > report.auc_clean);
    CHECK(report.n_selected_leaky > 0);
    CHECK(report.n_selected_clean > 0);

    const auto again = leakage_experiment(cohort, "disease", options);
    CHECK(again.auc_leaky == report.auc_leaky);
    CHECK(again.auc_clean == report.auc_clean);
}

TEST_CASE("empty selections fall back to chance") {
    const auto cohort = null_cohort(200, 300, 8);
    LeakageOptions options;
    options.threshold = 1e-12;
    const auto report = leakage_experiment(cohort, "disease", options);
    CHECK(report.leaky_empty);
    CHECK(report.clean_empty);
    CHECK(report.auc_leaky == 0.5);
    CHECK(report.auc_clean == 0.5);
    CHECK(report.n_selected_leaky == 0);
}

// n = 1,000 rather than the n = 400 of the null construction: at n = 400 the
// clean arm has too little power for 20 planted SNPs among 5,000 to clear 0.6.
TEST_CASE("planted signal shrinks the leakage gap") {
    double null_gap = 0.0;
    double signal_gap = 0.0;
    int both_above = 0;
    std::vector<std::size_t> causal(20);
    for (std::size_t k = 0; k < 20; ++k) {
        causal[k] = 100 + 250 * k;
    }
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        LeakageOptions options;
        options.split.seed = seed;
        const auto null_report = leakage_experiment(null_cohort(1000, 5000, seed), "disease", options);
        const auto signal_report =
            leakage_experiment(testing::planted_cohort(1000, 5000, causal, 0.8, seed), "disease", options);
        MESSAGE("seed " << seed << ": null " << null_report.auc_leaky << "/" << null_report.auc_clean << ", signal "
                        << signal_report.auc_leaky << "/" << signal_report.auc_clean);
        null_gap += null_report.auc_leaky - null_report.auc_clean;
        signal_gap += signal_report.auc_leaky - signal_report.auc_clean;
        both_above += (signal_report.auc_leaky > 0.6 && signal_report.auc_clean > 0.6) ? 1 : 0;
    }
    CHECK(both_above == 3);
    CHECK(signal_gap < null_gap);
}

TEST_CASE("network leakage models run on small selections") {
    const auto cohort = testing::planted_cohort(240, 400, {10, 200}, 1.0, 12);
    for (const auto model : {LeakageModel::MlpStandard, LeakageModel::CnnStandard}) {
        LeakageOptions options;
        options.model = model;
        options.threshold = 0.01;
        options.training.epochs = 3;
        const auto report = leakage_experiment(cohort, "disease", options);
        CHECK(report.model_kind == model);
        CHECK(report.auc_leaky >= 0.0);
        CHECK(report.auc_leaky <= 1.0);
        CHECK(report.auc_clean >= 0.0);
        CHECK(report.auc_clean <= 1.0);
    }
}

TEST_CASE("conv stacks shrink to fit short inputs") {
    nn::ModelConfig base;
    base.kind = nn::ModelKind::CnnStandard;
    for (const std::size_t m : {1, 2, 5, 9, 20, 44, 100, 1000}) {
        const auto fitted = fit_conv_stack(base, m);
        CHECK_NOTHROW(nn::Network(fitted, m, 1));
    }
    CHECK(fit_conv_stack(base, 10000).conv_channels == base.conv_channels);
}
