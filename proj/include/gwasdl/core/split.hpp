#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gwasdl/core/cohort.hpp"

namespace gwasdl {

struct SplitSpec {
    double train_fraction = 0.8;
    std::uint64_t seed = 0;
    std::string stratify_by = "none";  // disease name or "none"
};

struct Split {
    std::vector<std::size_t> train;  // ascending
    std::vector<std::size_t> test;   // ascending
};

/// Seeded train/test partition. Stratified splits treat cases, controls and
/// unlabelled samples as separate strata and send floor(fraction * size) of
/// each to train.
Split split_cohort(const Cohort& cohort, const SplitSpec& spec);

/// Same partitioning applied to an arbitrary row subset; `disease` < 0 means
/// unstratified. Returned indices are drawn from `rows`.
Split split_rows(std::span<const std::size_t> rows, const PhenotypeTable* phenotypes, int disease,
                 double train_fraction, std::uint64_t seed);

/// Centre and scale every covariate column to mean 0, sample SD 1 (n - 1).
/// Constant columns become zeros and are flagged in constant_columns().
Cohort standardize_covariates(const Cohort& cohort);

}  // namespace gwasdl
