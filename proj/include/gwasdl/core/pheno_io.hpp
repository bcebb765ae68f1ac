#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "gwasdl/core/cohort.hpp"

namespace gwasdl {

struct PhenotypeLoadReport {
    std::size_t unmatched_rows = 0;          // CSV rows whose sample_id is not in the cohort
    std::size_t samples_absent = 0;          // cohort samples with no CSV row
    std::size_t missing_covariate_rows = 0;  // dropped for NA covariates
    std::size_t unlabeled_samples = 0;       // dropped because every label is NA
    std::vector<std::string> unusable_diseases;  // no case or no control left
};

/// Header: sample_id,label_<d1>,...,label_<dK>,age,sex,pc1,...,pcP. Labels are
/// 0, 1 or NA. Returns the cohort restricted to matched, labelled samples with
/// complete covariates, in original sample order.
Cohort load_phenotypes_covariates(const Cohort& cohort, const std::filesystem::path& csv_path,
                                  PhenotypeLoadReport* report = nullptr);

void write_phenotypes_covariates(const Cohort& cohort, const std::filesystem::path& csv_path);

}  // namespace gwasdl
