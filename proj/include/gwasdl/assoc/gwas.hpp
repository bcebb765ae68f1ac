#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "gwasdl/assoc/irls.hpp"
#include "gwasdl/core/cohort.hpp"

namespace gwasdl {

struct VariantStats {
    std::size_t snp_index = 0;
    double beta = 0.0;
    double se = 0.0;
    double wald_z = 0.0;
    double p_value = 1.0;
    double maf = 0.0;
    bool converged = false;
};

struct ScanOptions {
    bool use_covariates = false;
    IrlsConfig irls;
    unsigned threads = 1;
};

/// Per-SNP logistic regression of one disease on [1, dosage (, covariates)],
/// restricted to samples whose label is observed. Missing dosages take the
/// mean over those samples. Output is ordered by snp_index for any thread count.
std::vector<VariantStats> gwas_scan(const Cohort& cohort, const std::string& disease,
                                    const ScanOptions& options = {});

/// Rows of the cohort with an observed label for the disease.
std::vector<std::size_t> labelled_rows(const Cohort& cohort, std::size_t disease);

}  // namespace gwasdl
