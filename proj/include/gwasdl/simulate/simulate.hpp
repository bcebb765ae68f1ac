#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "gwasdl/core/cohort.hpp"

namespace gwasdl {

struct SimSpec {
    std::size_t n_samples = 1000;
    std::size_t n_snps = 1000;
    double maf_low = 0.05;
    double maf_high = 0.5;
    std::size_t ld_block_size = 50;
    double ld_rho = 0.0;
    std::size_t n_chromosomes = 10;
    std::uint64_t seed = 1;

    void validate() const;
};

struct CovariateEffects {
    double age = 0.0;
    double sex = 0.0;
    std::vector<double> pcs;

    bool any() const;
};

struct PhenoSpec {
    std::string name = "disease";
    std::vector<std::size_t> causal_indices;
    std::vector<double> effect_sizes;  // log-odds per standardised dosage
    CovariateEffects covariate_effects;
    double prevalence = 0.5;
    std::uint64_t seed = 1;
};

struct DiseaseSpec {
    std::string name;
    std::size_t n_causal = 10;
    double effect_size = 0.5;
    double prevalence = 0.3;
    std::size_t observed_count = 0;
};

struct MultiDiseaseSpec {
    std::vector<DiseaseSpec> diseases;
    double shared_causal_fraction = 0.5;
    CovariateEffects covariate_effects;
    std::uint64_t seed = 1;

    void validate(std::size_t n_samples, std::size_t n_snps) const;
};

struct MultiDiseaseResult {
    Cohort cohort;
    std::vector<PhenoSpec> phenotypes;     // resolved per-disease specs, causal sets included
    std::vector<std::size_t> shared_pool;  // causal SNPs common to all diseases
};

/// Block-wise latent-Gaussian haplotype model. Within a block two AR(1)
/// haplotype chains (lag-one correlation rho) are thresholded at the normal
/// quantile of each SNP's MAF; the dosage is the allele sum. Blocks draw from
/// seeds derived from (seed, block), so generation order never matters.
Cohort simulate_genotypes(const SimSpec& spec);

/// Per-SNP MAFs drawn by simulate_genotypes, recomputed from the SimSpec alone.
std::vector<double> simulated_mafs(const SimSpec& spec);

/// Logistic liability model; the intercept is bisected so the mean risk hits
/// the prevalence within 1e-3.
std::vector<std::int8_t> simulate_phenotype(const Cohort& cohort, const PhenoSpec& spec);

/// Label risks (sigmoid of the liability) used by simulate_phenotype.
std::vector<double> phenotype_risk(const Cohort& cohort, const PhenoSpec& spec);

/// Fair-coin labels independent of everything else.
std::vector<std::int8_t> simulate_null_phenotype(const Cohort& cohort, std::uint64_t seed);

/// Overwrite age (normal, mean by label of `disease`) and sex (fair coin).
/// Unlabelled samples draw from the mid-point mean. PCs are kept; a missing
/// covariate table is created with `n_pcs` zero PCs.
Cohort simulate_age_confound(const Cohort& cohort, const std::string& disease, double case_age_mean,
                             double control_age_mean, double age_sd, std::uint64_t seed,
                             std::size_t n_pcs = 0);

MultiDiseaseResult simulate_multi_disease(const Cohort& cohort, const MultiDiseaseSpec& spec);

}  // namespace gwasdl
