#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "gwasdl/core/cohort.hpp"
#include "gwasdl/rng.hpp"
#include "gwasdl/simulate/simulate.hpp"

namespace gwasdl::testing {

// Scratch directory removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        Rng rng(derive_seed(static_cast<std::uint64_t>(std::hash<std::string>{}(tag)),
                            static_cast<std::uint64_t>(reinterpret_cast<std::uintptr_t>(this))));
        path_ = std::filesystem::temp_directory_path() / ("gwasdl_" + tag + "_" + std::to_string(rng.next_u64()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline Cohort simulated_cohort(std::size_t n, std::size_t m, std::uint64_t seed, std::size_t chromosomes = 2) {
    SimSpec spec;
    spec.n_samples = n;
    spec.n_snps = m;
    spec.n_chromosomes = chromosomes;
    spec.ld_block_size = std::min<std::size_t>(50, m);
    spec.seed = seed;
    return simulate_genotypes(spec);
}

inline void add_labels(Cohort& cohort, const std::string& name, std::vector<std::int8_t> labels) {
    if (cohort.phenotypes.n_samples() == 0) {
        cohort.phenotypes = PhenotypeTable({}, cohort.n_samples());
    }
    cohort.phenotypes.add_disease(name, std::move(labels));
}

// Cohort with `causal.size()` planted SNPs of log-odds `beta` per standardized dosage.
inline Cohort planted_cohort(std::size_t n, std::size_t m, const std::vector<std::size_t>& causal, double beta,
                             std::uint64_t seed, std::size_t chromosomes = 2) {
    Cohort cohort = simulated_cohort(n, m, seed, chromosomes);
    PhenoSpec spec;
    spec.name = "disease";
    spec.causal_indices = causal;
    spec.effect_sizes.assign(causal.size(), beta);
    spec.prevalence = 0.5;
    spec.seed = derive_seed(seed, "pheno");
    add_labels(cohort, spec.name, simulate_phenotype(cohort, spec));
    return cohort;
}

}  // namespace gwasdl::testing
