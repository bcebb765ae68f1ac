#pragma once

#include <cstddef>
#include <vector>

#include "gwasdl/core/cohort.hpp"

namespace gwasdl {

struct LdPruneConfig {
    std::size_t window_snps = 50;
    std::size_t step_snps = 5;
    double r2_threshold = 0.5;
};

/// Greedy sliding-window pruning within each chromosome. For every pair in a
/// window with r^2 above the threshold, the lower-MAF SNP is dropped (equal
/// MAF: the larger index). The pass is repeated over the survivors until
/// nothing changes, so pruning a pruned set is a no-op.
std::vector<std::size_t> ld_prune(const Cohort& cohort, const LdPruneConfig& config = {});

/// Squared Pearson correlation of two mean-imputed dosage columns (0 if either
/// is constant).
double dosage_r2(const GenotypeMatrix& genotypes, std::size_t a, std::size_t b);

/// Window starts visited by ld_prune for a chromosome span [begin, end).
std::vector<std::size_t> window_starts(std::size_t begin, std::size_t end, const LdPruneConfig& config);

}  // namespace gwasdl
