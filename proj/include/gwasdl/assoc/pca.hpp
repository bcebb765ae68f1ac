#pragma once

#include <cstddef>

#include <Eigen/Dense>

#include "gwasdl/core/cohort.hpp"

namespace gwasdl {

struct PcaResult {
    Eigen::MatrixXd components;    // n_samples x k, unit-norm columns
    Eigen::VectorXd eigenvalues;   // descending
};

/// Top-k eigenvectors of Z Z' / m, where Z holds mean-imputed dosages
/// standardised per SNP (sample SD; monomorphic SNPs contribute zeros).
/// Dense symmetric eigendecomposition; each column's largest-magnitude entry is positive.
PcaResult compute_pcs(const Cohort& cohort, std::size_t k);

/// Same on an explicit symmetric matrix.
PcaResult top_eigenpairs(const Eigen::MatrixXd& matrix, std::size_t k);

/// Fill cohort covariate PCs (creating the covariate table if absent).
void assign_pcs(Cohort& cohort, const PcaResult& pcs);

}  // namespace gwasdl
