#include "gwasdl/assoc/pca.hpp"

#include <algorithm>
#include <cmath>

#include "gwasdl/error.hpp"

namespace gwasdl {

namespace {

void fix_sign(Eigen::Ref<Eigen::VectorXd> v) {
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v[arg] < 0.0) {
        v = -v;
    }
}

}  // namespace

PcaResult top_eigenpairs(const Eigen::MatrixXd& matrix, std::size_t k) {
    const Eigen::Index n = matrix.rows();
    if (static_cast<Eigen::Index>(k) > n) {
        throw Error(ErrorCode::ConfigInvalid, "more components requested than rows");
    }
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(matrix);
    if (solver.info() != Eigen::Success) {
        throw Error(ErrorCode::ConvergenceFailure, "symmetric eigendecomposition failed");
    }
    // Eigen orders eigenvalues ascending.
    PcaResult result;
    result.components.resize(n, static_cast<Eigen::Index>(k));
    result.eigenvalues.resize(static_cast<Eigen::Index>(k));
    for (Eigen::Index c = 0; c < static_cast<Eigen::Index>(k); ++c) {
        result.components.col(c) = solver.eigenvectors().col(n - 1 - c);
        result.eigenvalues[c] = solver.eigenvalues()[n - 1 - c];
        fix_sign(result.components.col(c));
    }
    return result;
}

PcaResult compute_pcs(const Cohort& cohort, std::size_t k) {
    const std::size_t n = cohort.n_samples();
    const std::size_t m = cohort.n_snps();
    if (k > std::min(n, m)) {
        throw Error(ErrorCode::ConfigInvalid, "k exceeds min(n_samples, n_snps)");
    }
    Eigen::MatrixXd z(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
    for (std::size_t j = 0; j < m; ++j) {
        const auto col = cohort.genotypes.imputed_column(j);
        double mean = 0.0;
        for (const double v : col) {
            mean += v;
        }
        mean /= static_cast<double>(n);
        double ss = 0.0;
        for (const double v : col) {
            ss += (v - mean) * (v - mean);
        }
        const double sd = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            z(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = sd > 1e-12 ? (col[i] - mean) / sd : 0.0;
        }
    }
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    cov.selfadjointView<Eigen::Lower>().rankUpdate(z, 1.0 / static_cast<double>(std::max<std::size_t>(m, 1)));
    cov.triangularView<Eigen::StrictlyUpper>() = cov.transpose();
    return top_eigenpairs(cov, k);
}

void assign_pcs(Cohort& cohort, const PcaResult& pcs) {
    const auto k = static_cast<std::size_t>(pcs.components.cols());
    CovariateTable table(cohort.n_samples(), k);
    if (cohort.covariates.present()) {
        for (std::size_t i = 0; i < cohort.n_samples(); ++i) {
            table.age(i) = cohort.covariates.age(i);
            table.sex(i) = cohort.covariates.sex(i);
        }
    }
    for (std::size_t i = 0; i < cohort.n_samples(); ++i) {
        for (std::size_t c = 0; c < k; ++c) {
            table.pc(i, c) = pcs.components(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c));
        }
    }
    cohort.covariates = std::move(table);
}

}  // namespace gwasdl
