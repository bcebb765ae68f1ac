#include "gwasdl/assoc/gwas.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>

#include "gwasdl/assoc/normal.hpp"
#include "gwasdl/error.hpp"

namespace gwasdl {

namespace {

VariantStats scan_one(const GenotypeMatrix& genotypes, std::size_t snp, std::span<const std::size_t> rows,
                      Eigen::MatrixXd& design, const Eigen::VectorXd& y, const IrlsConfig& irls) {
    VariantStats stats;
    stats.snp_index = snp;
    const auto dosage = genotypes.imputed_column(snp, rows);
    double mean = 0.0;
    for (const double d : dosage) {
        mean += d;
    }
    mean /= static_cast<double>(dosage.size());
    double ss = 0.0;
    for (std::size_t r = 0; r < dosage.size(); ++r) {
        design(static_cast<Eigen::Index>(r), 1) = dosage[r];
        ss += (dosage[r] - mean) * (dosage[r] - mean);
    }
    const double freq = mean / 2.0;
    stats.maf = std::min(freq, 1.0 - freq);
    if (!(ss > 1e-12)) {
        // Monomorphic: nothing to test.
        stats.se = std::numeric_limits<double>::infinity();
        stats.p_value = 1.0;
        stats.converged = false;
        return stats;
    }
    try {
        const LogisticFit fit = fit_logistic_irls(design, y, irls);
        stats.beta = fit.beta[1];
        stats.se = fit.se[1];
        stats.wald_z = stats.beta / stats.se;
        stats.p_value = two_sided_p(stats.wald_z);
        stats.converged = fit.converged;
    } catch (const Error& e) {
        if (e.code() != ErrorCode::SingularSystem) {
            throw;
        }
        stats.se = std::numeric_limits<double>::infinity();
        stats.p_value = 1.0;
        stats.converged = false;
    }
    return stats;
}

}  // namespace

std::vector<std::size_t> labelled_rows(const Cohort& cohort, std::size_t disease) {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < cohort.n_samples(); ++i) {
        if (cohort.phenotypes.observed(i, disease)) {
            rows.push_back(i);
        }
    }
    return rows;
}

std::vector<VariantStats> gwas_scan(const Cohort& cohort, const std::string& disease,
                                    const ScanOptions& options) {
    options.irls.validate();
    const std::size_t d = cohort.phenotypes.index_of(disease);
    if (!cohort.phenotypes.usable(d)) {
        throw Error(ErrorCode::DegenerateLabels, "disease '" + disease + "' lacks cases or controls");
    }
    const auto rows = labelled_rows(cohort, d);
    const auto n = static_cast<Eigen::Index>(rows.size());

    const bool with_cov = options.use_covariates && cohort.covariates.present();
    if (options.use_covariates && !cohort.covariates.present()) {
        throw Error(ErrorCode::ConfigInvalid, "use_covariates requested but cohort has no covariates");
    }
    const Eigen::Index n_cov = with_cov ? static_cast<Eigen::Index>(cohort.covariates.n_columns()) : 0;
    Eigen::MatrixXd base(n, 2 + n_cov);
    Eigen::VectorXd y(n);
    for (Eigen::Index r = 0; r < n; ++r) {
        const auto i = rows[static_cast<std::size_t>(r)];
        base(r, 0) = 1.0;
        base(r, 1) = 0.0;
        for (Eigen::Index c = 0; c < n_cov; ++c) {
            base(r, 2 + c) = cohort.covariates.value(i, static_cast<std::size_t>(c));
        }
        y[r] = cohort.phenotypes.label(i, d);
    }
    if (with_cov) {
        // Constant covariate columns would make X'WX singular up to the ridge.
        std::vector<Eigen::Index> keep{0, 1};
        for (Eigen::Index c = 0; c < n_cov; ++c) {
            const auto col = base.col(2 + c);
            if ((col.array() - col.mean()).abs().maxCoeff() > 1e-12) {
                keep.push_back(2 + c);
            }
        }
        Eigen::MatrixXd reduced(n, static_cast<Eigen::Index>(keep.size()));
        for (std::size_t k = 0; k < keep.size(); ++k) {
            reduced.col(static_cast<Eigen::Index>(k)) = base.col(keep[k]);
        }
        base = std::move(reduced);
    }

    const std::size_t m = cohort.n_snps();
    std::vector<VariantStats> out(m);
    const unsigned threads = std::max(1u, std::min<unsigned>(options.threads, static_cast<unsigned>(std::max<std::size_t>(m, 1))));
    std::vector<std::exception_ptr> failures(threads);
    auto worker = [&](unsigned slot, std::size_t begin, std::size_t end) {
        try {
            Eigen::MatrixXd design = base;
            for (std::size_t j = begin; j < end; ++j) {
                out[j] = scan_one(cohort.genotypes, j, rows, design, y, options.irls);
            }
        } catch (...) {
            failures[slot] = std::current_exception();
        }
    };
    if (threads == 1) {
        worker(0, 0, m);
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (m + threads - 1) / threads;
        for (unsigned t = 0; t < threads; ++t) {
            const std::size_t begin = t * chunk;
            const std::size_t end = std::min(m, begin + chunk);
            if (begin < end) {
                pool.emplace_back(worker, t, begin, end);
            }
        }
        for (auto& th : pool) {
            th.join();
        }
    }
    for (const auto& failure : failures) {
        if (failure) {
            std::rethrow_exception(failure);
        }
    }
    return out;
}

}  // namespace gwasdl
