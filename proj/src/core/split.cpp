#include "gwasdl/core/split.hpp"

#include <algorithm>
#include <cmath>

#include "gwasdl/error.hpp"
#include "gwasdl/rng.hpp"

namespace gwasdl {

namespace {

std::size_t train_share(double fraction, std::size_t n) {
    // The epsilon absorbs representation error such as 0.29 * 100 = 28.999...
    return static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n) + 1e-9));
}

}  // namespace

Split split_rows(std::span<const std::size_t> rows, const PhenotypeTable* phenotypes, int disease,
                 double train_fraction, std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw Error(ErrorCode::ConfigInvalid, "train_fraction must lie in (0, 1)");
    }
    std::vector<std::vector<std::size_t>> strata;
    if (disease < 0 || phenotypes == nullptr) {
        strata.emplace_back(rows.begin(), rows.end());
    } else {
        strata.resize(3);  // controls, cases, unlabelled
        const auto d = static_cast<std::size_t>(disease);
        for (const std::size_t r : rows) {
            const auto label = phenotypes->label(r, d);
            strata[label == kMissingLabel ? 2 : static_cast<std::size_t>(label)].push_back(r);
        }
        if (strata[0].size() < 2 || strata[1].size() < 2) {
            throw Error(ErrorCode::StratumTooSmall,
                        "stratified split needs >= 2 cases and >= 2 controls (have " +
                            std::to_string(strata[1].size()) + " cases, " +
                            std::to_string(strata[0].size()) + " controls)");
        }
    }

    Rng rng(derive_seed(seed, "split"));
    Split split;
    for (auto& stratum : strata) {
        rng.shuffle(stratum);
        const std::size_t k = train_share(train_fraction, stratum.size());
        split.train.insert(split.train.end(), stratum.begin(), stratum.begin() + static_cast<std::ptrdiff_t>(k));
        split.test.insert(split.test.end(), stratum.begin() + static_cast<std::ptrdiff_t>(k), stratum.end());
    }
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.test.begin(), split.test.end());
    return split;
}

Split split_cohort(const Cohort& cohort, const SplitSpec& spec) {
    std::vector<std::size_t> rows(cohort.n_samples());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        rows[i] = i;
    }
    int disease = -1;
    if (spec.stratify_by != "none" && !spec.stratify_by.empty()) {
        disease = static_cast<int>(cohort.phenotypes.index_of(spec.stratify_by));
    }
    return split_rows(rows, &cohort.phenotypes, disease, spec.train_fraction, spec.seed);
}

Cohort standardize_covariates(const Cohort& cohort) {
    Cohort out = cohort;
    auto& cov = out.covariates;
    if (!cov.present()) {
        return out;
    }
    const std::size_t n = cov.n_samples();
    std::vector<bool> constant(cov.n_columns(), false);
    for (std::size_t c = 0; c < cov.n_columns(); ++c) {
        auto col = cov.mutable_column(c);
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
        if (!(sd > 1e-12 * std::max(1.0, std::abs(mean)))) {
            std::fill(col.begin(), col.end(), 0.0);
            constant[c] = true;
            continue;
        }
        for (double& v : col) {
            v = (v - mean) / sd;
        }
    }
    cov.set_constant_columns(std::move(constant));
    return out;
}

}  // namespace gwasdl
