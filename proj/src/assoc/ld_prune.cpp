#include "gwasdl/assoc/ld_prune.hpp"

#include <cmath>

#include "gwasdl/error.hpp"

namespace gwasdl {

namespace {

// Columns centred and scaled to unit norm so r = dot product.
std::vector<double> unit_column(const GenotypeMatrix& g, std::size_t snp) {
    auto col = g.imputed_column(snp);
    double mean = 0.0;
    for (const double v : col) {
        mean += v;
    }
    mean /= static_cast<double>(col.size());
    double ss = 0.0;
    for (double& v : col) {
        v -= mean;
        ss += v * v;
    }
    if (!(ss > 1e-12)) {
        std::fill(col.begin(), col.end(), 0.0);
        return col;
    }
    const double inv = 1.0 / std::sqrt(ss);
    for (double& v : col) {
        v *= inv;
    }
    return col;
}

double maf_of(const GenotypeMatrix& g, std::size_t snp) {
    const double f = g.mean_dosage(snp) / 2.0;
    return std::min(f, 1.0 - f);
}

// One pass over `snps` (original indices, ascending); returns survivors.
std::vector<std::size_t> prune_pass(const Cohort& cohort, const std::vector<std::size_t>& snps,
                                    const LdPruneConfig& config) {
    const auto& g = cohort.genotypes;
    const std::size_t m = snps.size();
    std::vector<std::vector<double>> columns(m);
    std::vector<double> maf(m);
    for (std::size_t k = 0; k < m; ++k) {
        columns[k] = unit_column(g, snps[k]);
        maf[k] = maf_of(g, snps[k]);
    }
    // r^2 cache for pairs (k, k + offset), offset < window.
    const std::size_t w = config.window_snps;
    std::vector<double> cache(m * w, -1.0);
    auto r2 = [&](std::size_t a, std::size_t b) {
        double& slot = cache[a * w + (b - a)];
        if (slot < 0.0) {
            double r = 0.0;
            for (std::size_t i = 0; i < columns[a].size(); ++i) {
                r += columns[a][i] * columns[b][i];
            }
            slot = r * r;
        }
        return slot;
    };

    std::vector<ChromosomeSpan> spans;
    for (std::size_t k = 0; k < m; ++k) {
        const int chrom = cohort.variants[snps[k]].chromosome;
        if (spans.empty() || spans.back().chromosome != chrom) {
            spans.push_back({chrom, k, k + 1});
        } else {
            spans.back().end = k + 1;
        }
    }

    std::vector<bool> removed(m, false);
    for (const auto& span : spans) {
        for (const std::size_t start : window_starts(span.begin, span.end, config)) {
            const std::size_t stop = std::min(start + w, span.end);
            for (std::size_t a = start; a < stop; ++a) {
                for (std::size_t b = a + 1; b < stop && !removed[a]; ++b) {
                    if (removed[b] || r2(a, b) <= config.r2_threshold) {
                        continue;
                    }
                    // Drop the lower-MAF member; ties drop the larger index (b).
                    if (maf[a] < maf[b]) {
                        removed[a] = true;
                    } else {
                        removed[b] = true;
                    }
                }
            }
        }
    }
    std::vector<std::size_t> kept;
    for (std::size_t k = 0; k < m; ++k) {
        if (!removed[k]) {
            kept.push_back(snps[k]);
        }
    }
    return kept;
}

}  // namespace

std::vector<std::size_t> window_starts(std::size_t begin, std::size_t end, const LdPruneConfig& config) {
    std::vector<std::size_t> starts;
    if (begin >= end) {
        return starts;
    }
    for (std::size_t s = begin;; s += config.step_snps) {
        starts.push_back(s);
        if (s + config.window_snps >= end) {
            break;
        }
    }
    return starts;
}

double dosage_r2(const GenotypeMatrix& genotypes, std::size_t a, std::size_t b) {
    const auto ca = unit_column(genotypes, a);
    const auto cb = unit_column(genotypes, b);
    double r = 0.0;
    for (std::size_t i = 0; i < ca.size(); ++i) {
        r += ca[i] * cb[i];
    }
    return r * r;
}

std::vector<std::size_t> ld_prune(const Cohort& cohort, const LdPruneConfig& config) {
    if (config.window_snps < 2 || config.step_snps < 1 || !(config.r2_threshold >= 0.0 && config.r2_threshold <= 1.0)) {
        throw Error(ErrorCode::ConfigInvalid, "ld_prune needs window >= 2, step >= 1, r2 in [0, 1]");
    }
    std::vector<std::size_t> snps(cohort.n_snps());
    for (std::size_t j = 0; j < snps.size(); ++j) {
        snps[j] = j;
    }
    if (cohort.n_samples() < 2) {
        return snps;
    }
    while (true) {
        auto kept = prune_pass(cohort, snps, config);
        if (kept.size() == snps.size()) {
            return kept;
        }
        snps = std::move(kept);
    }
}

}  // namespace gwasdl
