#include "gwasdl/simulate/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gwasdl/assoc/normal.hpp"
#include "gwasdl/error.hpp"
#include "gwasdl/rng.hpp"

namespace gwasdl {

namespace {

double sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

std::vector<double> block_mafs(const SimSpec& spec, std::size_t block, std::size_t begin, std::size_t end,
                               Rng& rng) {
    (void)block;
    std::vector<double> mafs(end - begin);
    for (double& p : mafs) {
        p = rng.uniform(spec.maf_low, spec.maf_high);
    }
    return mafs;
}

// Standardised dosage columns for the requested SNPs (sample SD; constant -> 0).
std::vector<std::vector<double>> standardized_columns(const GenotypeMatrix& g,
                                                      std::span<const std::size_t> snps) {
    std::vector<std::vector<double>> out;
    out.reserve(snps.size());
    for (const std::size_t j : snps) {
        auto col = g.imputed_column(j);
        const double n = static_cast<double>(col.size());
        const double mean = std::accumulate(col.begin(), col.end(), 0.0) / n;
        double ss = 0.0;
        for (const double v : col) {
            ss += (v - mean) * (v - mean);
        }
        const double sd = col.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
        for (double& v : col) {
            v = sd > 1e-12 ? (v - mean) / sd : 0.0;
        }
        out.push_back(std::move(col));
    }
    return out;
}

std::vector<double> standardized_covariate(std::span<const double> values) {
    std::vector<double> out(values.begin(), values.end());
    const double n = static_cast<double>(out.size());
    const double mean = std::accumulate(out.begin(), out.end(), 0.0) / n;
    double ss = 0.0;
    for (const double v : out) {
        ss += (v - mean) * (v - mean);
    }
    const double sd = out.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    for (double& v : out) {
        v = sd > 1e-12 ? (v - mean) / sd : 0.0;
    }
    return out;
}

}  // namespace

void SimSpec::validate() const {
    if (!(maf_low > 0.0 && maf_low <= maf_high && maf_high <= 0.5)) {
        throw Error(ErrorCode::SpecInvalid, "maf range must satisfy 0 < low <= high <= 0.5");
    }
    if (ld_block_size < 1) {
        throw Error(ErrorCode::SpecInvalid, "ld_block_size must be >= 1");
    }
    if (!(ld_rho >= 0.0 && ld_rho < 1.0)) {
        throw Error(ErrorCode::SpecInvalid, "ld_rho must lie in [0, 1)");
    }
    if (n_chromosomes < 1 || n_chromosomes > 26) {
        throw Error(ErrorCode::SpecInvalid, "n_chromosomes must lie in 1..26");
    }
    if (n_snps > 0 && n_chromosomes > n_snps) {
        throw Error(ErrorCode::SpecInvalid, "more chromosomes than SNPs");
    }
}

bool CovariateEffects::any() const {
    return age != 0.0 || sex != 0.0 ||
           std::any_of(pcs.begin(), pcs.end(), [](double g) { return g != 0.0; });
}

void MultiDiseaseSpec::validate(std::size_t n_samples, std::size_t n_snps) const {
    if (diseases.empty()) {
        throw Error(ErrorCode::SpecInvalid, "no diseases specified");
    }
    if (!(shared_causal_fraction >= 0.0 && shared_causal_fraction <= 1.0)) {
        throw Error(ErrorCode::SpecInvalid, "shared_causal_fraction must lie in [0, 1]");
    }
    std::size_t max_causal = 0;
    std::size_t private_total = 0;
    for (const auto& d : diseases) {
        if (d.observed_count > n_samples) {
            throw Error(ErrorCode::SpecInvalid, "observed_count exceeds n_samples for " + d.name);
        }
        max_causal = std::max(max_causal, d.n_causal);
    }
    const auto shared = static_cast<std::size_t>(std::llround(shared_causal_fraction * static_cast<double>(max_causal)));
    for (const auto& d : diseases) {
        private_total += d.n_causal - std::min(d.n_causal, shared);
    }
    if (shared + private_total > n_snps) {
        throw Error(ErrorCode::SpecInvalid, "not enough SNPs for the requested causal sets");
    }
}

std::vector<double> simulated_mafs(const SimSpec& spec) {
    spec.validate();
    std::vector<double> mafs;
    mafs.reserve(spec.n_snps);
    for (std::size_t begin = 0, block = 0; begin < spec.n_snps; begin += spec.ld_block_size, ++block) {
        const std::size_t end = std::min(spec.n_snps, begin + spec.ld_block_size);
        Rng rng(derive_seed(spec.seed, block));
        const auto part = block_mafs(spec, block, begin, end, rng);
        mafs.insert(mafs.end(), part.begin(), part.end());
    }
    return mafs;
}

Cohort simulate_genotypes(const SimSpec& spec) {
    spec.validate();
    const std::size_t n = spec.n_samples;
    const std::size_t m = spec.n_snps;
    Cohort cohort;
    cohort.genotypes = GenotypeMatrix(n, m);
    cohort.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        cohort.samples[i].family_id = "F" + std::to_string(i + 1);
        cohort.samples[i].id = "S" + std::to_string(i + 1);
    }

    // Chromosomes take contiguous, near-equal shares of the SNPs.
    cohort.variants.resize(m);
    const std::size_t per_chrom = spec.n_chromosomes == 0 ? m : (m + spec.n_chromosomes - 1) / spec.n_chromosomes;
    for (std::size_t j = 0; j < m; ++j) {
        auto& v = cohort.variants[j];
        const std::size_t chrom = std::min(j / std::max<std::size_t>(per_chrom, 1), spec.n_chromosomes - 1);
        v.chromosome = static_cast<int>(chrom + 1);
        v.id = "rs" + std::to_string(j + 1);
        v.position_bp = 1000 * (j - chrom * per_chrom + 1);
        v.allele_a1 = "A";
        v.allele_a2 = "G";
    }

    const double innovation = std::sqrt(1.0 - spec.ld_rho * spec.ld_rho);
    std::vector<double> h1(n);
    std::vector<double> h2(n);
    for (std::size_t begin = 0, block = 0; begin < m; begin += spec.ld_block_size, ++block) {
        const std::size_t end = std::min(m, begin + spec.ld_block_size);
        Rng rng(derive_seed(spec.seed, block));
        const auto mafs = block_mafs(spec, block, begin, end, rng);
        for (std::size_t j = begin; j < end; ++j) {
            const double threshold = normal_quantile(mafs[j - begin]);
            auto col = cohort.genotypes.mutable_column(j);
            for (std::size_t i = 0; i < n; ++i) {
                if (j == begin) {
                    h1[i] = rng.normal();
                    h2[i] = rng.normal();
                } else {
                    h1[i] = spec.ld_rho * h1[i] + innovation * rng.normal();
                    h2[i] = spec.ld_rho * h2[i] + innovation * rng.normal();
                }
                col[i] = static_cast<double>(h1[i] < threshold) + static_cast<double>(h2[i] < threshold);
            }
        }
    }
    cohort.refresh_boundaries();
    return cohort;
}

std::vector<double> phenotype_risk(const Cohort& cohort, const PhenoSpec& spec) {
    const std::size_t n = cohort.n_samples();
    if (spec.causal_indices.size() != spec.effect_sizes.size()) {
        throw Error(ErrorCode::SpecInvalid, "causal_indices and effect_sizes differ in length");
    }
    if (!(spec.prevalence > 0.0 && spec.prevalence < 1.0)) {
        throw Error(ErrorCode::BisectionFailed, "prevalence must lie in (0, 1)");
    }
    for (const std::size_t j : spec.causal_indices) {
        if (j >= cohort.n_snps()) {
            throw Error(ErrorCode::SpecInvalid, "causal index out of range");
        }
    }
    std::vector<double> eta(n, 0.0);
    const auto z = standardized_columns(cohort.genotypes, spec.causal_indices);
    for (std::size_t c = 0; c < z.size(); ++c) {
        for (std::size_t i = 0; i < n; ++i) {
            eta[i] += spec.effect_sizes[c] * z[c][i];
        }
    }
    const auto& ce = spec.covariate_effects;
    if (ce.any()) {
        const auto& cov = cohort.covariates;
        if (!cov.present() || ce.pcs.size() > cov.n_pcs()) {
            throw Error(ErrorCode::SpecInvalid, "covariate effects need matching covariates");
        }
        auto add = [&](std::size_t column, double gamma) {
            if (gamma == 0.0) {
                return;
            }
            const auto s = standardized_covariate(cov.column(column));
            for (std::size_t i = 0; i < n; ++i) {
                eta[i] += gamma * s[i];
            }
        };
        add(0, ce.age);
        add(1, ce.sex);
        for (std::size_t k = 0; k < ce.pcs.size(); ++k) {
            add(2 + k, ce.pcs[k]);
        }
    }

    auto mean_risk = [&](double b0) {
        double s = 0.0;
        for (const double e : eta) {
            s += sigmoid(b0 + e);
        }
        return s / static_cast<double>(n);
    };
    double lo = -50.0;
    double hi = 50.0;
    double b0 = 0.0;
    bool found = false;
    for (int iter = 0; iter < 100; ++iter) {
        b0 = 0.5 * (lo + hi);
        const double m = mean_risk(b0);
        if (std::abs(m - spec.prevalence) <= 1e-3) {
            found = true;
            break;
        }
        (m < spec.prevalence ? lo : hi) = b0;
    }
    if (!found && n > 0) {
        throw Error(ErrorCode::BisectionFailed, "could not reach prevalence " + std::to_string(spec.prevalence));
    }
    std::vector<double> risk(n);
    for (std::size_t i = 0; i < n; ++i) {
        risk[i] = sigmoid(b0 + eta[i]);
    }
    return risk;
}

std::vector<std::int8_t> simulate_phenotype(const Cohort& cohort, const PhenoSpec& spec) {
    const auto risk = phenotype_risk(cohort, spec);
    Rng rng(derive_seed(spec.seed, "phenotype"));
    std::vector<std::int8_t> labels(risk.size());
    for (std::size_t i = 0; i < risk.size(); ++i) {
        labels[i] = rng.bernoulli(risk[i]) ? 1 : 0;
    }
    return labels;
}

std::vector<std::int8_t> simulate_null_phenotype(const Cohort& cohort, std::uint64_t seed) {
    Rng rng(derive_seed(seed, "null-phenotype"));
    std::vector<std::int8_t> labels(cohort.n_samples());
    for (auto& l : labels) {
        l = rng.bernoulli(0.5) ? 1 : 0;
    }
    return labels;
}

Cohort simulate_age_confound(const Cohort& cohort, const std::string& disease, double case_age_mean,
                             double control_age_mean, double age_sd, std::uint64_t seed, std::size_t n_pcs) {
    const std::size_t d = cohort.phenotypes.index_of(disease);
    Cohort out = cohort;
    if (!out.covariates.present()) {
        out.covariates = CovariateTable(out.n_samples(), n_pcs);
    }
    Rng rng(derive_seed(seed, "age-confound"));
    const double mid = 0.5 * (case_age_mean + control_age_mean);
    for (std::size_t i = 0; i < out.n_samples(); ++i) {
        const auto label = out.phenotypes.label(i, d);
        const double mean = label == 1 ? case_age_mean : (label == 0 ? control_age_mean : mid);
        out.covariates.age(i) = mean + age_sd * rng.normal();
        out.covariates.sex(i) = rng.bernoulli(0.5) ? 1.0 : 0.0;
    }
    return out;
}

MultiDiseaseResult simulate_multi_disease(const Cohort& cohort, const MultiDiseaseSpec& spec) {
    spec.validate(cohort.n_samples(), cohort.n_snps());
    MultiDiseaseResult result;
    result.cohort = cohort;
    result.cohort.phenotypes = PhenotypeTable({}, cohort.n_samples());

    std::size_t max_causal = 0;
    for (const auto& d : spec.diseases) {
        max_causal = std::max(max_causal, d.n_causal);
    }
    const auto n_shared =
        static_cast<std::size_t>(std::llround(spec.shared_causal_fraction * static_cast<double>(max_causal)));

    // One permutation of SNP indices: the shared pool comes first, then each
    // disease's private causal SNPs, so private sets never overlap.
    Rng rng(derive_seed(spec.seed, "causal-sets"));
    std::vector<std::size_t> order(cohort.n_snps());
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    result.shared_pool.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_shared));
    std::sort(result.shared_pool.begin(), result.shared_pool.end());
    std::size_t cursor = n_shared;

    for (std::size_t k = 0; k < spec.diseases.size(); ++k) {
        const auto& d = spec.diseases[k];
        PhenoSpec ps;
        ps.name = d.name;
        const std::size_t shared_here = std::min(d.n_causal, n_shared);
        ps.causal_indices.assign(result.shared_pool.begin(),
                                 result.shared_pool.begin() + static_cast<std::ptrdiff_t>(shared_here));
        for (std::size_t c = shared_here; c < d.n_causal; ++c) {
            ps.causal_indices.push_back(order[cursor++]);
        }
        std::sort(ps.causal_indices.begin(), ps.causal_indices.end());
        ps.effect_sizes.assign(ps.causal_indices.size(), d.effect_size);
        ps.covariate_effects = spec.covariate_effects;
        ps.prevalence = d.prevalence;
        ps.seed = derive_seed(spec.seed, 1000 + k);

        auto labels = simulate_phenotype(cohort, ps);
        const std::size_t observed = d.observed_count == 0 ? cohort.n_samples() : d.observed_count;
        Rng pick(derive_seed(spec.seed, 2000 + k));
        const auto kept = sample_without_replacement(pick, cohort.n_samples(), observed);
        std::vector<std::int8_t> masked(labels.size(), kMissingLabel);
        for (const std::size_t i : kept) {
            masked[i] = labels[i];
        }
        result.cohort.phenotypes.add_disease(d.name, std::move(masked));
        result.phenotypes.push_back(std::move(ps));
    }
    return result;
}

}  // namespace gwasdl
