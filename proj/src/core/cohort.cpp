#include "gwasdl/core/cohort.hpp"

#include <algorithm>

#include "gwasdl/error.hpp"

namespace gwasdl {

GenotypeMatrix::GenotypeMatrix(std::size_t n_samples, std::size_t n_snps, GenotypeEncoding encoding)
    : n_samples_(n_samples), n_snps_(n_snps), encoding_(encoding) {
    values_.assign(n_samples * n_snps * channels(), 0.0);
}

double GenotypeMatrix::dosage(std::size_t sample, std::size_t snp) const {
    const std::size_t cell = snp * n_samples_ + sample;
    if (encoding_ == GenotypeEncoding::Dosage) {
        return values_[cell];
    }
    const double* p = &values_[cell * 3];
    if (is_missing(p[0])) {
        return kMissingDosage;
    }
    return p[1] + 2.0 * p[2];
}

void GenotypeMatrix::set_dosage(std::size_t sample, std::size_t snp, double value) {
    if (encoding_ != GenotypeEncoding::Dosage) {
        throw Error(ErrorCode::ConfigInvalid, "set_dosage on a Prob3 matrix");
    }
    values_[snp * n_samples_ + sample] = value;
}

std::array<double, 3> GenotypeMatrix::probabilities(std::size_t sample, std::size_t snp) const {
    const std::size_t cell = snp * n_samples_ + sample;
    if (encoding_ == GenotypeEncoding::Prob3) {
        return {values_[cell * 3], values_[cell * 3 + 1], values_[cell * 3 + 2]};
    }
    const double d = values_[cell];
    if (is_missing(d)) {
        return {kMissingDosage, kMissingDosage, kMissingDosage};
    }
    // Fractional dosages are spread over the two neighbouring counts.
    std::array<double, 3> p{0.0, 0.0, 0.0};
    const double lo = std::floor(d);
    const auto k = static_cast<std::size_t>(std::min(lo, 1.0));
    const double frac = d - static_cast<double>(k);
    p[k] = 1.0 - frac;
    if (frac > 0.0) {
        p[k + 1] = frac;
    }
    return p;
}

void GenotypeMatrix::set_probabilities(std::size_t sample, std::size_t snp,
                                       const std::array<double, 3>& p) {
    if (encoding_ != GenotypeEncoding::Prob3) {
        throw Error(ErrorCode::ConfigInvalid, "set_probabilities on a Dosage matrix");
    }
    const std::size_t cell = (snp * n_samples_ + sample) * 3;
    values_[cell] = p[0];
    values_[cell + 1] = p[1];
    values_[cell + 2] = p[2];
}

std::span<const double> GenotypeMatrix::column(std::size_t snp) const {
    if (encoding_ != GenotypeEncoding::Dosage) {
        throw Error(ErrorCode::ConfigInvalid, "column() requires Dosage encoding");
    }
    return {values_.data() + snp * n_samples_, n_samples_};
}

std::span<double> GenotypeMatrix::mutable_column(std::size_t snp) {
    if (encoding_ != GenotypeEncoding::Dosage) {
        throw Error(ErrorCode::ConfigInvalid, "mutable_column() requires Dosage encoding");
    }
    return {values_.data() + snp * n_samples_, n_samples_};
}

double GenotypeMatrix::mean_dosage(std::size_t snp) const {
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < n_samples_; ++i) {
        const double d = dosage(i, snp);
        if (!is_missing(d)) {
            sum += d;
            ++count;
        }
    }
    return count == 0 ? 0.0 : sum / static_cast<double>(count);
}

std::vector<double> GenotypeMatrix::imputed_column(std::size_t snp) const {
    std::vector<double> out(n_samples_);
    const double mean = mean_dosage(snp);
    for (std::size_t i = 0; i < n_samples_; ++i) {
        const double d = dosage(i, snp);
        out[i] = is_missing(d) ? mean : d;
    }
    return out;
}

std::vector<double> GenotypeMatrix::imputed_column(std::size_t snp,
                                                   std::span<const std::size_t> rows) const {
    std::vector<double> out(rows.size());
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        out[r] = dosage(rows[r], snp);
        if (!is_missing(out[r])) {
            sum += out[r];
            ++count;
        }
    }
    const double mean = count == 0 ? 0.0 : sum / static_cast<double>(count);
    for (double& v : out) {
        if (is_missing(v)) {
            v = mean;
        }
    }
    return out;
}

GenotypeMatrix GenotypeMatrix::select_samples(std::span<const std::size_t> rows) const {
    GenotypeMatrix out(rows.size(), n_snps_, encoding_);
    const std::size_t c = channels();
    for (std::size_t j = 0; j < n_snps_; ++j) {
        for (std::size_t r = 0; r < rows.size(); ++r) {
            for (std::size_t k = 0; k < c; ++k) {
                out.values_[(j * rows.size() + r) * c + k] = values_[(j * n_samples_ + rows[r]) * c + k];
            }
        }
    }
    return out;
}

GenotypeMatrix GenotypeMatrix::select_snps(std::span<const std::size_t> snps) const {
    GenotypeMatrix out(n_samples_, snps.size(), encoding_);
    const std::size_t stride = n_samples_ * channels();
    for (std::size_t j = 0; j < snps.size(); ++j) {
        std::copy_n(values_.begin() + static_cast<std::ptrdiff_t>(snps[j] * stride), stride,
                    out.values_.begin() + static_cast<std::ptrdiff_t>(j * stride));
    }
    return out;
}

GenotypeMatrix GenotypeMatrix::to_dosage() const {
    if (encoding_ == GenotypeEncoding::Dosage) {
        return *this;
    }
    GenotypeMatrix out(n_samples_, n_snps_, GenotypeEncoding::Dosage);
    for (std::size_t j = 0; j < n_snps_; ++j) {
        for (std::size_t i = 0; i < n_samples_; ++i) {
            out.values_[j * n_samples_ + i] = dosage(i, j);
        }
    }
    return out;
}

PhenotypeTable::PhenotypeTable(std::vector<std::string> disease_names, std::size_t n_samples)
    : names_(std::move(disease_names)), n_samples_(n_samples) {
    labels_.assign(names_.size(), std::vector<std::int8_t>(n_samples, kMissingLabel));
}

std::optional<std::size_t> PhenotypeTable::find(const std::string& disease) const {
    const auto it = std::find(names_.begin(), names_.end(), disease);
    if (it == names_.end()) {
        return std::nullopt;
    }
    return static_cast<std::size_t>(it - names_.begin());
}

std::size_t PhenotypeTable::index_of(const std::string& disease) const {
    const auto idx = find(disease);
    if (!idx) {
        throw Error(ErrorCode::ConfigInvalid, "unknown disease '" + disease + "'");
    }
    return *idx;
}

void PhenotypeTable::set_label(std::size_t sample, std::size_t disease, std::int8_t value) {
    labels_[disease][sample] = value;
}

std::size_t PhenotypeTable::case_count(std::size_t disease) const {
    return static_cast<std::size_t>(std::count(labels_[disease].begin(), labels_[disease].end(), 1));
}

std::size_t PhenotypeTable::control_count(std::size_t disease) const {
    return static_cast<std::size_t>(std::count(labels_[disease].begin(), labels_[disease].end(), 0));
}

bool PhenotypeTable::usable(std::size_t disease) const {
    return case_count(disease) >= 1 && control_count(disease) >= 1;
}

void PhenotypeTable::add_disease(std::string name, std::vector<std::int8_t> labels) {
    if (names_.empty() && labels_.empty()) {
        n_samples_ = labels.size();
    }
    if (labels.size() != n_samples_) {
        throw Error(ErrorCode::ShapeMismatch, "label column length differs from sample count");
    }
    if (find(name)) {
        throw Error(ErrorCode::ConfigInvalid, "duplicate disease '" + name + "'");
    }
    names_.push_back(std::move(name));
    labels_.push_back(std::move(labels));
}

PhenotypeTable PhenotypeTable::select_samples(std::span<const std::size_t> rows) const {
    PhenotypeTable out(names_, rows.size());
    for (std::size_t d = 0; d < names_.size(); ++d) {
        for (std::size_t r = 0; r < rows.size(); ++r) {
            out.labels_[d][r] = labels_[d][rows[r]];
        }
    }
    return out;
}

CovariateTable::CovariateTable(std::size_t n_samples, std::size_t n_pcs)
    : n_samples_(n_samples), n_pcs_(n_pcs), present_(true) {
    columns_.assign(2 + n_pcs, std::vector<double>(n_samples, 0.0));
    constant_.assign(2 + n_pcs, false);
}

std::string CovariateTable::column_name(std::size_t c) {
    if (c == 0) {
        return "age";
    }
    if (c == 1) {
        return "sex";
    }
    return "pc" + std::to_string(c - 1);
}

CovariateTable CovariateTable::select_samples(std::span<const std::size_t> rows) const {
    if (!present_) {
        return {};
    }
    CovariateTable out(rows.size(), n_pcs_);
    for (std::size_t c = 0; c < columns_.size(); ++c) {
        for (std::size_t r = 0; r < rows.size(); ++r) {
            out.columns_[c][r] = columns_[c][rows[r]];
        }
    }
    out.constant_ = constant_;
    return out;
}

std::vector<ChromosomeSpan> chromosome_spans(std::span<const Variant> variants) {
    std::vector<ChromosomeSpan> spans;
    for (std::size_t j = 0; j < variants.size(); ++j) {
        if (spans.empty() || spans.back().chromosome != variants[j].chromosome) {
            spans.push_back({variants[j].chromosome, j, j + 1});
        } else {
            spans.back().end = j + 1;
        }
    }
    return spans;
}

Cohort Cohort::select_samples(std::span<const std::size_t> rows) const {
    Cohort out;
    out.variants = variants;
    out.samples.reserve(rows.size());
    for (const std::size_t r : rows) {
        out.samples.push_back(samples.at(r));
    }
    out.genotypes = genotypes.select_samples(rows);
    if (phenotypes.n_diseases() > 0) {
        out.phenotypes = phenotypes.select_samples(rows);
    }
    out.covariates = covariates.select_samples(rows);
    out.chromosome_boundaries = chromosome_boundaries;
    return out;
}

Cohort Cohort::select_snps(std::span<const std::size_t> snps) const {
    Cohort out;
    out.variants.reserve(snps.size());
    for (const std::size_t j : snps) {
        out.variants.push_back(variants.at(j));
    }
    out.samples = samples;
    out.genotypes = genotypes.select_snps(snps);
    out.phenotypes = phenotypes;
    out.covariates = covariates;
    out.refresh_boundaries();
    return out;
}

void Cohort::refresh_boundaries() { chromosome_boundaries = chromosome_spans(variants); }

void Cohort::validate() const {
    if (genotypes.n_samples() != samples.size() || genotypes.n_snps() != variants.size()) {
        throw Error(ErrorCode::SpecInvalid, "genotype dimensions do not match sample/variant lists");
    }
    if (phenotypes.n_diseases() > 0 && phenotypes.n_samples() != samples.size()) {
        throw Error(ErrorCode::SpecInvalid, "phenotype rows do not match sample count");
    }
    if (covariates.present() && covariates.n_samples() != samples.size()) {
        throw Error(ErrorCode::SpecInvalid, "covariate rows do not match sample count");
    }
    std::size_t next = 0;
    for (const auto& span : chromosome_boundaries) {
        if (span.begin != next || span.end <= span.begin) {
            throw Error(ErrorCode::SpecInvalid, "chromosome boundaries do not partition the SNPs");
        }
        next = span.end;
    }
    if (next != variants.size()) {
        throw Error(ErrorCode::SpecInvalid, "chromosome boundaries do not cover every SNP");
    }
}

}  // namespace gwasdl
