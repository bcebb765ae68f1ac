#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace gwasdl {

inline constexpr double kMissingDosage = std::numeric_limits<double>::quiet_NaN();
inline constexpr std::int8_t kMissingLabel = -1;

inline bool is_missing(double value) { return std::isnan(value); }

struct Variant {
    std::string id;
    int chromosome = 1;
    std::uint64_t position_bp = 0;
    std::string allele_a1;
    std::string allele_a2;
    double cm = 0.0;
};

// One .fam record.
struct Sample {
    std::string family_id;
    std::string id;
    std::string father_id = "0";
    std::string mother_id = "0";
    int sex_code = 0;
    std::string phenotype = "-9";
};

enum class GenotypeEncoding { Dosage, Prob3 };

/// Dense genotype store, SNP-major: all samples of SNP 0, then SNP 1, ...
/// Dosage holds one value per cell (A1 allele count in [0,2] or NaN);
/// Prob3 holds P(count = 0), P(count = 1), P(count = 2) per cell.
class GenotypeMatrix {
public:
    GenotypeMatrix() = default;
    GenotypeMatrix(std::size_t n_samples, std::size_t n_snps,
                   GenotypeEncoding encoding = GenotypeEncoding::Dosage);

    std::size_t n_samples() const { return n_samples_; }
    std::size_t n_snps() const { return n_snps_; }
    GenotypeEncoding encoding() const { return encoding_; }
    std::size_t channels() const { return encoding_ == GenotypeEncoding::Dosage ? 1 : 3; }

    /// Expected dosage; NaN when missing.
    double dosage(std::size_t sample, std::size_t snp) const;
    void set_dosage(std::size_t sample, std::size_t snp, double value);

    /// Probability triple for Prob3 matrices; dosage matrices yield a one-hot
    /// triple for integral values.
    std::array<double, 3> probabilities(std::size_t sample, std::size_t snp) const;
    void set_probabilities(std::size_t sample, std::size_t snp, const std::array<double, 3>& p);

    /// Contiguous per-SNP dosage column (Dosage encoding only).
    std::span<const double> column(std::size_t snp) const;
    std::span<double> mutable_column(std::size_t snp);

    /// Mean non-missing dosage of a SNP; 0 when every call is missing.
    double mean_dosage(std::size_t snp) const;
    /// Dosage column with missing entries replaced by the SNP mean.
    std::vector<double> imputed_column(std::size_t snp) const;
    /// Same, restricted to the given rows and imputed with the mean over them.
    std::vector<double> imputed_column(std::size_t snp, std::span<const std::size_t> rows) const;

    GenotypeMatrix select_samples(std::span<const std::size_t> rows) const;
    GenotypeMatrix select_snps(std::span<const std::size_t> snps) const;

    /// Collapse Prob3 to expected dosage.
    GenotypeMatrix to_dosage() const;

    const std::vector<double>& raw() const { return values_; }

private:
    std::size_t n_samples_ = 0;
    std::size_t n_snps_ = 0;
    GenotypeEncoding encoding_ = GenotypeEncoding::Dosage;
    std::vector<double> values_;
};

/// Labels per disease, stored disease-major; values 0, 1 or kMissingLabel.
class PhenotypeTable {
public:
    PhenotypeTable() = default;
    PhenotypeTable(std::vector<std::string> disease_names, std::size_t n_samples);

    std::size_t n_diseases() const { return names_.size(); }
    std::size_t n_samples() const { return n_samples_; }
    const std::vector<std::string>& disease_names() const { return names_; }
    std::optional<std::size_t> find(const std::string& disease) const;
    /// Index of a disease; throws ConfigInvalid when unknown.
    std::size_t index_of(const std::string& disease) const;

    std::int8_t label(std::size_t sample, std::size_t disease) const {
        return labels_[disease][sample];
    }
    void set_label(std::size_t sample, std::size_t disease, std::int8_t value);
    bool observed(std::size_t sample, std::size_t disease) const {
        return labels_[disease][sample] != kMissingLabel;
    }
    std::span<const std::int8_t> column(std::size_t disease) const { return labels_[disease]; }

    std::size_t case_count(std::size_t disease) const;
    std::size_t control_count(std::size_t disease) const;
    /// At least one case and one control.
    bool usable(std::size_t disease) const;

    void add_disease(std::string name, std::vector<std::int8_t> labels);
    PhenotypeTable select_samples(std::span<const std::size_t> rows) const;

private:
    std::vector<std::string> names_;
    std::size_t n_samples_ = 0;
    std::vector<std::vector<std::int8_t>> labels_;
};

/// Column order everywhere: age, sex, pc1..pcK.
class CovariateTable {
public:
    CovariateTable() = default;
    CovariateTable(std::size_t n_samples, std::size_t n_pcs);

    std::size_t n_samples() const { return n_samples_; }
    std::size_t n_pcs() const { return n_pcs_; }
    std::size_t n_columns() const { return present_ ? 2 + n_pcs_ : 0; }
    bool present() const { return present_; }

    double& age(std::size_t i) { return columns_[0][i]; }
    double age(std::size_t i) const { return columns_[0][i]; }
    double& sex(std::size_t i) { return columns_[1][i]; }
    double sex(std::size_t i) const { return columns_[1][i]; }
    double& pc(std::size_t i, std::size_t k) { return columns_[2 + k][i]; }
    double pc(std::size_t i, std::size_t k) const { return columns_[2 + k][i]; }

    double value(std::size_t sample, std::size_t column) const { return columns_[column][sample]; }
    std::span<const double> column(std::size_t c) const { return columns_[c]; }
    std::span<double> mutable_column(std::size_t c) { return columns_[c]; }
    static std::string column_name(std::size_t c);

    /// Set by standardization for columns with zero variance.
    const std::vector<bool>& constant_columns() const { return constant_; }
    void set_constant_columns(std::vector<bool> flags) { constant_ = std::move(flags); }

    CovariateTable select_samples(std::span<const std::size_t> rows) const;

private:
    std::size_t n_samples_ = 0;
    std::size_t n_pcs_ = 0;
    bool present_ = false;
    std::vector<std::vector<double>> columns_;
    std::vector<bool> constant_;
};

struct ChromosomeSpan {
    int chromosome = 0;
    std::size_t begin = 0;
    std::size_t end = 0;

    std::size_t size() const { return end - begin; }
    bool operator==(const ChromosomeSpan&) const = default;
};

/// Contiguous runs of equal chromosome; assumes sorted variants.
std::vector<ChromosomeSpan> chromosome_spans(std::span<const Variant> variants);

struct Cohort {
    std::vector<Variant> variants;
    std::vector<Sample> samples;
    GenotypeMatrix genotypes;
    PhenotypeTable phenotypes;
    CovariateTable covariates;
    std::vector<ChromosomeSpan> chromosome_boundaries;

    std::size_t n_samples() const { return samples.size(); }
    std::size_t n_snps() const { return variants.size(); }

    /// Copy restricted to the listed rows (in the given order). Downstream code
    /// that must not see other rows receives one of these, never the parent.
    Cohort select_samples(std::span<const std::size_t> rows) const;
    /// Copy restricted to the listed SNP indices (ascending).
    Cohort select_snps(std::span<const std::size_t> snps) const;

    void refresh_boundaries();
    /// Throws SpecInvalid when component sizes disagree.
    void validate() const;
};

}  // namespace gwasdl
