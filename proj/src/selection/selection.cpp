#include "gwasdl/selection/selection.hpp"

#include <algorithm>
#include <cmath>

#include "gwasdl/assoc/irls.hpp"
#include "gwasdl/error.hpp"
#include "gwasdl/eval/auc.hpp"

namespace gwasdl {

std::string to_string(SelectionScope scope) {
    return scope == SelectionScope::PopulationLevel ? "PopulationLevel" : "TrainOnly";
}

SelectionScope parse_selection_scope(const std::string& name) {
    if (name == "PopulationLevel") {
        return SelectionScope::PopulationLevel;
    }
    if (name == "TrainOnly") {
        return SelectionScope::TrainOnly;
    }
    throw Error(ErrorCode::ConfigInvalid, "unknown selection scope '" + name + "'");
}

std::string to_string(LeakageModel model) {
    switch (model) {
        case LeakageModel::LogisticOnSelected: return "LogisticOnSelected";
        case LeakageModel::MlpStandard: return "MlpStandard";
        case LeakageModel::CnnStandard: return "CnnStandard";
    }
    return "Unknown";
}

LeakageModel parse_leakage_model(const std::string& name) {
    for (const auto m : {LeakageModel::LogisticOnSelected, LeakageModel::MlpStandard, LeakageModel::CnnStandard}) {
        if (to_string(m) == name) {
            return m;
        }
    }
    throw Error(ErrorCode::ConfigInvalid, "unknown leakage model '" + name + "'");
}

std::vector<std::size_t> passing_snps(const std::vector<VariantStats>& stats, double threshold) {
    std::vector<std::size_t> kept;
    for (const auto& s : stats) {
        if (s.converged && (threshold >= 1.0 || s.p_value < threshold)) {
            kept.push_back(s.snp_index);
        }
    }
    std::sort(kept.begin(), kept.end());
    return kept;
}

SelectionResult select_snps(const Cohort& cohort, const std::string& disease, double threshold,
                            SelectionScope scope, std::span<const std::size_t> train_indices, const ScanOptions& scan) {
    if (!(threshold > 0.0 && threshold <= 1.0)) {
        throw Error(ErrorCode::SpecInvalid, "selection threshold must lie in (0, 1]");
    }
    SelectionResult result;
    result.threshold = threshold;
    result.scope = scope;
    result.disease = disease;
    std::vector<VariantStats> stats;
    if (scope == SelectionScope::TrainOnly) {
        if (train_indices.empty()) {
            throw Error(ErrorCode::SpecInvalid, "TrainOnly selection needs training indices");
        }
        const Cohort train_view = cohort.select_samples(train_indices);
        result.source_sample_count = train_indices.size();
        stats = gwas_scan(train_view, disease, scan);
    } else {
        result.source_sample_count = labelled_rows(cohort, cohort.phenotypes.index_of(disease)).size();
        stats = gwas_scan(cohort, disease, scan);
    }
    result.snp_indices = passing_snps(stats, threshold);
    if (result.snp_indices.empty()) {
        throw Error(ErrorCode::EmptySelection, "no SNP has p < " + std::to_string(threshold));
    }
    return result;
}

nn::ModelConfig fit_conv_stack(nn::ModelConfig config, std::size_t n_snps) {
    auto fits = [&](const nn::ModelConfig& c) {
        std::size_t length = n_snps;
        for (std::size_t l = 0; l < c.conv_channels.size(); ++l) {
            if (length < c.kernel_size) {
                return false;
            }
            length = (length - c.kernel_size) / c.stride + 1;
        }
        return true;
    };
    while (!fits(config) && config.conv_channels.size() > 1) {
        config.conv_channels.pop_back();
    }
    if (!fits(config)) {
        config.kernel_size = std::max<std::size_t>(1, std::min(config.kernel_size, n_snps));
        config.stride = 1;
    }
    return config;
}

namespace {

// Mean-imputed dosages of `snps` for `rows`, scaled by the training rows' mean
// and SD so that the test rows never influence the transform.
Eigen::MatrixXd standardized_features(const Cohort& cohort, std::span<const std::size_t> snps,
                                      std::span<const std::size_t> rows, std::span<const std::size_t> train_rows) {
    Eigen::MatrixXd x(rows.size(), snps.size());
    for (std::size_t j = 0; j < snps.size(); ++j) {
        const auto train_col = cohort.genotypes.imputed_column(snps[j], train_rows);
        double mean = 0.0;
        for (const double v : train_col) {
            mean += v;
        }
        mean /= static_cast<double>(train_col.size());
        double ss = 0.0;
        for (const double v : train_col) {
            ss += (v - mean) * (v - mean);
        }
        const double sd = train_col.size() > 1 ? std::sqrt(ss / static_cast<double>(train_col.size() - 1)) : 0.0;
        for (std::size_t r = 0; r < rows.size(); ++r) {
            double v = cohort.genotypes.dosage(rows[r], snps[j]);
            if (is_missing(v)) {
                v = mean;
            }
            x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = sd > 0.0 ? (v - mean) / sd : 0.0;
        }
    }
    return x;
}

std::vector<std::size_t> labelled_subset(const Cohort& cohort, std::size_t disease, std::span<const std::size_t> rows) {
    std::vector<std::size_t> kept;
    for (const auto r : rows) {
        if (cohort.phenotypes.observed(r, disease)) {
            kept.push_back(r);
        }
    }
    return kept;
}

}  // namespace

double score_selection(const Cohort& cohort, std::size_t disease, std::span<const std::size_t> snps,
                       const Split& split, const LeakageOptions& options) {
    const auto train_rows = labelled_subset(cohort, disease, split.train);
    const auto test_rows = labelled_subset(cohort, disease, split.test);
    if (options.model == LeakageModel::LogisticOnSelected) {
        const Eigen::MatrixXd x_train = standardized_features(cohort, snps, train_rows, train_rows);
        const Eigen::MatrixXd x_test = standardized_features(cohort, snps, test_rows, train_rows);
        Eigen::VectorXd y(static_cast<Eigen::Index>(train_rows.size()));
        for (std::size_t r = 0; r < train_rows.size(); ++r) {
            y(static_cast<Eigen::Index>(r)) = cohort.phenotypes.label(train_rows[r], disease);
        }
        const Eigen::VectorXd coef = fit_ridge_logistic(x_train, y, options.ridge_lambda);
        const Eigen::VectorXd eta = (x_test * coef.tail(coef.size() - 1)).array() + coef(0);
        std::vector<double> scores(eta.data(), eta.data() + eta.size());
        std::vector<std::int8_t> labels;
        for (const auto r : test_rows) {
            labels.push_back(cohort.phenotypes.label(r, disease));
        }
        return eval::auc_roc(scores, labels);
    }

    // Network arms see only the selected SNPs and the one disease.
    Cohort view = cohort.select_snps(snps);
    PhenotypeTable single({cohort.phenotypes.disease_names()[disease]}, cohort.n_samples());
    for (std::size_t i = 0; i < cohort.n_samples(); ++i) {
        single.set_label(i, 0, cohort.phenotypes.label(i, disease));
    }
    view.phenotypes = std::move(single);
    nn::ModelConfig config = options.network;
    config.kind = options.model == LeakageModel::MlpStandard ? nn::ModelKind::MlpStandard : nn::ModelKind::CnnStandard;
    config.n_labels = 1;
    config.label_names.clear();
    config.chromosome_boundaries.clear();
    config.use_covariates = false;
    config.n_covariates = 0;
    if (config.kind == nn::ModelKind::CnnStandard) {
        config = fit_conv_stack(config, snps.size());
    }
    const auto outcome = nn::fit_and_score(view, config, options.training, train_rows, test_rows);
    return std::isnan(outcome.test_auc[0]) ? 0.5 : outcome.test_auc[0];
}

Split leakage_split(const Cohort& cohort, std::size_t disease, const LeakageOptions& options) {
    return split_rows(labelled_rows(cohort, disease), &cohort.phenotypes, static_cast<int>(disease),
                      options.split.train_fraction, options.split.seed);
}

std::vector<VariantStats> train_only_scan(const Cohort& cohort, const std::string& disease,
                                          std::span<const std::size_t> train_rows, const ScanOptions& scan) {
    const Cohort train_view = cohort.select_samples(train_rows);
    return gwas_scan(train_view, disease, scan);
}

LeakageReport leakage_from_scans(const Cohort& cohort, const std::string& disease, const Split& split,
                                 const std::vector<VariantStats>& population,
                                 const std::vector<VariantStats>& train_only, const LeakageOptions& options) {
    if (!(options.threshold > 0.0 && options.threshold <= 1.0)) {
        throw Error(ErrorCode::SpecInvalid, "selection threshold must lie in (0, 1]");
    }
    const std::size_t d = cohort.phenotypes.index_of(disease);
    LeakageReport report;
    report.threshold = options.threshold;
    report.seed = options.split.seed;
    report.model_kind = options.model;
    report.disease = disease;
    report.split = split;

    auto run_arm = [&](const std::vector<VariantStats>& stats, double& auc, std::size_t& n_selected, bool& empty) {
        const auto snps = passing_snps(stats, options.threshold);
        n_selected = snps.size();
        if (snps.empty()) {
            empty = true;
            auc = 0.5;
            return;
        }
        auc = score_selection(cohort, d, snps, split, options);
    };
    run_arm(population, report.auc_leaky, report.n_selected_leaky, report.leaky_empty);
    run_arm(train_only, report.auc_clean, report.n_selected_clean, report.clean_empty);
    return report;
}

LeakageReport leakage_experiment(const Cohort& cohort, const std::string& disease, const LeakageOptions& options) {
    const std::size_t d = cohort.phenotypes.index_of(disease);
    const Split split = leakage_split(cohort, d, options);
    ScanOptions scan = options.scan;
    scan.use_covariates = options.covariates_in_selection;
    const auto population = gwas_scan(cohort, disease, scan);
    const auto train_only = train_only_scan(cohort, disease, split.train, scan);
    return leakage_from_scans(cohort, disease, split, population, train_only, options);
}

}  // namespace gwasdl
