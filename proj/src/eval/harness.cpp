#include "gwasdl/eval/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "gwasdl/assoc/gwas.hpp"
#include "gwasdl/core/split.hpp"
#include "gwasdl/error.hpp"
#include "gwasdl/nn/config_json.hpp"

namespace gwasdl::eval {

namespace {

class Stopwatch {
public:
    explicit Stopwatch(bool enabled) : enabled_(enabled), start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        if (!enabled_) {
            return 0.0;
        }
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    bool enabled_;
    std::chrono::steady_clock::time_point start_;
};

std::vector<std::size_t> target_diseases(const Cohort& cohort, const std::vector<std::string>& names) {
    std::vector<std::size_t> out;
    if (names.empty()) {
        for (std::size_t d = 0; d < cohort.phenotypes.n_diseases(); ++d) {
            if (cohort.phenotypes.usable(d)) {
                out.push_back(d);
            }
        }
    } else {
        for (const auto& name : names) {
            out.push_back(cohort.phenotypes.index_of(name));
        }
    }
    if (out.empty()) {
        throw Error(ErrorCode::NoLabeledSamples, "no disease has both cases and controls");
    }
    return out;
}

std::vector<std::size_t> observed_rows(const Cohort& cohort, std::size_t disease, std::span<const std::size_t> rows) {
    std::vector<std::size_t> out;
    for (const auto r : rows) {
        if (cohort.phenotypes.observed(r, disease)) {
            out.push_back(r);
        }
    }
    return out;
}

// Shrinks the conv stack to the shortest branch the architecture will see.
nn::ModelConfig fit_to_cohort(nn::ModelConfig config, const Cohort& cohort) {
    if (!nn::is_cnn_kind(config.kind)) {
        return config;
    }
    std::size_t shortest = cohort.n_snps();
    if (nn::is_chromosome_kind(config.kind)) {
        for (const auto& span : config.chromosome_boundaries) {
            shortest = std::min(shortest, span.size());
        }
    }
    return fit_conv_stack(std::move(config), shortest);
}

nn::ModelConfig single_label_config(nn::ModelConfig config, nn::ModelKind kind, const Cohort& cohort, bool covariates) {
    config.kind = kind;
    config.n_labels = 1;
    config.label_names.clear();
    config.chromosome_boundaries = nn::is_chromosome_kind(kind) ? cohort.chromosome_boundaries
                                                                : std::vector<ChromosomeSpan>{};
    config.use_covariates = covariates;
    config.n_covariates = covariates ? cohort.covariates.n_columns() : 0;
    return fit_to_cohort(std::move(config), cohort);
}

double finite_or_half(double auc) { return std::isnan(auc) ? 0.5 : auc; }

}  // namespace

Cohort with_diseases(const Cohort& cohort, const std::vector<std::size_t>& diseases) {
    Cohort view = cohort;
    std::vector<std::string> names;
    for (const auto d : diseases) {
        names.push_back(cohort.phenotypes.disease_names()[d]);
    }
    PhenotypeTable table(names, cohort.n_samples());
    for (std::size_t k = 0; k < diseases.size(); ++k) {
        for (std::size_t i = 0; i < cohort.n_samples(); ++i) {
            table.set_label(i, k, cohort.phenotypes.label(i, diseases[k]));
        }
    }
    view.phenotypes = std::move(table);
    return view;
}

Split multilabel_split(const Cohort& cohort, const std::vector<std::size_t>& diseases, double train_fraction,
                       std::uint64_t seed) {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < cohort.n_samples(); ++i) {
        for (const auto d : diseases) {
            if (cohort.phenotypes.observed(i, d)) {
                rows.push_back(i);
                break;
            }
        }
    }
    std::size_t smallest = diseases.front();
    std::size_t fewest = std::numeric_limits<std::size_t>::max();
    for (const auto d : diseases) {
        const std::size_t observed = cohort.phenotypes.case_count(d) + cohort.phenotypes.control_count(d);
        if (observed < fewest) {
            fewest = observed;
            smallest = d;
        }
    }
    return split_rows(rows, &cohort.phenotypes, static_cast<int>(smallest), train_fraction, seed);
}

ExperimentReport run_baseline(const Cohort& cohort, const BaselineOptions& options) {
    ExperimentReport report;
    report.setting = Setting::Baseline;
    const auto diseases = target_diseases(cohort, options.diseases);
    const Cohort standardized = options.covariate_arm ? standardize_covariates(cohort) : cohort;
    if (options.covariate_arm && !cohort.covariates.present()) {
        throw Error(ErrorCode::ConfigInvalid, "covariate arm requested but the cohort has no covariates");
    }
    for (const auto d : diseases) {
        const Cohort view = with_diseases(standardized, {d});
        const auto rows = labelled_rows(cohort, d);
        for (const bool covariates : {false, true}) {
            if (covariates && !options.covariate_arm) {
                continue;
            }
            for (const auto kind : options.architectures) {
                for (const auto seed : options.seeds) {
                    const Stopwatch watch(options.record_timing);
                    const Split split = split_rows(rows, &cohort.phenotypes, static_cast<int>(d),
                                                   options.train_fraction, seed);
                    nn::TrainConfig training = options.training;
                    training.seed = seed;
                    const auto config = single_label_config(options.network, kind, view, covariates);
                    const auto outcome = nn::fit_and_score(view, config, training, split.train, split.test);
                    ReportRow row;
                    row.disease = cohort.phenotypes.disease_names()[d];
                    row.architecture = nn::to_string(kind);
                    row.covariates = covariates;
                    row.threshold = std::numeric_limits<double>::quiet_NaN();
                    row.auc = finite_or_half(outcome.test_auc[0]);
                    row.seed = seed;
                    row.n_train = split.train.size();  // includes the validation rows
                    row.n_test = outcome.n_test;
                    row.n_selected = cohort.n_snps();
                    row.wall_time_s = watch.seconds();
                    report.rows.push_back(row);
                }
            }
        }
    }
    nlohmann::json archs = nlohmann::json::array();
    for (const auto kind : options.architectures) {
        archs.push_back(nn::to_string(kind));
    }
    report.config = {{"architectures", archs},
                     {"covariate_arm", options.covariate_arm},
                     {"seeds", options.seeds},
                     {"train_fraction", options.train_fraction},
                     {"model", nn::to_json(options.network)},
                     {"train", nn::to_json(options.training)}};
    return report;
}

ExperimentReport run_selection_experiment(const Cohort& cohort, const SelectionOptions& options) {
    ExperimentReport report;
    report.setting = Setting::Selection;
    const auto diseases = target_diseases(cohort, options.diseases);
    ScanOptions scan = options.leakage.scan;
    scan.use_covariates = options.leakage.covariates_in_selection;
    const bool want_leaky = std::find(options.scopes.begin(), options.scopes.end(), SelectionScope::PopulationLevel) !=
                            options.scopes.end();
    const bool want_clean =
        std::find(options.scopes.begin(), options.scopes.end(), SelectionScope::TrainOnly) != options.scopes.end();
    for (const auto d : diseases) {
        const std::string& name = cohort.phenotypes.disease_names()[d];
        // The population scan does not depend on the split.
        const auto population = gwas_scan(cohort, name, scan);
        for (const auto seed : options.seeds) {
            LeakageOptions leakage = options.leakage;
            leakage.split.seed = seed;
            leakage.training.seed = seed;
            const Split split = leakage_split(cohort, d, leakage);
            const auto train_only = train_only_scan(cohort, name, split.train, scan);
            for (const double threshold : options.thresholds) {
                const Stopwatch watch(options.record_timing);
                leakage.threshold = threshold;
                // Arms not requested are skipped by handing them an empty scan.
                const auto result = leakage_from_scans(cohort, name, split, want_leaky ? population : std::vector<VariantStats>{},
                                                       want_clean ? train_only : std::vector<VariantStats>{}, leakage);
                const double elapsed = watch.seconds();
                auto add_row = [&](SelectionScope scope, double auc, std::size_t n_selected, bool empty) {
                    ReportRow row;
                    row.disease = name;
                    row.architecture = to_string(leakage.model);
                    row.covariates = leakage.covariates_in_selection;
                    row.scope = to_string(scope);
                    row.threshold = threshold;
                    row.auc = auc;
                    row.seed = seed;
                    row.n_train = split.train.size();
                    row.n_test = split.test.size();
                    row.n_selected = n_selected;
                    row.empty_selection = empty;
                    row.wall_time_s = elapsed;
                    report.rows.push_back(row);
                };
                if (want_leaky) {
                    add_row(SelectionScope::PopulationLevel, result.auc_leaky, result.n_selected_leaky,
                            result.leaky_empty);
                }
                if (want_clean) {
                    add_row(SelectionScope::TrainOnly, result.auc_clean, result.n_selected_clean, result.clean_empty);
                }
            }
        }
    }
    nlohmann::json scopes = nlohmann::json::array();
    for (const auto s : options.scopes) {
        scopes.push_back(to_string(s));
    }
    report.config = {{"thresholds", options.thresholds},
                     {"scopes", scopes},
                     {"seeds", options.seeds},
                     {"model", to_string(options.leakage.model)},
                     {"ridge_lambda", options.leakage.ridge_lambda},
                     {"covariates_in_selection", options.leakage.covariates_in_selection},
                     {"train_fraction", options.leakage.split.train_fraction}};
    if (options.leakage.model != LeakageModel::LogisticOnSelected) {
        report.config["network"] = nn::to_json(options.leakage.network);
        report.config["train"] = nn::to_json(options.leakage.training);
    }
    return report;
}

ExperimentReport run_multilabel(const Cohort& cohort, const MultiLabelOptions& options) {
    ExperimentReport report;
    report.setting = Setting::MultiLabel;
    const auto diseases = target_diseases(cohort, {});
    if (options.covariate_arm && !cohort.covariates.present()) {
        throw Error(ErrorCode::ConfigInvalid, "covariate arm requested but the cohort has no covariates");
    }
    const Cohort standardized = options.covariate_arm ? standardize_covariates(cohort) : cohort;
    const Cohort view = with_diseases(standardized, diseases);
    std::vector<std::size_t> all(diseases.size());
    for (std::size_t k = 0; k < all.size(); ++k) {
        all[k] = k;
    }
    for (const auto seed : options.seeds) {
        const Split split = multilabel_split(view, all, options.train_fraction, seed);
        nn::TrainConfig training = options.training;
        training.seed = seed;
        for (const bool covariates : {false, true}) {
            if (covariates && !options.covariate_arm) {
                continue;
            }
            const Stopwatch watch(options.record_timing);
            nn::ModelConfig config = options.network;
            config.chromosome_boundaries.clear();
            config.label_names.clear();
            config.use_covariates = covariates;
            config.n_covariates = covariates ? view.covariates.n_columns() : 0;
            // A single usable disease reduces to ordinary single-label training.
            config.kind = all.size() >= 2 ? nn::ModelKind::MultiLabelCnn : nn::ModelKind::CnnStandard;
            config.n_labels = all.size();
            config = fit_to_cohort(std::move(config), view);
            const auto outcome = nn::fit_and_score(view, config, training, split.train, split.test);
            const double elapsed = watch.seconds();
            for (std::size_t k = 0; k < all.size(); ++k) {
                ReportRow row;
                row.disease = view.phenotypes.disease_names()[k];
                row.architecture = nn::to_string(config.kind);
                row.covariates = covariates;
                row.threshold = std::numeric_limits<double>::quiet_NaN();
                row.auc = finite_or_half(outcome.test_auc[k]);
                row.seed = seed;
                row.n_train = observed_rows(view, k, split.train).size();
                row.n_test = observed_rows(view, k, split.test).size();
                row.n_selected = cohort.n_snps();
                row.wall_time_s = elapsed;
                report.rows.push_back(row);
            }
            if (!options.single_disease_baselines) {
                continue;
            }
            for (std::size_t k = 0; k < all.size(); ++k) {
                const auto& name = view.phenotypes.disease_names()[k];
                if (!options.baseline_diseases.empty() &&
                    std::find(options.baseline_diseases.begin(), options.baseline_diseases.end(), name) ==
                        options.baseline_diseases.end()) {
                    continue;
                }
                const Stopwatch single_watch(options.record_timing);
                const Cohort single = with_diseases(view, {k});
                const auto train_rows = observed_rows(view, k, split.train);
                const auto test_rows = observed_rows(view, k, split.test);
                const auto single_config =
                    single_label_config(options.network, nn::ModelKind::CnnStandard, single, covariates);
                const auto base = nn::fit_and_score(single, single_config, training, train_rows, test_rows);
                ReportRow row;
                row.disease = view.phenotypes.disease_names()[k];
                row.architecture = nn::to_string(nn::ModelKind::CnnStandard);
                row.covariates = covariates;
                row.threshold = std::numeric_limits<double>::quiet_NaN();
                row.auc = finite_or_half(base.test_auc[0]);
                row.seed = seed;
                row.n_train = train_rows.size();
                row.n_test = test_rows.size();
                row.n_selected = cohort.n_snps();
                row.wall_time_s = single_watch.seconds();
                report.rows.push_back(row);
            }
        }
    }
    report.config = {{"seeds", options.seeds},
                     {"covariate_arm", options.covariate_arm},
                     {"single_disease_baselines", options.single_disease_baselines},
                     {"baseline_diseases", options.baseline_diseases},
                     {"train_fraction", options.train_fraction},
                     {"model", nn::to_json(options.network)},
                     {"train", nn::to_json(options.training)}};
    return report;
}

}  // namespace gwasdl::eval
