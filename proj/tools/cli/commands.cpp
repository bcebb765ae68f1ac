#include "gwasdl/cli/commands.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>

#include <CLI11.hpp>
#include <json.hpp>

#include "gwasdl/assoc/gwas.hpp"
#include "gwasdl/assoc/ld_prune.hpp"
#include "gwasdl/assoc/pca.hpp"
#include "gwasdl/attribution/saliency.hpp"
#include "gwasdl/cli/config.hpp"
#include "gwasdl/core/pheno_io.hpp"
#include "gwasdl/core/plink.hpp"
#include "gwasdl/core/split.hpp"
#include "gwasdl/error.hpp"
#include "gwasdl/eval/harness.hpp"
#include "gwasdl/eval/report.hpp"
#include "gwasdl/nn/checkpoint.hpp"
#include "gwasdl/nn/config_json.hpp"
#include "gwasdl/selection/selection.hpp"
#include "gwasdl/simulate/simulate.hpp"

namespace gwasdl::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Flag values; each one set on the command line replaces the config value.
struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    std::string config_path;
    std::string out_dir = ".";

    std::optional<std::string> bfile;
    std::optional<std::string> pheno;
    std::vector<std::string> diseases;
    std::optional<std::string> model;
    std::optional<std::string> manifest;
    std::optional<std::string> input;

    std::optional<std::size_t> n_samples;
    std::optional<std::size_t> n_snps;
    std::optional<std::size_t> n_chromosomes;
    std::optional<std::size_t> n_pcs;

    std::optional<double> threshold;
    std::optional<std::string> scope;
    std::optional<std::string> leakage_model;

    std::optional<std::string> model_kind;
    std::optional<std::size_t> epochs;
    std::optional<double> learning_rate;
    std::optional<std::size_t> batch_size;
    bool covariates = false;

    std::optional<std::size_t> top_k;
    std::optional<std::string> rows;

    std::optional<std::string> setting;
    std::vector<std::string> formats;
};

RunConfig resolve(const Overrides& o) {
    RunConfig c = o.config_path.empty() ? RunConfig{} : load_run_config(o.config_path);
    auto apply = [](const auto& flag, auto& target) {
        if (flag) {
            target = *flag;
        }
    };
    apply(o.seed, c.seed);
    apply(o.threads, c.threads);
    apply(o.bfile, c.data.bfile);
    apply(o.pheno, c.data.pheno);
    if (!o.diseases.empty()) {
        c.data.diseases = o.diseases;
    }
    apply(o.model, c.data.model);
    apply(o.manifest, c.data.manifest);
    apply(o.input, c.data.input);
    apply(o.n_samples, c.simulate.genotypes.n_samples);
    apply(o.n_snps, c.simulate.genotypes.n_snps);
    apply(o.n_chromosomes, c.simulate.genotypes.n_chromosomes);
    apply(o.n_pcs, c.simulate.n_pcs);
    apply(o.threshold, c.selection.threshold);
    if (o.scope) {
        c.selection.scope = parse_selection_scope(*o.scope);
    }
    if (o.leakage_model) {
        c.selection.model = parse_leakage_model(*o.leakage_model);
    }
    if (o.model_kind) {
        c.model.kind = nn::parse_model_kind(*o.model_kind);
    }
    apply(o.epochs, c.train.epochs);
    apply(o.learning_rate, c.train.learning_rate);
    apply(o.batch_size, c.train.batch_size);
    if (o.covariates) {
        c.model.use_covariates = true;
    }
    apply(o.top_k, c.attribution.top_k);
    apply(o.rows, c.attribution.rows);
    apply(o.setting, c.experiment.setting);
    if (!o.formats.empty()) {
        c.experiment.formats = o.formats;
    }
    if (c.threads == 0) {
        throw UsageError("--threads must be at least 1");
    }
    c.train.seed = c.seed;
    // Round trip through JSON so flag values get the same validation as file values.
    RunConfig checked = run_config_from_json(to_json(c));
    checked.train.seed = c.seed;
    return checked;
}

std::string real(double v) {
    if (std::isnan(v)) {
        return "NA";
    }
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    char buf[64];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, end);
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
    }
    return out;
}

void write_json(const json& doc, const fs::path& path) {
    auto out = open_out(path);
    out << doc.dump(2) << '\n';
}

void echo_config(const RunConfig& config, const fs::path& out_dir, const std::string& command) {
    write_json(to_json(config), out_dir / (command + ".config.json"));
}

Cohort load_cohort(const RunConfig& config, bool need_pheno) {
    if (config.data.bfile.empty()) {
        throw UsageError("--bfile is required");
    }
    Cohort cohort = parse_plink(PlinkPaths::from_prefix(config.data.bfile));
    if (config.data.pheno.empty()) {
        if (need_pheno) {
            throw UsageError("--pheno is required");
        }
        return cohort;
    }
    PhenotypeLoadReport report;
    cohort = load_phenotypes_covariates(cohort, config.data.pheno, &report);
    if (report.unmatched_rows + report.samples_absent + report.missing_covariate_rows + report.unlabeled_samples > 0) {
        std::cerr << "phenotypes: " << report.unmatched_rows << " unmatched rows, " << report.samples_absent
                  << " samples without a row, " << report.missing_covariate_rows << " dropped for missing covariates, "
                  << report.unlabeled_samples << " without any label\n";
    }
    for (const auto& d : report.unusable_diseases) {
        std::cerr << "phenotypes: disease '" << d << "' lacks cases or controls\n";
    }
    return cohort;
}

std::vector<std::size_t> target_diseases(const Cohort& cohort, const RunConfig& config) {
    std::vector<std::size_t> out;
    if (config.data.diseases.empty()) {
        for (std::size_t d = 0; d < cohort.phenotypes.n_diseases(); ++d) {
            if (cohort.phenotypes.usable(d)) {
                out.push_back(d);
            }
        }
    } else {
        for (const auto& name : config.data.diseases) {
            out.push_back(cohort.phenotypes.index_of(name));
        }
    }
    if (out.empty()) {
        throw Error(ErrorCode::NoLabeledSamples, "no disease has both cases and controls");
    }
    return out;
}

ScanOptions scan_options(const RunConfig& config) {
    ScanOptions scan;
    scan.use_covariates = config.scan_covariates;
    scan.irls = config.irls;
    scan.threads = config.threads;
    return scan;
}

LeakageOptions leakage_options(const RunConfig& config) {
    LeakageOptions options;
    options.threshold = config.selection.threshold;
    options.split.train_fraction = config.split.train_fraction;
    options.split.seed = config.seed;
    options.model = config.selection.model;
    options.covariates_in_selection = config.selection.covariates_in_selection;
    options.ridge_lambda = config.selection.ridge_lambda;
    options.network = config.model;
    options.training = config.train;
    options.scan = scan_options(config);
    return options;
}

std::vector<eval::ReportFormat> formats(const RunConfig& config) {
    std::vector<eval::ReportFormat> out;
    for (const auto& f : config.experiment.formats) {
        out.push_back(eval::parse_format(f));
    }
    return out;
}

void print_paths(const std::vector<fs::path>& paths) {
    for (const auto& p : paths) {
        std::cout << p.string() << '\n';
    }
}

// Covariates standardised over the whole cohort, as the harnesses do.
Cohort prepare_covariates(const Cohort& cohort, nn::ModelConfig& model) {
    if (!model.use_covariates) {
        model.n_covariates = 0;
        return cohort;
    }
    if (!cohort.covariates.present()) {
        throw Error(ErrorCode::ConfigInvalid, "model uses covariates but the cohort has none");
    }
    Cohort out = standardize_covariates(cohort);
    model.n_covariates = out.covariates.n_columns();
    return out;
}

Split training_split(const Cohort& cohort, const std::vector<std::size_t>& diseases, const RunConfig& config) {
    if (diseases.size() == 1) {
        const auto d = diseases.front();
        return split_rows(labelled_rows(cohort, d), &cohort.phenotypes, static_cast<int>(d),
                          config.split.train_fraction, config.seed);
    }
    return eval::multilabel_split(cohort, diseases, config.split.train_fraction, config.seed);
}

std::vector<std::size_t> model_diseases(const nn::TrainedModel& model, const Cohort& cohort) {
    return nn::label_columns(model.config, cohort.phenotypes);
}

// ---------------------------------------------------------------------------

void cmd_simulate(const RunConfig& config, const fs::path& out) {
    const auto& sim = config.simulate;
    SimSpec spec = sim.genotypes;
    spec.seed = config.seed;
    Cohort cohort = simulate_genotypes(spec);

    MultiDiseaseSpec diseases;
    diseases.diseases = sim.diseases;
    diseases.shared_causal_fraction = sim.shared_causal_fraction;
    diseases.seed = derive_seed(config.seed, "phenotypes");
    auto result = simulate_multi_disease(cohort, diseases);
    cohort = std::move(result.cohort);

    const std::string age_disease = sim.age_disease.empty() ? sim.diseases.front().name : sim.age_disease;
    cohort = simulate_age_confound(cohort, age_disease, sim.age_case_mean, sim.age_control_mean, sim.age_sd,
                                   derive_seed(config.seed, "covariates"), sim.n_pcs);
    if (sim.n_pcs > 0) {
        assign_pcs(cohort, compute_pcs(cohort, sim.n_pcs));
    }

    write_plink(cohort, PlinkPaths::from_prefix(out / "cohort"));
    write_phenotypes_covariates(cohort, out / "phenotypes.csv");

    json manifest_diseases = json::array();
    for (const auto& p : result.phenotypes) {
        std::vector<std::string> ids;
        for (const auto j : p.causal_indices) {
            ids.push_back(cohort.variants[j].id);
        }
        const auto d = cohort.phenotypes.index_of(p.name);
        manifest_diseases.push_back({{"name", p.name},
                                     {"causal_indices", p.causal_indices},
                                     {"causal_snp_ids", ids},
                                     {"effect_sizes", p.effect_sizes},
                                     {"prevalence", p.prevalence},
                                     {"cases", cohort.phenotypes.case_count(d)},
                                     {"controls", cohort.phenotypes.control_count(d)}});
    }
    write_json({{"seed", config.seed},
                {"n_samples", cohort.n_samples()},
                {"n_snps", cohort.n_snps()},
                {"bfile", (out / "cohort").string()},
                {"pheno", (out / "phenotypes.csv").string()},
                {"diseases", manifest_diseases},
                {"shared_pool", result.shared_pool}},
               out / "sim-manifest.json");
    std::cout << (out / "cohort").string() << ".{bed,bim,fam}\n"
              << (out / "phenotypes.csv").string() << '\n'
              << (out / "sim-manifest.json").string() << '\n';
}

void cmd_gwas(const RunConfig& config, const fs::path& out) {
    const Cohort cohort = load_cohort(config, true);
    for (const auto d : target_diseases(cohort, config)) {
        const auto& name = cohort.phenotypes.disease_names()[d];
        const auto stats = gwas_scan(cohort, name, scan_options(config));
        const auto path = out / ("gwas_" + name + ".tsv");
        auto tsv = open_out(path);
        tsv << "snp_id\tchr\tpos\tmaf\tbeta\tse\tz\tp\tconverged\n";
        for (const auto& s : stats) {
            const auto& v = cohort.variants[s.snp_index];
            tsv << v.id << '\t' << v.chromosome << '\t' << v.position_bp << '\t' << real(s.maf) << '\t'
                << real(s.beta) << '\t' << real(s.se) << '\t' << real(s.wald_z) << '\t' << real(s.p_value) << '\t'
                << (s.converged ? 1 : 0) << '\n';
        }
        std::cout << path.string() << '\n';
    }
}

void cmd_prune(const RunConfig& config, const fs::path& out) {
    const Cohort cohort = load_cohort(config, false);
    const auto kept = ld_prune(cohort, config.prune);
    const auto path = out / "pruned.snplist";
    auto list = open_out(path);
    for (const auto j : kept) {
        list << cohort.variants[j].id << '\n';
    }
    std::cerr << "prune: kept " << kept.size() << " of " << cohort.n_snps() << " SNPs\n";
    std::cout << path.string() << '\n';
}

void cmd_select(const RunConfig& config, const fs::path& out) {
    const Cohort cohort = load_cohort(config, true);
    const auto options = leakage_options(config);
    for (const auto d : target_diseases(cohort, config)) {
        const auto& name = cohort.phenotypes.disease_names()[d];
        std::vector<std::size_t> train;
        if (config.selection.scope == SelectionScope::TrainOnly) {
            train = leakage_split(cohort, d, options).train;
        }
        SelectionResult result;
        result.disease = name;
        result.scope = config.selection.scope;
        result.threshold = config.selection.threshold;
        bool empty = false;
        try {
            result = select_snps(cohort, name, config.selection.threshold, config.selection.scope, train,
                                 options.scan);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::EmptySelection) {
                throw;
            }
            empty = true;
            result.source_sample_count = train.empty() ? labelled_rows(cohort, d).size() : train.size();
            std::cerr << "select: no SNP passes p < " << real(config.selection.threshold) << " for " << name << '\n';
        }
        std::vector<std::string> ids;
        for (const auto j : result.snp_indices) {
            ids.push_back(cohort.variants[j].id);
        }
        write_json({{"disease", name},
                    {"scope", to_string(result.scope)},
                    {"threshold", result.threshold},
                    {"source_sample_count", result.source_sample_count},
                    {"empty", empty},
                    {"snp_indices", result.snp_indices},
                    {"snp_ids", ids}},
                   out / ("selection_" + name + ".json"));
        auto list = open_out(out / ("selection_" + name + ".snplist"));
        for (const auto& id : ids) {
            list << id << '\n';
        }
        std::cout << (out / ("selection_" + name + ".json")).string() << '\n';
    }
}

void cmd_train(const RunConfig& config, const fs::path& out) {
    Cohort cohort = load_cohort(config, true);
    const auto diseases = target_diseases(cohort, config);
    nn::ModelConfig model = config.model;
    if (diseases.size() > 1 && model.kind != nn::ModelKind::MultiLabelCnn) {
        throw Error(ErrorCode::ConfigInvalid, std::to_string(diseases.size()) +
                                                  " diseases selected; pick one with --disease or use MultiLabelCnn");
    }
    model.n_labels = diseases.size();
    model.label_names.clear();
    for (const auto d : diseases) {
        model.label_names.push_back(cohort.phenotypes.disease_names()[d]);
    }
    model.input_channels = cohort.genotypes.channels();
    model.chromosome_boundaries =
        nn::is_chromosome_kind(model.kind) ? cohort.chromosome_boundaries : std::vector<ChromosomeSpan>{};
    if (nn::is_cnn_kind(model.kind)) {
        std::size_t shortest = cohort.n_snps();
        for (const auto& span : model.chromosome_boundaries) {
            shortest = std::min(shortest, span.size());
        }
        model = fit_conv_stack(std::move(model), shortest);
    }
    cohort = prepare_covariates(cohort, model);

    const Split split = training_split(cohort, diseases, config);
    const auto outcome = nn::fit_and_score(cohort, model, config.train, split.train, split.test);
    const auto ckpt = out / "model.ckpt";
    nn::save_checkpoint(outcome.model, ckpt);

    json aucs = json::object();
    for (std::size_t k = 0; k < diseases.size(); ++k) {
        const double auc = outcome.test_auc[k];
        aucs[model.label_names[k]] = std::isnan(auc) ? json(nullptr) : json(auc);
    }
    json history = json::array();
    for (const auto& e : outcome.model.history) {
        history.push_back({{"train_loss", e.train_loss},
                           {"val_auc", std::isnan(e.val_auc) ? json(nullptr) : json(e.val_auc)}});
    }
    write_json({{"model", nn::to_json(outcome.model.config)},
                {"test_auc", aucs},
                {"n_train", outcome.n_train},
                {"n_val", outcome.n_val},
                {"n_test", outcome.n_test},
                {"best_epoch", outcome.model.best_epoch},
                {"history", history}},
               out / "train_metrics.json");
    for (const auto& [name, auc] : aucs.items()) {
        std::cerr << "train: test AUC " << name << " = " << (auc.is_null() ? "NA" : real(auc.get<double>())) << '\n';
    }
    std::cout << ckpt.string() << '\n';
}

nn::TrainedModel load_model(const RunConfig& config) {
    if (config.data.model.empty()) {
        throw UsageError("--model is required");
    }
    return nn::load_checkpoint(config.data.model);
}

void cmd_predict(const RunConfig& config, const fs::path& out) {
    const auto model = load_model(config);
    Cohort cohort = load_cohort(config, model.config.use_covariates);
    if (model.config.use_covariates) {
        cohort = standardize_covariates(cohort);
    }
    std::vector<std::size_t> rows(cohort.n_samples());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        rows[i] = i;
    }
    const auto probs = nn::predict(model, cohort, rows);
    const std::size_t k = model.config.n_labels;
    const auto path = out / "predictions.tsv";
    auto tsv = open_out(path);
    tsv << "sample_id";
    for (std::size_t l = 0; l < k; ++l) {
        tsv << "\tp_" << (model.config.label_names.empty() ? std::to_string(l) : model.config.label_names[l]);
    }
    tsv << '\n';
    for (std::size_t i = 0; i < rows.size(); ++i) {
        tsv << cohort.samples[i].id;
        for (std::size_t l = 0; l < k; ++l) {
            tsv << '\t' << real(probs[i * k + l]);
        }
        tsv << '\n';
    }
    std::cout << path.string() << '\n';
}

std::set<std::string> planted_ids(const RunConfig& config, const std::string& disease) {
    std::ifstream in(config.data.manifest);
    if (!in) {
        throw Error(ErrorCode::IoFailure, "cannot open manifest " + config.data.manifest);
    }
    const json manifest = json::parse(in);
    for (const auto& d : manifest.at("diseases")) {
        if (d.at("name").get<std::string>() == disease) {
            const auto ids = d.at("causal_snp_ids").get<std::vector<std::string>>();
            return {ids.begin(), ids.end()};
        }
    }
    throw Error(ErrorCode::SpecInvalid, "manifest has no disease '" + disease + "'");
}

void cmd_attribute(const RunConfig& config, const fs::path& out) {
    const auto model = load_model(config);
    Cohort cohort = load_cohort(config, true);
    if (model.config.use_covariates) {
        cohort = standardize_covariates(cohort);
    }
    const auto diseases = model_diseases(model, cohort);
    std::size_t label = 0;
    if (!config.data.diseases.empty()) {
        const auto want = cohort.phenotypes.index_of(config.data.diseases.front());
        const auto it = std::find(diseases.begin(), diseases.end(), want);
        if (it == diseases.end()) {
            throw Error(ErrorCode::ConfigInvalid, "model has no output for " + config.data.diseases.front());
        }
        label = static_cast<std::size_t>(it - diseases.begin());
    }
    std::vector<std::size_t> rows;
    if (config.attribution.rows == "test") {
        rows = training_split(cohort, diseases, config).test;
    } else {
        rows.resize(cohort.n_samples());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            rows[i] = i;
        }
    }
    const auto result = saliency(model, cohort, label, rows);
    if (result.untrained_model) {
        std::cerr << "attribute: model has no training epochs; scores reflect the initialisation\n";
    }
    const std::size_t k = config.attribution.top_k == 0 ? result.scores.size() : config.attribution.top_k;
    const auto ranking = top_k(result.scores, k);

    const bool with_truth = !config.data.manifest.empty();
    const auto truth = with_truth ? planted_ids(config, result.disease) : std::set<std::string>{};
    const auto path = out / ("attribution_" + result.disease + ".tsv");
    auto tsv = open_out(path);
    tsv << "rank\tsnp_id\tchr\tpos\tscore" << (with_truth ? "\tis_planted_causal" : "") << '\n';
    std::size_t hits = 0;
    for (std::size_t r = 0; r < ranking.size(); ++r) {
        const auto& v = cohort.variants[ranking[r]];
        tsv << (r + 1) << '\t' << v.id << '\t' << v.chromosome << '\t' << v.position_bp << '\t'
            << real(result.scores[ranking[r]]);
        if (with_truth) {
            const bool planted = truth.contains(v.id);
            hits += planted ? 1 : 0;
            tsv << '\t' << (planted ? 1 : 0);
        }
        tsv << '\n';
    }
    if (with_truth && !truth.empty()) {
        std::cerr << "attribute: " << hits << " of " << truth.size() << " planted SNPs in the top " << k << '\n';
    }
    std::cout << path.string() << '\n';
}

eval::SelectionOptions selection_options(const RunConfig& config, std::vector<double> thresholds) {
    eval::SelectionOptions options;
    options.thresholds = std::move(thresholds);
    options.scopes = config.experiment.scopes;
    options.seeds = config.experiment_seeds();
    options.diseases = config.data.diseases;
    options.leakage = leakage_options(config);
    options.record_timing = config.experiment.record_timing;
    return options;
}

void emit(eval::ExperimentReport report, const RunConfig& config, const fs::path& out) {
    report.config["run"] = to_json(config);
    print_paths(eval::emit_report(report, out, formats(config)));
}

void cmd_leakage(const RunConfig& config, const fs::path& out) {
    const Cohort cohort = load_cohort(config, true);
    auto options = selection_options(config, {config.selection.threshold});
    options.scopes = {SelectionScope::PopulationLevel, SelectionScope::TrainOnly};
    const auto report = eval::run_selection_experiment(cohort, options);
    for (std::size_t i = 0; i + 1 < report.rows.size(); i += 2) {
        const auto& leaky = report.rows[i];
        const auto& clean = report.rows[i + 1];
        std::cerr << "leakage-exp: " << leaky.disease << " seed " << leaky.seed << ": leaky AUC " << real(leaky.auc)
                  << " (" << leaky.n_selected << " SNPs), clean AUC " << real(clean.auc) << " ("
                  << clean.n_selected << " SNPs)\n";
    }
    emit(report, config, out);
}

void cmd_experiment(const RunConfig& config, const fs::path& out) {
    const Cohort cohort = load_cohort(config, true);
    const auto setting = eval::parse_setting(config.experiment.setting);
    eval::ExperimentReport report;
    switch (setting) {
        case eval::Setting::Baseline: {
            eval::BaselineOptions options;
            options.architectures = config.experiment.architectures;
            options.covariate_arm = config.experiment.covariate_arm;
            options.seeds = config.experiment_seeds();
            options.diseases = config.data.diseases;
            options.train_fraction = config.split.train_fraction;
            options.network = config.model;
            options.training = config.train;
            options.record_timing = config.experiment.record_timing;
            report = eval::run_baseline(cohort, options);
            break;
        }
        case eval::Setting::Selection:
            report = eval::run_selection_experiment(cohort, selection_options(config, config.experiment.thresholds));
            break;
        case eval::Setting::MultiLabel: {
            eval::MultiLabelOptions options;
            options.seeds = config.experiment_seeds();
            options.covariate_arm = config.experiment.covariate_arm;
            options.single_disease_baselines = config.experiment.single_disease_baselines;
            options.train_fraction = config.split.train_fraction;
            options.network = config.model;
            options.training = config.train;
            options.record_timing = config.experiment.record_timing;
            const Cohort view = config.data.diseases.empty()
                                    ? cohort
                                    : eval::with_diseases(cohort, target_diseases(cohort, config));
            report = eval::run_multilabel(view, options);
            break;
        }
    }
    emit(std::move(report), config, out);
}

void cmd_report(const RunConfig& config, const fs::path& out) {
    if (config.data.input.empty()) {
        throw UsageError("--input is required");
    }
    print_paths(eval::emit_report(eval::read_csv(config.data.input), out, formats(config)));
}

struct Command {
    const char* name;
    const char* help;
    void (*run)(const RunConfig&, const fs::path&);
};

constexpr Command kCommands[] = {
    {"simulate", "Simulate a cohort: PLINK fileset, phenotype CSV and sim-manifest", cmd_simulate},
    {"gwas", "Per-SNP logistic association scan (TSV per disease)", cmd_gwas},
    {"prune", "LD pruning; writes the retained SNP ids", cmd_prune},
    {"select", "p-value SNP selection in the configured scope", cmd_select},
    {"train", "Train a network on an 80/20 split and save a checkpoint", cmd_train},
    {"predict", "Per-sample probabilities from a checkpoint", cmd_predict},
    {"attribute", "Saliency ranking of SNPs for a trained model", cmd_attribute},
    {"leakage-exp", "Leaky versus train-only selection at one threshold", cmd_leakage},
    {"experiment", "Run the baseline, selection or multilabel harness", cmd_experiment},
    {"report", "Re-emit a report CSV as the configured formats", cmd_report},
};

void add_data_options(CLI::App& sub, Overrides& o, bool pheno, bool diseases) {
    sub.add_option("--bfile", o.bfile, "PLINK fileset prefix");
    if (pheno) {
        sub.add_option("--pheno", o.pheno, "Phenotype and covariate CSV");
    }
    if (diseases) {
        sub.add_option("--disease", o.diseases, "Disease name (repeatable)");
    }
}

}  // namespace

int run(int argc, char** argv) {
    CLI::App app{"Leakage-aware deep learning GWAS toolkit", "gwasdl"};
    app.require_subcommand(1);
    app.fallthrough();
    Overrides o;
    app.add_option("--seed", o.seed, "Seed for every random stream");
    app.add_option("--threads", o.threads, "Worker threads for association scans");
    app.add_option("--config", o.config_path, "JSON run configuration")->check(CLI::ExistingFile);
    app.add_option("--out-dir", o.out_dir, "Output directory")->capture_default_str();

    std::map<std::string, CLI::App*> subs;
    for (const auto& c : kCommands) {
        subs[c.name] = app.add_subcommand(c.name, c.help);
    }
    subs["simulate"]->add_option("--n-samples", o.n_samples, "Number of samples");
    subs["simulate"]->add_option("--n-snps", o.n_snps, "Number of SNPs");
    subs["simulate"]->add_option("--n-chromosomes", o.n_chromosomes, "Number of chromosomes");
    subs["simulate"]->add_option("--n-pcs", o.n_pcs, "Principal components stored as covariates");
    for (const char* name : {"gwas", "select", "train", "leakage-exp", "experiment"}) {
        add_data_options(*subs[name], o, true, true);
    }
    add_data_options(*subs["prune"], o, true, false);
    add_data_options(*subs["predict"], o, true, false);
    add_data_options(*subs["attribute"], o, true, true);
    for (const char* name : {"predict", "attribute"}) {
        subs[name]->add_option("--model", o.model, "Checkpoint file");
    }
    subs["attribute"]->add_option("--manifest", o.manifest, "sim-manifest JSON for planted-SNP flags");
    subs["attribute"]->add_option("--top-k", o.top_k, "Number of ranked SNPs (0: all)");
    subs["attribute"]->add_option("--rows", o.rows, "Samples to average over")->check(CLI::IsMember({"test", "all"}));
    for (const char* name : {"select", "leakage-exp"}) {
        subs[name]->add_option("--threshold", o.threshold, "p-value threshold");
    }
    subs["select"]->add_option("--scope", o.scope, "PopulationLevel or TrainOnly");
    subs["leakage-exp"]->add_option("--leakage-model", o.leakage_model,
                                    "LogisticOnSelected, MlpStandard or CnnStandard");
    for (const char* name : {"train", "experiment", "leakage-exp"}) {
        subs[name]->add_option("--epochs", o.epochs, "Training epochs");
        subs[name]->add_option("--lr", o.learning_rate, "Learning rate");
        subs[name]->add_option("--batch-size", o.batch_size, "Mini-batch size");
    }
    subs["train"]->add_option("--model-kind", o.model_kind,
                              "MlpStandard, MlpChromosome, CnnStandard, CnnChromosome or MultiLabelCnn");
    subs["train"]->add_flag("--covariates", o.covariates, "Append covariates to the first dense layer");
    subs["experiment"]
        ->add_option("--setting", o.setting, "Harness to run")
        ->check(CLI::IsMember({"baseline", "selection", "multilabel"}));
    for (const char* name : {"experiment", "leakage-exp", "report"}) {
        subs[name]->add_option("--format", o.formats, "Report formats: csv, json, svg (repeatable)");
    }
    subs["report"]->add_option("--input", o.input, "Report CSV to re-emit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    }

    const Command* chosen = nullptr;
    for (const auto& c : kCommands) {
        if (subs[c.name]->parsed()) {
            chosen = &c;
        }
    }
    try {
        const RunConfig config = resolve(o);
        const fs::path out = o.out_dir;
        std::error_code ec;
        fs::create_directories(out, ec);
        if (ec) {
            throw Error(ErrorCode::IoFailure, "cannot create " + out.string() + ": " + ec.message());
        }
        echo_config(config, out, chosen->name);
        chosen->run(config, out);
    } catch (const UsageError& e) {
        std::cerr << "gwasdl " << chosen->name << ": " << e.what() << '\n';
        return kExitUsage;
    } catch (const Error& e) {
        std::cerr << "gwasdl " << chosen->name << ": " << e.what() << '\n';
        return e.code() == ErrorCode::ConfigInvalid ? kExitUsage : kExitData;
    } catch (const json::exception& e) {
        std::cerr << "gwasdl " << chosen->name << ": malformed JSON value: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "gwasdl " << chosen->name << ": " << e.what() << '\n';
        return kExitData;
    }
    return kExitOk;
}

}  // namespace gwasdl::cli
