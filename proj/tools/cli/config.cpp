#include "gwasdl/cli/config.hpp"

#include <fstream>
#include <set>

#include "gwasdl/error.hpp"
#include "gwasdl/nn/config_json.hpp"

namespace gwasdl::cli {

using nlohmann::json;

namespace {

void reject_unknown(const json& doc, const std::set<std::string>& known, const std::string& where) {
    if (!doc.is_object()) {
        throw Error(ErrorCode::ConfigInvalid, where + " must be a JSON object");
    }
    for (const auto& [key, value] : doc.items()) {
        if (!known.contains(key)) {
            throw Error(ErrorCode::ConfigInvalid, "unknown key '" + key + "' in " + where);
        }
    }
}

template <typename T>
void read(const json& doc, const char* key, T& out) {
    if (const auto it = doc.find(key); it != doc.end()) {
        try {
            out = it->get<T>();
        } catch (const json::exception& e) {
            throw Error(ErrorCode::ConfigInvalid, std::string("bad value for '") + key + "': " + e.what());
        }
    }
}

const json& section(const json& doc, const char* key) {
    static const json empty = json::object();
    const auto it = doc.find(key);
    return it == doc.end() ? empty : *it;
}

json to_json(const DiseaseSpec& d) {
    return {{"name", d.name},
            {"n_causal", d.n_causal},
            {"effect_size", d.effect_size},
            {"prevalence", d.prevalence},
            {"observed_count", d.observed_count}};
}

DiseaseSpec disease_from_json(const json& doc) {
    reject_unknown(doc, {"name", "n_causal", "effect_size", "prevalence", "observed_count"}, "simulate.diseases");
    DiseaseSpec d;
    read(doc, "name", d.name);
    read(doc, "n_causal", d.n_causal);
    read(doc, "effect_size", d.effect_size);
    read(doc, "prevalence", d.prevalence);
    read(doc, "observed_count", d.observed_count);
    if (d.name.empty()) {
        throw Error(ErrorCode::ConfigInvalid, "every simulated disease needs a name");
    }
    return d;
}

template <typename T, typename Fn>
std::vector<std::string> names(const std::vector<T>& values, Fn to_name) {
    std::vector<std::string> out;
    for (const auto& v : values) {
        out.push_back(to_name(v));
    }
    return out;
}

}  // namespace

std::vector<std::uint64_t> RunConfig::experiment_seeds() const {
    return experiment.seeds.empty() ? std::vector<std::uint64_t>{seed} : experiment.seeds;
}

json to_json(const RunConfig& c) {
    json diseases = json::array();
    for (const auto& d : c.simulate.diseases) {
        diseases.push_back(to_json(d));
    }
    json train = nn::to_json(c.train);
    train.erase("seed");  // the run seed drives training
    return {
        {"seed", c.seed},
        {"threads", c.threads},
        {"data",
         {{"bfile", c.data.bfile},
          {"pheno", c.data.pheno},
          {"diseases", c.data.diseases},
          {"model", c.data.model},
          {"manifest", c.data.manifest},
          {"input", c.data.input}}},
        {"simulate",
         {{"n_samples", c.simulate.genotypes.n_samples},
          {"n_snps", c.simulate.genotypes.n_snps},
          {"maf_low", c.simulate.genotypes.maf_low},
          {"maf_high", c.simulate.genotypes.maf_high},
          {"ld_block_size", c.simulate.genotypes.ld_block_size},
          {"ld_rho", c.simulate.genotypes.ld_rho},
          {"n_chromosomes", c.simulate.genotypes.n_chromosomes},
          {"diseases", diseases},
          {"shared_causal_fraction", c.simulate.shared_causal_fraction},
          {"age_disease", c.simulate.age_disease},
          {"age_case_mean", c.simulate.age_case_mean},
          {"age_control_mean", c.simulate.age_control_mean},
          {"age_sd", c.simulate.age_sd},
          {"n_pcs", c.simulate.n_pcs}}},
        {"irls", {{"max_iter", c.irls.max_iter}, {"tol", c.irls.tol}, {"ridge", c.irls.ridge}}},
        {"scan_covariates", c.scan_covariates},
        {"prune",
         {{"window_snps", c.prune.window_snps},
          {"step_snps", c.prune.step_snps},
          {"r2_threshold", c.prune.r2_threshold}}},
        {"split", {{"train_fraction", c.split.train_fraction}}},
        {"model", nn::to_json(c.model)},
        {"train", train},
        {"selection",
         {{"threshold", c.selection.threshold},
          {"scope", to_string(c.selection.scope)},
          {"model", to_string(c.selection.model)},
          {"covariates_in_selection", c.selection.covariates_in_selection},
          {"ridge_lambda", c.selection.ridge_lambda}}},
        {"experiment",
         {{"setting", c.experiment.setting},
          {"seeds", c.experiment.seeds},
          {"thresholds", c.experiment.thresholds},
          {"scopes", names(c.experiment.scopes, [](SelectionScope s) { return to_string(s); })},
          {"architectures", names(c.experiment.architectures, [](nn::ModelKind k) { return nn::to_string(k); })},
          {"covariate_arm", c.experiment.covariate_arm},
          {"single_disease_baselines", c.experiment.single_disease_baselines},
          {"record_timing", c.experiment.record_timing},
          {"formats", c.experiment.formats}}},
        {"attribution", {{"top_k", c.attribution.top_k}, {"rows", c.attribution.rows}}},
    };
}

RunConfig run_config_from_json(const json& doc) {
    reject_unknown(doc,
                   {"seed", "threads", "data", "simulate", "irls", "scan_covariates", "prune", "split", "model",
                    "train", "selection", "experiment", "attribution"},
                   "run config");
    RunConfig c;
    read(doc, "seed", c.seed);
    read(doc, "threads", c.threads);
    read(doc, "scan_covariates", c.scan_covariates);

    const auto& data = section(doc, "data");
    reject_unknown(data, {"bfile", "pheno", "diseases", "model", "manifest", "input"}, "data");
    read(data, "bfile", c.data.bfile);
    read(data, "pheno", c.data.pheno);
    read(data, "diseases", c.data.diseases);
    read(data, "model", c.data.model);
    read(data, "manifest", c.data.manifest);
    read(data, "input", c.data.input);

    const auto& sim = section(doc, "simulate");
    reject_unknown(sim,
                   {"n_samples", "n_snps", "maf_low", "maf_high", "ld_block_size", "ld_rho", "n_chromosomes",
                    "diseases", "shared_causal_fraction", "age_disease", "age_case_mean", "age_control_mean",
                    "age_sd", "n_pcs"},
                   "simulate");
    read(sim, "n_samples", c.simulate.genotypes.n_samples);
    read(sim, "n_snps", c.simulate.genotypes.n_snps);
    read(sim, "maf_low", c.simulate.genotypes.maf_low);
    read(sim, "maf_high", c.simulate.genotypes.maf_high);
    read(sim, "ld_block_size", c.simulate.genotypes.ld_block_size);
    read(sim, "ld_rho", c.simulate.genotypes.ld_rho);
    read(sim, "n_chromosomes", c.simulate.genotypes.n_chromosomes);
    if (const auto it = sim.find("diseases"); it != sim.end()) {
        if (!it->is_array()) {
            throw Error(ErrorCode::ConfigInvalid, "simulate.diseases must be an array");
        }
        c.simulate.diseases.clear();
        for (const auto& d : *it) {
            c.simulate.diseases.push_back(disease_from_json(d));
        }
    }
    read(sim, "shared_causal_fraction", c.simulate.shared_causal_fraction);
    read(sim, "age_disease", c.simulate.age_disease);
    read(sim, "age_case_mean", c.simulate.age_case_mean);
    read(sim, "age_control_mean", c.simulate.age_control_mean);
    read(sim, "age_sd", c.simulate.age_sd);
    read(sim, "n_pcs", c.simulate.n_pcs);

    const auto& irls = section(doc, "irls");
    reject_unknown(irls, {"max_iter", "tol", "ridge"}, "irls");
    read(irls, "max_iter", c.irls.max_iter);
    read(irls, "tol", c.irls.tol);
    read(irls, "ridge", c.irls.ridge);

    const auto& prune = section(doc, "prune");
    reject_unknown(prune, {"window_snps", "step_snps", "r2_threshold"}, "prune");
    read(prune, "window_snps", c.prune.window_snps);
    read(prune, "step_snps", c.prune.step_snps);
    read(prune, "r2_threshold", c.prune.r2_threshold);

    const auto& split = section(doc, "split");
    reject_unknown(split, {"train_fraction"}, "split");
    read(split, "train_fraction", c.split.train_fraction);

    c.model = nn::model_config_from_json(section(doc, "model"));
    if (section(doc, "train").contains("seed")) {
        throw Error(ErrorCode::ConfigInvalid, "train.seed is not configurable; set the top-level seed");
    }
    c.train = nn::train_config_from_json(section(doc, "train"));

    const auto& sel = section(doc, "selection");
    reject_unknown(sel, {"threshold", "scope", "model", "covariates_in_selection", "ridge_lambda"}, "selection");
    read(sel, "threshold", c.selection.threshold);
    if (const auto it = sel.find("scope"); it != sel.end()) {
        c.selection.scope = parse_selection_scope(it->get<std::string>());
    }
    if (const auto it = sel.find("model"); it != sel.end()) {
        c.selection.model = parse_leakage_model(it->get<std::string>());
    }
    read(sel, "covariates_in_selection", c.selection.covariates_in_selection);
    read(sel, "ridge_lambda", c.selection.ridge_lambda);

    const auto& exp = section(doc, "experiment");
    reject_unknown(exp,
                   {"setting", "seeds", "thresholds", "scopes", "architectures", "covariate_arm",
                    "single_disease_baselines", "record_timing", "formats"},
                   "experiment");
    read(exp, "setting", c.experiment.setting);
    read(exp, "seeds", c.experiment.seeds);
    read(exp, "thresholds", c.experiment.thresholds);
    if (const auto it = exp.find("scopes"); it != exp.end()) {
        c.experiment.scopes.clear();
        for (const auto& s : *it) {
            c.experiment.scopes.push_back(parse_selection_scope(s.get<std::string>()));
        }
    }
    if (const auto it = exp.find("architectures"); it != exp.end()) {
        c.experiment.architectures.clear();
        for (const auto& s : *it) {
            c.experiment.architectures.push_back(nn::parse_model_kind(s.get<std::string>()));
        }
    }
    read(exp, "covariate_arm", c.experiment.covariate_arm);
    read(exp, "single_disease_baselines", c.experiment.single_disease_baselines);
    read(exp, "record_timing", c.experiment.record_timing);
    read(exp, "formats", c.experiment.formats);

    const auto& attr = section(doc, "attribution");
    reject_unknown(attr, {"top_k", "rows"}, "attribution");
    read(attr, "top_k", c.attribution.top_k);
    read(attr, "rows", c.attribution.rows);
    if (c.attribution.rows != "test" && c.attribution.rows != "all") {
        throw Error(ErrorCode::ConfigInvalid, "attribution.rows must be 'test' or 'all'");
    }
    return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::ConfigInvalid, "cannot open config " + path.string());
    }
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::ConfigInvalid, path.string() + ": " + e.what());
    }
    return run_config_from_json(doc);
}

}  // namespace gwasdl::cli
