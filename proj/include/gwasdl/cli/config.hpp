#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "gwasdl/assoc/irls.hpp"
#include "gwasdl/assoc/ld_prune.hpp"
#include "gwasdl/nn/model.hpp"
#include "gwasdl/nn/train.hpp"
#include "gwasdl/selection/selection.hpp"
#include "gwasdl/simulate/simulate.hpp"

namespace gwasdl::cli {

struct DataSection {
    std::string bfile;     // PLINK prefix
    std::string pheno;     // phenotype/covariate CSV
    std::vector<std::string> diseases;  // empty: every usable disease
    std::string model;     // checkpoint path
    std::string manifest;  // sim-manifest JSON
    std::string input;     // report CSV for `report`
};

struct SimulateSection {
    SimSpec genotypes;
    std::vector<DiseaseSpec> diseases{DiseaseSpec{"disease", 10, 0.5, 0.3, 0}};
    double shared_causal_fraction = 0.5;
    // Age confound on one disease; an empty name draws age independent of labels.
    std::string age_disease;
    double age_case_mean = 60.0;
    double age_control_mean = 60.0;
    double age_sd = 5.0;
    std::size_t n_pcs = 10;
};

struct SelectionSection {
    double threshold = 0.05;
    SelectionScope scope = SelectionScope::TrainOnly;
    LeakageModel model = LeakageModel::LogisticOnSelected;
    bool covariates_in_selection = false;
    double ridge_lambda = 1.0;
};

struct ExperimentSection {
    std::string setting = "baseline";
    std::vector<std::uint64_t> seeds;  // empty: the run seed alone
    std::vector<double> thresholds{0.01, 0.05, 0.1};
    std::vector<SelectionScope> scopes{SelectionScope::PopulationLevel, SelectionScope::TrainOnly};
    std::vector<nn::ModelKind> architectures{nn::ModelKind::MlpStandard, nn::ModelKind::MlpChromosome,
                                             nn::ModelKind::CnnStandard, nn::ModelKind::CnnChromosome};
    bool covariate_arm = false;
    bool single_disease_baselines = false;
    bool record_timing = false;
    std::vector<std::string> formats{"csv", "json", "svg"};
};

struct AttributionSection {
    std::size_t top_k = 50;      // 0: every SNP
    std::string rows = "test";   // "test" or "all"
};

struct SplitSection {
    double train_fraction = 0.8;
};

/// Every knob a subcommand can read. Keys absent from a config file keep
/// these defaults; unknown keys are rejected.
struct RunConfig {
    std::uint64_t seed = 1;
    unsigned threads = 1;
    DataSection data;
    SimulateSection simulate;
    IrlsConfig irls;
    bool scan_covariates = false;
    LdPruneConfig prune;
    SplitSection split;
    nn::ModelConfig model;
    nn::TrainConfig train;
    SelectionSection selection;
    ExperimentSection experiment;
    AttributionSection attribution;

    /// Seeds every harness cell uses.
    std::vector<std::uint64_t> experiment_seeds() const;
};

nlohmann::json to_json(const RunConfig& config);
RunConfig run_config_from_json(const nlohmann::json& doc);
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace gwasdl::cli
