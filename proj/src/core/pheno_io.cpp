#include "gwasdl/core/pheno_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "gwasdl/error.hpp"

namespace gwasdl {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) {
        const auto first = field.find_first_not_of(" \t");
        const auto last = field.find_last_not_of(" \t\r");
        out.push_back(first == std::string::npos ? "" : field.substr(first, last - first + 1));
    }
    if (!line.empty() && line.back() == ',') {
        out.emplace_back();
    }
    return out;
}

bool is_na(const std::string& s) { return s.empty() || s == "NA" || s == "na" || s == "nan"; }

double parse_real(const std::string& s, std::size_t line_no) {
    double value = 0.0;
    const auto* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, value);
    if (ec != std::errc() || ptr != end) {
        throw Error(ErrorCode::HeaderMismatch,
                    "line " + std::to_string(line_no) + ": non-numeric value '" + s + "'");
    }
    return value;
}

std::string format_real(double v) {
    std::ostringstream out;
    out.precision(17);
    out << v;
    return out.str();
}

}  // namespace

Cohort load_phenotypes_covariates(const Cohort& cohort, const std::filesystem::path& csv_path,
                                  PhenotypeLoadReport* report) {
    std::ifstream in(csv_path);
    if (!in) {
        throw Error(ErrorCode::IoFailure, "cannot open " + csv_path.string());
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw Error(ErrorCode::HeaderMismatch, csv_path.string() + " is empty");
    }
    const auto header = split_csv(line);
    if (header.empty() || header[0] != "sample_id") {
        throw Error(ErrorCode::HeaderMismatch, "first column must be sample_id");
    }
    std::vector<std::string> diseases;
    std::size_t col = 1;
    while (col < header.size() && header[col].rfind("label_", 0) == 0) {
        diseases.push_back(header[col].substr(6));
        if (diseases.back().empty()) {
            throw Error(ErrorCode::HeaderMismatch, "empty disease name in label column");
        }
        ++col;
    }
    if (diseases.empty()) {
        throw Error(ErrorCode::HeaderMismatch, "no label_<disease> columns");
    }
    if (col + 2 > header.size() || header[col] != "age" || header[col + 1] != "sex") {
        throw Error(ErrorCode::HeaderMismatch, "expected age,sex after label columns");
    }
    const std::size_t first_pc = col + 2;
    const std::size_t n_pcs = header.size() - first_pc;
    for (std::size_t k = 0; k < n_pcs; ++k) {
        if (header[first_pc + k] != "pc" + std::to_string(k + 1)) {
            throw Error(ErrorCode::HeaderMismatch,
                        "expected pc" + std::to_string(k + 1) + ", found '" + header[first_pc + k] + "'");
        }
    }

    std::unordered_map<std::string, std::size_t> sample_index;
    for (std::size_t i = 0; i < cohort.n_samples(); ++i) {
        sample_index.emplace(cohort.samples[i].id, i);
    }

    struct Row {
        std::vector<std::int8_t> labels;
        std::vector<double> covariates;
        bool complete = true;
    };
    std::unordered_map<std::size_t, Row> rows;
    std::unordered_set<std::string> seen;
    PhenotypeLoadReport local;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        const auto fields = split_csv(line);
        if (fields.size() != header.size()) {
            throw Error(ErrorCode::HeaderMismatch, "line " + std::to_string(line_no) + ": expected " +
                                                       std::to_string(header.size()) + " fields");
        }
        if (!seen.insert(fields[0]).second) {
            throw Error(ErrorCode::DuplicateSampleId, "sample_id '" + fields[0] + "' repeated");
        }
        Row row;
        for (std::size_t d = 0; d < diseases.size(); ++d) {
            const auto& f = fields[1 + d];
            if (is_na(f)) {
                row.labels.push_back(kMissingLabel);
            } else if (f == "0" || f == "1") {
                row.labels.push_back(static_cast<std::int8_t>(f[0] - '0'));
            } else {
                throw Error(ErrorCode::HeaderMismatch,
                            "line " + std::to_string(line_no) + ": label must be 0, 1 or NA, got '" + f + "'");
            }
        }
        for (std::size_t c = col; c < header.size(); ++c) {
            if (is_na(fields[c])) {
                row.complete = false;
                row.covariates.push_back(0.0);
            } else {
                row.covariates.push_back(parse_real(fields[c], line_no));
            }
        }
        const auto it = sample_index.find(fields[0]);
        if (it == sample_index.end()) {
            ++local.unmatched_rows;
            continue;
        }
        rows.emplace(it->second, std::move(row));
    }

    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < cohort.n_samples(); ++i) {
        const auto it = rows.find(i);
        if (it == rows.end()) {
            ++local.samples_absent;
            continue;
        }
        if (!it->second.complete) {
            ++local.missing_covariate_rows;
            continue;
        }
        bool any_label = false;
        for (const auto l : it->second.labels) {
            any_label = any_label || l != kMissingLabel;
        }
        if (!any_label) {
            ++local.unlabeled_samples;
            continue;
        }
        kept.push_back(i);
    }
    if (kept.empty()) {
        throw Error(ErrorCode::NoLabeledSamples, csv_path.string() + " leaves no labelled samples");
    }

    Cohort out = cohort.select_samples(kept);
    out.phenotypes = PhenotypeTable(diseases, kept.size());
    out.covariates = CovariateTable(kept.size(), n_pcs);
    for (std::size_t r = 0; r < kept.size(); ++r) {
        const Row& row = rows.at(kept[r]);
        for (std::size_t d = 0; d < diseases.size(); ++d) {
            out.phenotypes.set_label(r, d, row.labels[d]);
        }
        for (std::size_t c = 0; c < row.covariates.size(); ++c) {
            out.covariates.mutable_column(c)[r] = row.covariates[c];
        }
    }
    for (std::size_t d = 0; d < diseases.size(); ++d) {
        if (!out.phenotypes.usable(d)) {
            local.unusable_diseases.push_back(diseases[d]);
        }
    }
    if (report != nullptr) {
        *report = local;
    }
    return out;
}

void write_phenotypes_covariates(const Cohort& cohort, const std::filesystem::path& csv_path) {
    std::ofstream out(csv_path);
    if (!out) {
        throw Error(ErrorCode::IoFailure, "cannot write " + csv_path.string());
    }
    const auto& ph = cohort.phenotypes;
    const auto& cov = cohort.covariates;
    out << "sample_id";
    for (const auto& d : ph.disease_names()) {
        out << ",label_" << d;
    }
    out << ",age,sex";
    for (std::size_t k = 0; k < cov.n_pcs(); ++k) {
        out << ",pc" << (k + 1);
    }
    out << '\n';
    for (std::size_t i = 0; i < cohort.n_samples(); ++i) {
        out << cohort.samples[i].id;
        for (std::size_t d = 0; d < ph.n_diseases(); ++d) {
            const auto l = ph.label(i, d);
            out << ',' << (l == kMissingLabel ? std::string("NA") : std::to_string(l));
        }
        if (cov.present()) {
            for (std::size_t c = 0; c < cov.n_columns(); ++c) {
                out << ',' << format_real(cov.value(i, c));
            }
        } else {
            out << ",NA,NA";
        }
        out << '\n';
    }
    if (!out) {
        throw Error(ErrorCode::IoFailure, "failed writing " + csv_path.string());
    }
}

}  // namespace gwasdl
