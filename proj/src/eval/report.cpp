#include "gwasdl/eval/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>

#include "gwasdl/error.hpp"

#ifndef GWASDL_GIT_DESCRIBE
#define GWASDL_GIT_DESCRIBE "unknown"
#endif

namespace gwasdl::eval {

using nlohmann::json;

std::string to_string(Setting setting) {
    switch (setting) {
        case Setting::Baseline: return "baseline";
        case Setting::Selection: return "selection";
        case Setting::MultiLabel: return "multilabel";
    }
    return "unknown";
}

Setting parse_setting(const std::string& name) {
    for (const auto s : {Setting::Baseline, Setting::Selection, Setting::MultiLabel}) {
        if (to_string(s) == name) {
            return s;
        }
    }
    throw Error(ErrorCode::ConfigInvalid, "unknown setting '" + name + "' (baseline, selection, multilabel)");
}

ReportFormat parse_format(const std::string& name) {
    if (name == "csv") {
        return ReportFormat::Csv;
    }
    if (name == "json") {
        return ReportFormat::Json;
    }
    if (name == "svg") {
        return ReportFormat::Svg;
    }
    throw Error(ErrorCode::ConfigInvalid, "unknown report format '" + name + "'");
}

std::string git_describe() { return GWASDL_GIT_DESCRIBE; }

bool ReportRow::operator==(const ReportRow& o) const {
    const bool same_threshold = (std::isnan(threshold) && std::isnan(o.threshold)) || threshold == o.threshold;
    return disease == o.disease && architecture == o.architecture && covariates == o.covariates &&
           scope == o.scope && same_threshold && auc == o.auc && seed == o.seed && n_train == o.n_train &&
           n_test == o.n_test && n_selected == o.n_selected && empty_selection == o.empty_selection &&
           wall_time_s == o.wall_time_s;
}

namespace {

constexpr const char* kHeader =
    "setting,disease,architecture,covariates,scope,threshold,auc,seed,n_train,n_test,n_selected,empty_selection,"
    "wall_time_s";

// Shortest text that parses back to the same double.
std::string format_double(double v) {
    if (std::isnan(v)) {
        return "NA";
    }
    char buf[64];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

double parse_double(const std::string& s) {
    if (s == "NA") {
        return std::numeric_limits<double>::quiet_NaN();
    }
    double v = 0.0;
    const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || end != s.data() + s.size()) {
        throw Error(ErrorCode::IoFailure, "bad number '" + s + "' in report CSV");
    }
    return v;
}

template <typename T>
T parse_integer(const std::string& s) {
    T v = 0;
    const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || end != s.data() + s.size()) {
        throw Error(ErrorCode::IoFailure, "bad integer '" + s + "' in report CSV");
    }
    return v;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) {
        return s;
    }
    std::string quoted = "\"";
    for (const char c : s) {
        quoted += c == '"' ? std::string("\"\"") : std::string(1, c);
    }
    return quoted + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string current;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                current += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                current += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(current));
            current.clear();
        } else {
            current += c;
        }
    }
    fields.push_back(std::move(current));
    return fields;
}

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (const char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string fixed(double v, int digits) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(digits) << v;
    return out.str();
}

// Legend key of a bar: what distinguishes bars within a disease group.
std::string series_key(const ReportRow& row) {
    std::string key = row.architecture;
    if (!row.scope.empty()) {
        key += " " + row.scope;
    }
    if (!std::isnan(row.threshold) && !row.scope.empty()) {
        key += " p<" + format_double(row.threshold);
    }
    if (row.covariates) {
        key += " +cov";
    }
    return key;
}

json threshold_json(double t) { return std::isnan(t) ? json(nullptr) : json(t); }

}  // namespace

std::string csv_text(const ExperimentReport& report) {
    std::ostringstream out;
    out << kHeader << '\n';
    for (const auto& r : report.rows) {
        out << to_string(report.setting) << ',' << csv_field(r.disease) << ',' << csv_field(r.architecture) << ','
            << (r.covariates ? 1 : 0) << ',' << csv_field(r.scope) << ',' << format_double(r.threshold) << ','
            << format_double(r.auc) << ',' << r.seed << ',' << r.n_train << ',' << r.n_test << ',' << r.n_selected
            << ',' << (r.empty_selection ? 1 : 0) << ',' << format_double(r.wall_time_s) << '\n';
    }
    return out.str();
}

ExperimentReport parse_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kHeader) {
        throw Error(ErrorCode::IoFailure, "report CSV header mismatch");
    }
    ExperimentReport report;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        const auto f = split_csv_line(line);
        if (f.size() != 13) {
            throw Error(ErrorCode::IoFailure, "report CSV row has " + std::to_string(f.size()) + " fields");
        }
        const Setting setting = parse_setting(f[0]);
        if (first) {
            report.setting = setting;
            first = false;
        } else if (setting != report.setting) {
            throw Error(ErrorCode::IoFailure, "report CSV mixes settings");
        }
        ReportRow r;
        r.disease = f[1];
        r.architecture = f[2];
        r.covariates = f[3] == "1";
        r.scope = f[4];
        r.threshold = parse_double(f[5]);
        r.auc = parse_double(f[6]);
        r.seed = parse_integer<std::uint64_t>(f[7]);
        r.n_train = parse_integer<std::size_t>(f[8]);
        r.n_test = parse_integer<std::size_t>(f[9]);
        r.n_selected = parse_integer<std::size_t>(f[10]);
        r.empty_selection = f[11] == "1";
        r.wall_time_s = parse_double(f[12]);
        report.rows.push_back(std::move(r));
    }
    return report;
}

ExperimentReport read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::IoFailure, "cannot read " + path.string());
    }
    std::ostringstream text;
    text << in.rdbuf();
    return parse_csv(text.str());
}

json json_document(const ExperimentReport& report) {
    json rows = json::array();
    std::vector<std::uint64_t> seeds;
    for (const auto& r : report.rows) {
        rows.push_back({{"disease", r.disease},
                        {"architecture", r.architecture},
                        {"covariates", r.covariates},
                        {"scope", r.scope},
                        {"threshold", threshold_json(r.threshold)},
                        {"auc", r.auc},
                        {"seed", r.seed},
                        {"n_train", r.n_train},
                        {"n_test", r.n_test},
                        {"n_selected", r.n_selected},
                        {"empty_selection", r.empty_selection},
                        {"wall_time_s", r.wall_time_s}});
        if (std::find(seeds.begin(), seeds.end(), r.seed) == seeds.end()) {
            seeds.push_back(r.seed);
        }
    }

    // Groups keep the order in which they first appear.
    struct Group {
        const ReportRow* first;
        std::vector<double> aucs;
    };
    std::vector<Group> groups;
    auto same_cell = [](const ReportRow& a, const ReportRow& b) {
        return a.disease == b.disease && a.architecture == b.architecture && a.covariates == b.covariates &&
               a.scope == b.scope && ((std::isnan(a.threshold) && std::isnan(b.threshold)) || a.threshold == b.threshold);
    };
    for (const auto& r : report.rows) {
        auto it = std::find_if(groups.begin(), groups.end(), [&](const Group& g) { return same_cell(*g.first, r); });
        if (it == groups.end()) {
            groups.push_back({&r, {}});
            it = groups.end() - 1;
        }
        it->aucs.push_back(r.auc);
    }
    json summary = json::array();
    std::map<std::pair<std::string, std::string>, std::pair<double, double>> by_covariate;  // (without, with)
    std::vector<std::pair<std::string, std::string>> delta_order;
    for (const auto& g : groups) {
        double mean = 0.0;
        for (const double a : g.aucs) {
            mean += a;
        }
        mean /= static_cast<double>(g.aucs.size());
        double ss = 0.0;
        for (const double a : g.aucs) {
            ss += (a - mean) * (a - mean);
        }
        const double sd = g.aucs.size() > 1 ? std::sqrt(ss / static_cast<double>(g.aucs.size() - 1)) : 0.0;
        summary.push_back({{"disease", g.first->disease},
                           {"architecture", g.first->architecture},
                           {"covariates", g.first->covariates},
                           {"scope", g.first->scope},
                           {"threshold", threshold_json(g.first->threshold)},
                           {"n", g.aucs.size()},
                           {"auc_mean", mean},
                           {"auc_sd", sd}});
        if (g.first->scope.empty()) {
            const auto key = std::make_pair(g.first->disease, g.first->architecture);
            if (!by_covariate.contains(key)) {
                delta_order.push_back(key);
                by_covariate[key] = {std::numeric_limits<double>::quiet_NaN(),
                                     std::numeric_limits<double>::quiet_NaN()};
            }
            (g.first->covariates ? by_covariate[key].second : by_covariate[key].first) = mean;
        }
    }
    json deltas = json::array();
    for (const auto& key : delta_order) {
        const auto [without, with] = by_covariate[key];
        if (!std::isnan(without) && !std::isnan(with)) {
            deltas.push_back({{"disease", key.first},
                              {"architecture", key.second},
                              {"auc_without", without},
                              {"auc_with", with},
                              {"delta", with - without}});
        }
    }
    return {{"setting", to_string(report.setting)},
            {"git_describe", git_describe()},
            {"seeds", seeds},
            {"config", report.config},
            {"rows", rows},
            {"summary", summary},
            {"covariate_delta", deltas}};
}

std::string svg_text(const ExperimentReport& report) {
    std::vector<std::string> diseases;
    std::vector<std::string> series;
    for (const auto& r : report.rows) {
        if (std::find(diseases.begin(), diseases.end(), r.disease) == diseases.end()) {
            diseases.push_back(r.disease);
        }
        const auto key = series_key(r);
        if (std::find(series.begin(), series.end(), key) == series.end()) {
            series.push_back(key);
        }
    }
    static constexpr const char* kPalette[] = {"#4C72B0", "#DD8452", "#55A868", "#C44E52",
                                               "#8172B3", "#937860", "#DA8BC3", "#8C8C8C"};
    const double bar_width = 10.0;
    const double group_gap = 24.0;
    const double left = 60.0;
    const double top = 40.0;
    const double plot_height = 240.0;
    const double legend_height = 18.0 * static_cast<double>(series.size()) + 10.0;

    std::vector<std::size_t> per_disease(diseases.size(), 0);
    for (const auto& r : report.rows) {
        ++per_disease[static_cast<std::size_t>(std::find(diseases.begin(), diseases.end(), r.disease) -
                                               diseases.begin())];
    }
    std::vector<double> group_x(diseases.size());
    double x = left + group_gap / 2.0;
    for (std::size_t g = 0; g < diseases.size(); ++g) {
        group_x[g] = x;
        x += bar_width * static_cast<double>(per_disease[g]) + group_gap;
    }
    const double width = std::max(x + 20.0, 360.0);
    const double height = top + plot_height + 50.0 + legend_height;

    std::ostringstream out;
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fixed(width, 1) << "\" height=\""
        << fixed(height, 1) << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    out << "<title>AUC by disease, " << xml_escape(to_string(report.setting)) << "</title>\n";
    out << "<text x=\"" << fixed(left, 1) << "\" y=\"20\" font-size=\"14\">Test AUC ("
        << xml_escape(to_string(report.setting)) << ")</text>\n";
    for (int tick = 0; tick <= 4; ++tick) {
        const double v = tick * 0.25;
        const double y = top + plot_height * (1.0 - v);
        out << "<line x1=\"" << fixed(left, 1) << "\" y1=\"" << fixed(y, 1) << "\" x2=\"" << fixed(width - 10.0, 1)
            << "\" y2=\"" << fixed(y, 1) << "\" stroke=\"#dddddd\"/>\n";
        out << "<text x=\"" << fixed(left - 6.0, 1) << "\" y=\"" << fixed(y + 4.0, 1) << "\" text-anchor=\"end\">"
            << fixed(v, 2) << "</text>\n";
    }
    std::vector<std::size_t> placed(diseases.size(), 0);
    for (const auto& r : report.rows) {
        const auto g = static_cast<std::size_t>(std::find(diseases.begin(), diseases.end(), r.disease) -
                                                diseases.begin());
        const auto s = static_cast<std::size_t>(std::find(series.begin(), series.end(), series_key(r)) -
                                                series.begin());
        const double bx = group_x[g] + bar_width * static_cast<double>(placed[g]++);
        const double h = plot_height * std::clamp(r.auc, 0.0, 1.0);
        out << "<rect class=\"bar\" x=\"" << fixed(bx, 1) << "\" y=\"" << fixed(top + plot_height - h, 2)
            << "\" width=\"" << fixed(bar_width - 1.0, 1) << "\" height=\"" << fixed(h, 2) << "\" fill=\""
            << kPalette[s % 8] << "\"><title>" << xml_escape(r.disease + " " + series_key(r)) << " seed " << r.seed
            << ": " << fixed(r.auc, 4) << "</title></rect>\n";
    }
    for (std::size_t g = 0; g < diseases.size(); ++g) {
        const double cx = group_x[g] + bar_width * static_cast<double>(per_disease[g]) / 2.0;
        out << "<text x=\"" << fixed(cx, 1) << "\" y=\"" << fixed(top + plot_height + 16.0, 1)
            << "\" text-anchor=\"middle\">" << xml_escape(diseases[g]) << "</text>\n";
    }
    const double half = top + plot_height * 0.5;
    out << "<line x1=\"" << fixed(left, 1) << "\" y1=\"" << fixed(half, 1) << "\" x2=\"" << fixed(width - 10.0, 1)
        << "\" y2=\"" << fixed(half, 1) << "\" stroke=\"#444444\" stroke-dasharray=\"4 3\"/>\n";
    for (std::size_t s = 0; s < series.size(); ++s) {
        const double y = top + plot_height + 36.0 + 18.0 * static_cast<double>(s);
        out << "<rect x=\"" << fixed(left, 1) << "\" y=\"" << fixed(y - 9.0, 1) << "\" width=\"10\" height=\"10\" fill=\""
            << kPalette[s % 8] << "\"/>\n";
        out << "<text x=\"" << fixed(left + 16.0, 1) << "\" y=\"" << fixed(y, 1) << "\">" << xml_escape(series[s])
            << "</text>\n";
    }
    out << "</svg>\n";
    return out.str();
}

std::string report_stem(const ExperimentReport& report) {
    std::ostringstream out;
    out << to_string(report.setting) << '_' << std::hex << std::setw(16) << std::setfill('0')
        << fnv1a(csv_text(report));
    return out.str();
}

std::vector<std::filesystem::path> emit_report(const ExperimentReport& report, const std::filesystem::path& out_dir,
                                               const std::vector<ReportFormat>& formats) {
    if (report.rows.empty()) {
        throw Error(ErrorCode::ConfigInvalid, "cannot emit an empty report");
    }
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) {
        throw Error(ErrorCode::IoFailure, "cannot create " + out_dir.string() + ": " + ec.message());
    }
    const std::string stem = report_stem(report);
    std::vector<std::filesystem::path> written;
    for (const auto format : formats) {
        std::string ext;
        std::string body;
        switch (format) {
            case ReportFormat::Csv:
                ext = "csv";
                body = csv_text(report);
                break;
            case ReportFormat::Json:
                ext = "json";
                body = json_document(report).dump(2) + "\n";
                break;
            case ReportFormat::Svg:
                ext = "svg";
                body = svg_text(report);
                break;
        }
        const auto path = out_dir / (stem + "." + ext);
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out << body;
        if (!out) {
            throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
        }
        written.push_back(path);
    }
    return written;
}

}  // namespace gwasdl::eval
