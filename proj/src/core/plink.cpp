#include "gwasdl/core/plink.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <iterator>
#include <numeric>
#include <sstream>

#include "gwasdl/error.hpp"

namespace gwasdl {

namespace {

constexpr std::uint8_t kMagic0 = 0x6C;
constexpr std::uint8_t kMagic1 = 0x1B;
constexpr std::uint8_t kSnpMajor = 0x01;

std::vector<std::string> split_whitespace(const std::string& line) {
    std::istringstream in(line);
    return {std::istream_iterator<std::string>(in), std::istream_iterator<std::string>()};
}

template <typename T>
bool parse_number(const std::string& token, T& out) {
    const auto* end = token.data() + token.size();
    const auto [ptr, ec] = std::from_chars(token.data(), end, out);
    return ec == std::errc() && ptr == end;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
    }
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.find_first_not_of(" \t") == std::string::npos) {
            continue;
        }
        lines.push_back(line);
    }
    return lines;
}

std::vector<Variant> read_bim(const std::filesystem::path& path) {
    std::vector<Variant> variants;
    std::size_t line_no = 0;
    for (const auto& line : read_lines(path)) {
        ++line_no;
        const auto cols = split_whitespace(line);
        const auto where = path.string() + ":" + std::to_string(line_no);
        if (cols.size() != 6) {
            throw Error(ErrorCode::MalformedBim, where + ": expected 6 columns, found " +
                                                     std::to_string(cols.size()));
        }
        Variant v;
        const auto chrom = parse_chromosome(cols[0]);
        if (!chrom) {
            throw Error(ErrorCode::MalformedBim, where + ": bad chromosome '" + cols[0] + "'");
        }
        v.chromosome = *chrom;
        v.id = cols[1];
        try {
            v.cm = std::stod(cols[2]);
        } catch (const std::exception&) {
            throw Error(ErrorCode::MalformedBim, where + ": bad genetic distance '" + cols[2] + "'");
        }
        if (!parse_number(cols[3], v.position_bp)) {
            throw Error(ErrorCode::MalformedBim, where + ": bad position '" + cols[3] + "'");
        }
        v.allele_a1 = cols[4];
        v.allele_a2 = cols[5];
        variants.push_back(std::move(v));
    }
    return variants;
}

std::vector<Sample> read_fam(const std::filesystem::path& path) {
    std::vector<Sample> samples;
    std::size_t line_no = 0;
    for (const auto& line : read_lines(path)) {
        ++line_no;
        const auto cols = split_whitespace(line);
        if (cols.size() != 6) {
            throw Error(ErrorCode::MalformedFam, path.string() + ":" + std::to_string(line_no) +
                                                     ": expected 6 columns, found " +
                                                     std::to_string(cols.size()));
        }
        Sample s;
        s.family_id = cols[0];
        s.id = cols[1];
        s.father_id = cols[2];
        s.mother_id = cols[3];
        if (!parse_number(cols[4], s.sex_code)) {
            throw Error(ErrorCode::MalformedFam, path.string() + ":" + std::to_string(line_no) +
                                                     ": bad sex code '" + cols[4] + "'");
        }
        s.phenotype = cols[5];
        samples.push_back(std::move(s));
    }
    return samples;
}

// 2-bit code -> A1 dosage.
constexpr std::array<double, 4> kDecode{2.0, kMissingDosage, 1.0, 0.0};

std::string chromosome_token(int chromosome) { return std::to_string(chromosome); }

}  // namespace

PlinkPaths PlinkPaths::from_prefix(const std::filesystem::path& prefix) {
    const auto base = prefix.string();
    return {base + ".bed", base + ".bim", base + ".fam"};
}

std::optional<int> parse_chromosome(const std::string& token) {
    std::string t = token;
    if (t.rfind("chr", 0) == 0) {
        t = t.substr(3);
    }
    if (t == "X") return 23;
    if (t == "Y") return 24;
    if (t == "XY") return 25;
    if (t == "MT" || t == "M") return 26;
    int value = 0;
    if (!parse_number(t, value) || value < 1 || value > 26) {
        return std::nullopt;
    }
    return value;
}

Cohort parse_plink(const PlinkPaths& paths, GenotypeEncoding encoding) {
    Cohort cohort;
    cohort.variants = read_bim(paths.bim);
    cohort.samples = read_fam(paths.fam);

    std::ifstream in(paths.bed, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::IoFailure, "cannot open " + paths.bed.string());
    }
    const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                          std::istreambuf_iterator<char>());
    if (bytes.size() < 3 || bytes[0] != kMagic0 || bytes[1] != kMagic1) {
        throw Error(ErrorCode::BadMagic, paths.bed.string() + " is not a PLINK .bed file");
    }
    if (bytes[2] == 0x00) {
        throw Error(ErrorCode::SampleMajorUnsupported, paths.bed.string());
    }
    if (bytes[2] != kSnpMajor) {
        throw Error(ErrorCode::BadMagic, paths.bed.string() + ": unknown mode byte");
    }

    const std::size_t n = cohort.samples.size();
    const std::size_t m = cohort.variants.size();
    const std::size_t stride = (n + 3) / 4;
    if (bytes.size() != 3 + m * stride) {
        throw Error(ErrorCode::TruncatedPayload,
                    paths.bed.string() + ": expected " + std::to_string(3 + m * stride) +
                        " bytes, found " + std::to_string(bytes.size()));
    }

    cohort.genotypes = GenotypeMatrix(n, m, encoding);
    for (std::size_t j = 0; j < m; ++j) {
        const std::uint8_t* block = bytes.data() + 3 + j * stride;
        for (std::size_t i = 0; i < n; ++i) {
            const unsigned code = (block[i / 4] >> (2 * (i % 4))) & 0x3u;
            const double d = kDecode[code];
            if (encoding == GenotypeEncoding::Dosage) {
                cohort.genotypes.set_dosage(i, j, d);
            } else if (is_missing(d)) {
                cohort.genotypes.set_probabilities(i, j, {kMissingDosage, kMissingDosage, kMissingDosage});
            } else {
                std::array<double, 3> p{0.0, 0.0, 0.0};
                p[static_cast<std::size_t>(d)] = 1.0;
                cohort.genotypes.set_probabilities(i, j, p);
            }
        }
    }

    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto& va = cohort.variants[a];
        const auto& vb = cohort.variants[b];
        return std::tie(va.chromosome, va.position_bp) < std::tie(vb.chromosome, vb.position_bp);
    });
    if (!std::is_sorted(order.begin(), order.end())) {
        cohort = cohort.select_snps(order);
    }
    cohort.refresh_boundaries();
    return cohort;
}

void write_plink(const Cohort& cohort, const PlinkPaths& paths) {
    const auto& g = cohort.genotypes;
    if (g.encoding() != GenotypeEncoding::Dosage) {
        throw Error(ErrorCode::NonIntegralDosage, "write_plink requires Dosage encoding");
    }
    const std::size_t n = cohort.n_samples();
    const std::size_t m = cohort.n_snps();
    const std::size_t stride = (n + 3) / 4;
    std::vector<std::uint8_t> bytes(3 + m * stride, 0);
    bytes[0] = kMagic0;
    bytes[1] = kMagic1;
    bytes[2] = kSnpMajor;
    for (std::size_t j = 0; j < m; ++j) {
        std::uint8_t* block = bytes.data() + 3 + j * stride;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = g.dosage(i, j);
            unsigned code = 0;
            if (is_missing(d)) {
                code = 0x1;
            } else if (d == 2.0) {
                code = 0x0;
            } else if (d == 1.0) {
                code = 0x2;
            } else if (d == 0.0) {
                code = 0x3;
            } else {
                throw Error(ErrorCode::NonIntegralDosage,
                            "dosage " + std::to_string(d) + " at sample " + std::to_string(i) +
                                ", SNP " + cohort.variants[j].id);
            }
            block[i / 4] = static_cast<std::uint8_t>(block[i / 4] | (code << (2 * (i % 4))));
        }
    }

    std::ofstream bed(paths.bed, std::ios::binary);
    bed.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    std::ofstream bim(paths.bim);
    for (const auto& v : cohort.variants) {
        std::ostringstream cm;
        cm.precision(17);
        cm << v.cm;
        bim << chromosome_token(v.chromosome) << '\t' << v.id << '\t' << cm.str() << '\t'
            << v.position_bp << '\t' << v.allele_a1 << '\t' << v.allele_a2 << '\n';
    }
    std::ofstream fam(paths.fam);
    for (const auto& s : cohort.samples) {
        fam << s.family_id << ' ' << s.id << ' ' << s.father_id << ' ' << s.mother_id << ' '
            << s.sex_code << ' ' << s.phenotype << '\n';
    }
    if (!bed || !bim || !fam) {
        throw Error(ErrorCode::IoFailure, "failed writing PLINK fileset " + paths.bed.string());
    }
}

}  // namespace gwasdl
