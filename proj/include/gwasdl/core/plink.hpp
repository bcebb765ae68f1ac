#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "gwasdl/core/cohort.hpp"

namespace gwasdl {

struct PlinkPaths {
    std::filesystem::path bed;
    std::filesystem::path bim;
    std::filesystem::path fam;

    /// `prefix.bed`, `prefix.bim`, `prefix.fam`.
    static PlinkPaths from_prefix(const std::filesystem::path& prefix);
};

/// Reads a SNP-major PLINK 1 fileset. Dosage counts A1 alleles:
/// code 00 -> 2, 10 -> 1, 11 -> 0, 01 -> missing; four samples per byte,
/// lowest bits first. Variants are stably sorted by (chromosome, position).
Cohort parse_plink(const PlinkPaths& paths,
                   GenotypeEncoding encoding = GenotypeEncoding::Dosage);

/// Inverse of parse_plink for integral dosages (throws NonIntegralDosage otherwise).
void write_plink(const Cohort& cohort, const PlinkPaths& paths);

/// Chromosome code parsing shared by .bim reading (1-26, X/Y/XY/MT aliases).
std::optional<int> parse_chromosome(const std::string& token);

}  // namespace gwasdl
