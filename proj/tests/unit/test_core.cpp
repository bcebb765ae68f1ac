#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <set>

#include "fixtures.hpp"
#include "gwasdl/core/pheno_io.hpp"
#include "gwasdl/core/plink.hpp"
#include "gwasdl/core/split.hpp"
#include "gwasdl/error.hpp"

using namespace gwasdl;
using gwasdl::testing::TempDir;

namespace {

void write_bytes(const std::filesystem::path& path, const std::vector<unsigned char>& bytes) {
    std::ofstream out(path, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

PlinkPaths four_sample_fileset(const TempDir& dir, const std::vector<unsigned char>& bed) {
    const auto paths = PlinkPaths::from_prefix(dir / "toy");
    write_bytes(paths.bed, bed);
    write_text(paths.bim, "1\trs1\t0\t100\tA\tG\n");
    write_text(paths.fam, "F1 S1 0 0 1 -9\nF2 S2 0 0 2 -9\nF3 S3 0 0 1 -9\nF4 S4 0 0 2 -9\n");
    return paths;
}

ErrorCode error_code_of(const auto& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected gwasdl::Error");
    return ErrorCode::IoFailure;
}

}  // namespace

TEST_CASE("hand-packed byte decodes low bits first") {
    TempDir dir("plink_byte");
    const auto cohort = parse_plink(four_sample_fileset(dir, {0x6C, 0x1B, 0x01, 0b11100100}));
    REQUIRE(cohort.n_samples() == 4);
    REQUIRE(cohort.n_snps() == 1);
    CHECK(cohort.genotypes.dosage(0, 0) == 2.0);
    CHECK(is_missing(cohort.genotypes.dosage(1, 0)));
    CHECK(cohort.genotypes.dosage(2, 0) == 1.0);
    CHECK(cohort.genotypes.dosage(3, 0) == 0.0);
    CHECK(cohort.samples[3].id == "S4");
    CHECK(cohort.variants[0].position_bp == 100);
}

TEST_CASE("prob3 parse yields one-hot triples and HWE-free missing") {
    TempDir dir("plink_prob3");
    const auto cohort = parse_plink(four_sample_fileset(dir, {0x6C, 0x1B, 0x01, 0b11100100}), GenotypeEncoding::Prob3);
    CHECK(cohort.genotypes.probabilities(0, 0) == std::array<double, 3>{0.0, 0.0, 1.0});
    CHECK(cohort.genotypes.probabilities(3, 0) == std::array<double, 3>{1.0, 0.0, 0.0});
    CHECK(is_missing(cohort.genotypes.dosage(1, 0)));
}

TEST_CASE("bed header and size errors") {
    TempDir dir("plink_errors");
    CHECK(error_code_of([&] { parse_plink(four_sample_fileset(dir, {0x6C, 0x1C, 0x01, 0x00})); }) ==
          ErrorCode::BadMagic);
    CHECK(error_code_of([&] { parse_plink(four_sample_fileset(dir, {0x6C, 0x1B, 0x00, 0x00})); }) ==
          ErrorCode::SampleMajorUnsupported);
    CHECK(error_code_of([&] { parse_plink(four_sample_fileset(dir, {0x6C, 0x1B, 0x01})); }) ==
          ErrorCode::TruncatedPayload);
    CHECK(error_code_of([&] { parse_plink(four_sample_fileset(dir, {0x6C, 0x1B, 0x01, 0x00, 0x00})); }) ==
          ErrorCode::TruncatedPayload);

    const auto paths = four_sample_fileset(dir, {0x6C, 0x1B, 0x01, 0x00});
    write_text(paths.bim, "1\trs1\t0\n");
    CHECK(error_code_of([&] { parse_plink(paths); }) == ErrorCode::MalformedBim);
    write_text(paths.bim, "1\trs1\t0\t100\tA\tG\n");
    write_text(paths.fam, "F1 S1 0 0\n");
    CHECK(error_code_of([&] { parse_plink(paths); }) == ErrorCode::MalformedFam);
}

TEST_CASE("variants are sorted by chromosome and position") {
    TempDir dir("plink_sort");
    const auto paths = PlinkPaths::from_prefix(dir / "toy");
    // SNP a (chr 2) is all 0, SNP b (chr 1) is all 2.
    write_bytes(paths.bed, {0x6C, 0x1B, 0x01, 0xFF, 0x00});
    write_text(paths.bim, "2 a 0 50 A G\n1 b 0 900 A G\n");
    write_text(paths.fam, "F1 S1 0 0 1 -9\nF2 S2 0 0 2 -9\nF3 S3 0 0 1 -9\nF4 S4 0 0 2 -9\n");
    const auto cohort = parse_plink(paths);
    CHECK(cohort.variants[0].id == "b");
    CHECK(cohort.genotypes.dosage(0, 0) == 2.0);
    CHECK(cohort.variants[1].id == "a");
    CHECK(cohort.genotypes.dosage(0, 1) == 0.0);
    REQUIRE(cohort.chromosome_boundaries.size() == 2);
    CHECK(cohort.chromosome_boundaries[1].begin == 1);
}

TEST_CASE("write then parse is the identity on integral dosages") {
    TempDir dir("plink_roundtrip");
    auto cohort = testing::simulated_cohort(37, 23, 5, 3);
    cohort.genotypes.set_dosage(4, 7, kMissingDosage);
    const auto paths = PlinkPaths::from_prefix(dir / "rt");
    write_plink(cohort, paths);
    const auto back = parse_plink(paths);
    REQUIRE(back.n_samples() == cohort.n_samples());
    REQUIRE(back.n_snps() == cohort.n_snps());
    for (std::size_t j = 0; j < cohort.n_snps(); ++j) {
        CHECK(back.variants[j].id == cohort.variants[j].id);
        CHECK(back.variants[j].chromosome == cohort.variants[j].chromosome);
        for (std::size_t i = 0; i < cohort.n_samples(); ++i) {
            const double a = cohort.genotypes.dosage(i, j);
            const double b = back.genotypes.dosage(i, j);
            CHECK((a == b || (is_missing(a) && is_missing(b))));
        }
    }
    CHECK(back.chromosome_boundaries == cohort.chromosome_boundaries);
}

TEST_CASE("fractional dosages refuse to serialize") {
    TempDir dir("plink_fraction");
    auto cohort = testing::simulated_cohort(4, 2, 1, 1);
    cohort.genotypes.set_dosage(0, 0, 0.5);
    CHECK(error_code_of([&] { write_plink(cohort, PlinkPaths::from_prefix(dir / "x")); }) ==
          ErrorCode::NonIntegralDosage);
}

TEST_CASE("chromosome codes") {
    CHECK(parse_chromosome("1") == 1);
    CHECK(parse_chromosome("22") == 22);
    CHECK(parse_chromosome("X") == 23);
    CHECK(parse_chromosome("chrX") == 23);
    CHECK(parse_chromosome("Z") == std::nullopt);
    CHECK(parse_chromosome("0") == std::nullopt);
}

TEST_CASE("phenotype CSV loading") {
    TempDir dir("pheno");
    const auto cohort = testing::simulated_cohort(4, 3, 2, 1);
    const auto csv = dir / "pheno.csv";

    SUBCASE("well-formed file with NA handling") {
        write_text(csv,
                   "sample_id,label_t2d,label_cad,age,sex,pc1\n"
                   "S1,1,0,60,1,0.1\n"
                   "S2,NA,NA,50,0,0.2\n"
                   "S3,0,NA,NA,1,0.3\n"
                   "S4,0,1,40,0,-0.1\n"
                   "S9,1,1,30,0,0.0\n");
        PhenotypeLoadReport report;
        const auto loaded = load_phenotypes_covariates(cohort, csv, &report);
        REQUIRE(loaded.n_samples() == 2);
        CHECK(loaded.samples[0].id == "S1");
        CHECK(loaded.samples[1].id == "S4");
        CHECK(loaded.phenotypes.n_diseases() == 2);
        CHECK(loaded.phenotypes.label(1, 1) == 1);
        CHECK(loaded.covariates.age(1) == 40.0);
        CHECK(loaded.covariates.n_pcs() == 1);
        CHECK(report.unmatched_rows == 1);
        CHECK(report.missing_covariate_rows == 1);
        CHECK(report.unlabeled_samples == 1);
        CHECK(loaded.genotypes.n_samples() == 2);
    }
    SUBCASE("header mismatch") {
        write_text(csv, "id,label_t2d,age,sex\nS1,1,60,1\n");
        CHECK(error_code_of([&] { load_phenotypes_covariates(cohort, csv); }) == ErrorCode::HeaderMismatch);
        write_text(csv, "sample_id,label_t2d,sex,age\nS1,1,1,60\n");
        CHECK(error_code_of([&] { load_phenotypes_covariates(cohort, csv); }) == ErrorCode::HeaderMismatch);
    }
    SUBCASE("duplicate sample id") {
        write_text(csv, "sample_id,label_t2d,age,sex\nS1,1,60,1\nS1,0,60,1\n");
        CHECK(error_code_of([&] { load_phenotypes_covariates(cohort, csv); }) == ErrorCode::DuplicateSampleId);
    }
    SUBCASE("nothing labelled") {
        write_text(csv, "sample_id,label_t2d,age,sex\nS1,NA,60,1\nS2,NA,61,0\n");
        CHECK(error_code_of([&] { load_phenotypes_covariates(cohort, csv); }) == ErrorCode::NoLabeledSamples);
    }
    SUBCASE("write then load round-trips") {
        auto labelled = cohort;
        testing::add_labels(labelled, "t2d", {1, 0, -1, 1});
        labelled.covariates = CovariateTable(4, 2);
        for (std::size_t i = 0; i < 4; ++i) {
            labelled.covariates.age(i) = 40.0 + 0.1 * static_cast<double>(i) + 1.0 / 3.0;
            labelled.covariates.sex(i) = static_cast<double>(i % 2);
            labelled.covariates.pc(i, 1) = -0.7 / static_cast<double>(i + 1);
        }
        write_phenotypes_covariates(labelled, csv);
        const auto back = load_phenotypes_covariates(cohort, csv);
        REQUIRE(back.n_samples() == 3);
        CHECK(back.covariates.age(2) == labelled.covariates.age(3));
        CHECK(back.covariates.pc(1, 1) == labelled.covariates.pc(1, 1));
    }
}

TEST_CASE("stratified split keeps strata proportions and is seeded") {
    auto cohort = testing::simulated_cohort(100, 2, 3, 1);
    std::vector<std::int8_t> labels(100, 0);
    for (std::size_t i = 0; i < 30; ++i) {
        labels[i * 3] = 1;
    }
    labels[99] = kMissingLabel;
    testing::add_labels(cohort, "d", labels);
    const SplitSpec spec{0.8, 11, "d"};
    const auto a = split_cohort(cohort, spec);
    const auto b = split_cohort(cohort, spec);
    CHECK(a.train == b.train);
    CHECK(a.train.size() + a.test.size() == 100);
    std::set<std::size_t> seen(a.train.begin(), a.train.end());
    for (const auto t : a.test) {
        CHECK_FALSE(seen.contains(t));
    }
    CHECK(std::is_sorted(a.train.begin(), a.train.end()));
    const auto train_cases = std::count_if(a.train.begin(), a.train.end(), [&](auto i) { return labels[i] == 1; });
    CHECK(train_cases == 24);
    const auto other = split_cohort(cohort, SplitSpec{0.8, 12, "d"});
    CHECK(other.train != a.train);

    std::vector<std::int8_t> one_case(100, 0);
    one_case[0] = 1;
    auto sparse = testing::simulated_cohort(100, 2, 3, 1);
    testing::add_labels(sparse, "d", one_case);
    CHECK(error_code_of([&] { split_cohort(sparse, SplitSpec{0.8, 1, "d"}); }) == ErrorCode::StratumTooSmall);
}

TEST_CASE("covariate standardization") {
    auto cohort = testing::simulated_cohort(5, 2, 3, 1);
    cohort.covariates = CovariateTable(5, 1);
    for (std::size_t i = 0; i < 5; ++i) {
        cohort.covariates.age(i) = 50.0 + static_cast<double>(i);
        cohort.covariates.sex(i) = 1.0;
        cohort.covariates.pc(i, 0) = static_cast<double>(i * i);
    }
    const auto z = standardize_covariates(cohort);
    double mean = 0.0;
    double ss = 0.0;
    for (std::size_t i = 0; i < 5; ++i) {
        mean += z.covariates.age(i);
        ss += z.covariates.age(i) * z.covariates.age(i);
        CHECK(z.covariates.sex(i) == 0.0);
    }
    CHECK(mean == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(ss / 4.0 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(z.covariates.constant_columns()[1]);
    CHECK_FALSE(z.covariates.constant_columns()[0]);
}

TEST_CASE("rng streams are reproducible and roughly uniform") {
    Rng a(42);
    Rng b(42);
    for (int i = 0; i < 10; ++i) {
        CHECK(a.next_u64() == b.next_u64());
    }
    Rng c(derive_seed(42, "other"));
    CHECK(c.next_u64() != Rng(42).next_u64());
    Rng r(7);
    double sum = 0.0;
    double sq = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double z = r.normal();
        sum += z;
        sq += z * z;
    }
    CHECK(std::abs(sum / n) < 0.01);
    CHECK(std::abs(sq / n - 1.0) < 0.02);
    const auto idx = sample_without_replacement(r, 50, 10);
    CHECK(idx.size() == 10);
    CHECK(std::set<std::size_t>(idx.begin(), idx.end()).size() == 10);
}
