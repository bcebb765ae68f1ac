#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace gwasdl {

/// SplitMix64 step; used for seeding and for deriving independent sub-seeds.
std::uint64_t splitmix64(std::uint64_t& state);

/// Mix a parent seed with a stream identifier into an independent child seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);
std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag);

/// xoshiro256** with platform-independent derived distributions. Nothing here
/// goes through <random> distributions, whose output is implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next_u64();

    /// Uniform on [0, 1) with 53 bits of precision.
    double uniform();
    double uniform(double low, double high);

    /// Unbiased integer in [0, bound).
    std::uint64_t uniform_index(std::uint64_t bound);

    /// Standard normal via the Marsaglia polar method.
    double normal();

    bool bernoulli(double p);

    template <typename T>
    void shuffle(std::vector<T>& values) {
        for (std::size_t i = values.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(uniform_index(i));
            std::swap(values[i - 1], values[j]);
        }
    }

private:
    std::array<std::uint64_t, 4> state_{};
    double spare_normal_ = 0.0;
    bool has_spare_ = false;
};

/// k distinct indices from [0, n), returned in ascending order.
std::vector<std::size_t> sample_without_replacement(Rng& rng, std::size_t n, std::size_t k);

}  // namespace gwasdl
