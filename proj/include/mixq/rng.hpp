#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace mixq {

// std::mt19937_64 is fully specified by the standard; the std::*_distribution
// adaptors are not, so uniform/normal draws are generated explicitly here.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    // [0, 1), 53-bit resolution
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // inclusive range, rejection-sampled so every value is equally likely
    std::uint64_t uniform_u64(std::uint64_t bound); // [0, bound)

    int uniform_int(int lo, int hi) {
        return lo + static_cast<int>(uniform_u64(static_cast<std::uint64_t>(hi - lo) + 1));
    }

    // Box-Muller; the spare draw is cached so the stream stays cheap
    double normal();

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(uniform_u64(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 eng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

// splitmix64 finalizer; used to derive independent seeds
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

// FNV-1a over bytes; stable across platforms
std::uint64_t hash_bytes(std::string_view bytes);

} // namespace mixq
