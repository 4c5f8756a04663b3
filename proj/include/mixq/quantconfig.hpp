#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <vector>

namespace mixq {

// Per-layer bit-width vector q = [q_1..q_L]; the search variable. Each entry
// is 4 or 8. Lexicographic order on the digits matches lexicographic order on
// the 0/1 encoding (4 before 8).
struct QuantConfig {
    std::vector<std::uint8_t> bits;

    std::size_t size() const { return bits.size(); }

    std::string to_digits() const;                        // e.g. "4848"
    static QuantConfig from_digits(const std::string& s); // throws on bad digits

    // 0 -> 4-bit, 1 -> 8-bit; the GP input space
    std::vector<double> encoding() const;

    friend bool operator==(const QuantConfig&, const QuantConfig&) = default;
    friend auto operator<=>(const QuantConfig&, const QuantConfig&) = default;
};

QuantConfig uniform_config(std::size_t layers, int bits);

// all 2^L configs in lexicographic order; guarded against large L
std::vector<QuantConfig> enumerate_configs(std::size_t layers);

} // namespace mixq
