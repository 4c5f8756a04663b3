#include "mixq/quantconfig.hpp"

#include <stdexcept>

namespace mixq {

std::string QuantConfig::to_digits() const {
    std::string s;
    s.reserve(bits.size());
    for (std::uint8_t b : bits) s.push_back(b == 4 ? '4' : '8');
    return s;
}

QuantConfig QuantConfig::from_digits(const std::string& s) {
    QuantConfig q;
    q.bits.reserve(s.size());
    for (char c : s) {
        if (c == '4') {
            q.bits.push_back(4);
        } else if (c == '8') {
            q.bits.push_back(8);
        } else {
            throw std::invalid_argument("bad bit-width digit '" + std::string(1, c) +
                                        "' (expected 4 or 8)");
        }
    }
    return q;
}

std::vector<double> QuantConfig::encoding() const {
    std::vector<double> x(bits.size());
    for (std::size_t i = 0; i < bits.size(); ++i) x[i] = bits[i] == 8 ? 1.0 : 0.0;
    return x;
}

QuantConfig uniform_config(std::size_t layers, int bits) {
    if (bits != 4 && bits != 8) throw std::invalid_argument("uniform_config: bits must be 4 or 8");
    QuantConfig q;
    q.bits.assign(layers, static_cast<std::uint8_t>(bits));
    return q;
}

std::vector<QuantConfig> enumerate_configs(std::size_t layers) {
    if (layers > 20) throw std::invalid_argument("enumerate_configs: space too large");
    std::vector<QuantConfig> all;
    all.reserve(std::size_t{1} << layers);
    for (std::size_t mask = 0; mask < (std::size_t{1} << layers); ++mask) {
        QuantConfig q;
        q.bits.resize(layers);
        for (std::size_t i = 0; i < layers; ++i) {
            // bit 0 of mask is the last layer so enumeration is lexicographic
            q.bits[i] = (mask >> (layers - 1 - i)) & 1 ? 8 : 4;
        }
        all.push_back(std::move(q));
    }
    return all;
}

} // namespace mixq
