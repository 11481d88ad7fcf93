#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace udemd {

/// Sample from the symmetric Dirichlet(concentration) distribution on the
/// (n-1)-simplex via normalized Gamma draws.
inline std::vector<double> sample_dirichlet(std::size_t n, double concentration, std::mt19937_64& rng) {
    std::gamma_distribution<double> gamma(concentration, 1.0);
    std::vector<double> x(n);
    double total = 0.0;
    do {
        total = 0.0;
        for (auto& v : x) {
            v = gamma(rng);
            total += v;
        }
    } while (total <= 0.0);
    for (auto& v : x) v /= total;
    return x;
}

/// Derives an independent stream seed from a base seed and an index.
inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t index) {
    std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace udemd
