#ifndef RULEFUSE_RNG_HPP
#define RULEFUSE_RNG_HPP

#include <cstdint>
#include <random>
#include <algorithm>
#include <vector>

namespace rulefuse {

// Deterministic RNG wrapper. mt19937_64 output is pinned by the standard;
// the bounded/real mappings below are ours, so identical seeds give identical
// streams on every platform. std::uniform_int_distribution is avoided on
// purpose (its mapping is implementation-defined).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next() { return gen_(); }

    // Uniform integer in [0, n). n must be > 0.
    std::uint64_t bounded(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next()) * n) >> 64);
    }

    // Uniform double in [0, 1) with 53 random bits.
    double real() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Deterministic Fisher-Yates.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(bounded(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    // First k elements of a shuffled copy of [0, n).
    std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k) {
        std::vector<std::size_t> idx(n);
        for (std::size_t i = 0; i < n; ++i) idx[i] = i;
        shuffle(idx);
        idx.resize(std::min(k, n));
        return idx;
    }

private:
    std::mt19937_64 gen_;
};

}  // namespace rulefuse

#endif
