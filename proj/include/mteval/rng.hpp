#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace mteval {

constexpr std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ULL;
    }
    return h;
}

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// One run seed fans out to per-stage seeds through stable labels, so a single
// number reproduces an entire run regardless of stage iteration order.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::string_view label) {
    return splitmix64(base ^ splitmix64(fnv1a64(label)));
}

// mt19937_64 is fully specified by the standard; the bounded draw and shuffle
// below avoid std::uniform_int_distribution / std::shuffle, whose outputs are
// implementation-defined. Identical seeds give identical bytes on any platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next() { return eng_(); }

    // Uniform in [0, n) via rejection sampling.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v;
        do {
            v = eng_();
        } while (v >= limit);
        return v % n;
    }

    // Uniform in [0, 1) with 53 bits.
    double unit() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[below(i)]);
        }
    }

private:
    std::mt19937_64 eng_;
};

} // namespace mteval
