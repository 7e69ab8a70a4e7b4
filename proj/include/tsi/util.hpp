#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace tsi {

// splitmix64: the seed-mixing primitive behind every deterministic draw in the
// toolkit. Scene i of a run with master seed S uses mix_seed(S, i), so results
// never depend on worker count or generation order.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t s = seed ^ (0x9E3779B97F4A7C15ULL * (index + 1));
    return splitmix64(s);
}

// Deterministic PRNG with fixed output across platforms and standard library
// versions (std::uniform_int_distribution is not portable, so we roll our own
// bounded draws).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() { return splitmix64(state_); }

    // [0, 1)
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // [0, n), n > 0. Fixed-point multiply; bias is < 2^-64 and acceptable here.
    std::uint64_t uniform_index(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    // [lo, hi] inclusive
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(
                        uniform_index(static_cast<std::uint64_t>(hi - lo + 1)));
    }

    bool bernoulli(double p) { return uniform() < p; }

    // Box-Muller, no caching so the draw count per call is fixed.
    double gauss(double sigma) {
        double u1 = uniform();
        double u2 = uniform();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        return sigma * std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

    // Zipf draw over ranks 1..n with exponent s, by CDF inversion.
    int zipf(int n, double s) {
        double total = 0.0;
        for (int k = 1; k <= n; ++k) total += std::pow(static_cast<double>(k), -s);
        double u = uniform() * total;
        double acc = 0.0;
        for (int k = 1; k <= n; ++k) {
            acc += std::pow(static_cast<double>(k), -s);
            if (u < acc) return k;
        }
        return n;
    }

    // Knuth product method; fine for the small lambdas used by the simulator.
    int poisson(double lambda) {
        if (lambda <= 0.0) return 0;
        double limit = std::exp(-lambda);
        double prod = uniform();
        int k = 0;
        while (prod > limit) {
            prod *= uniform();
            ++k;
        }
        return k;
    }

private:
    std::uint64_t state_;
};

// FNV-1a, used for provenance hashes in reports (content fingerprint, not crypto).
inline std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

std::string fnv1a64_hex(std::string_view data);

// --- UTF-8 ---------------------------------------------------------------

// Decodes UTF-8 to code points. Throws ParseError on malformed sequences.
std::vector<char32_t> utf8_decode(std::string_view text);
std::string utf8_encode(const std::vector<char32_t>& cps);
std::string utf8_encode_one(char32_t cp);

inline bool is_cjk_ideograph(char32_t cp) {
    return (cp >= 0x4E00 && cp <= 0x9FFF) || (cp >= 0x3400 && cp <= 0x4DBF) ||
           (cp >= 0xF900 && cp <= 0xFAFF);
}

// --- formatting ----------------------------------------------------------

// Fixed 6-decimal rendering used by the canonical serializers.
std::string format_fixed6(double v);
// Percentage with 2 decimals ("100.00").
std::string format_pct2(double fraction01);
// Rounds a coordinate to the 1e-6 px lattice the serializers can represent.
double quantize6(double v);

std::string trim(std::string_view s);

} // namespace tsi
