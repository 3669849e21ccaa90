#ifndef UWISE_RNG_HPP
#define UWISE_RNG_HPP

#include <cmath>
#include <cstdint>
#include <string_view>
#include <vector>

namespace uwise {

// Counter-based stream: output_i = mix(key, i). Streams derived from the same
// root seed with distinct names (or indices) are independent for practical
// purposes and bit-reproducible on every platform, which std::random
// distributions are not.
class RngStream {
public:
    explicit RngStream(std::uint64_t key) : key_(key) {}

    // Root stream from a user seed.
    static RngStream from_seed(std::uint64_t seed) { return RngStream(mix(seed, 0x9E3779B97F4A7C15ull)); }

    // Named substream (purpose-scoped: "subsets", "batch", ...).
    RngStream derive(std::string_view name) const {
        std::uint64_t h = 0xCBF29CE484222325ull;
        for (char c : name) {
            h ^= static_cast<unsigned char>(c);
            h *= 0x100000001B3ull;
        }
        return RngStream(mix(key_, h));
    }

    // Indexed substream (per replicate / per cell), independent of call order.
    RngStream derive(std::uint64_t index) const { return RngStream(mix(key_, index + 1)); }

    std::uint64_t next_u64() {
        ++counter_;
        return mix(key_, counter_);
    }

    // Uniform in [0, 1) with 53 random bits.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, bound), bound >= 1, rejection-sampled (unbiased).
    std::uint64_t next_below(std::uint64_t bound) {
        const std::uint64_t threshold = (0ull - bound) % bound;
        for (;;) {
            std::uint64_t x = next_u64();
            if (x >= threshold) return x % bound;
        }
    }

    // Standard normal via Box-Muller (second value cached).
    double next_normal() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        double u1 = 0.0;
        do { u1 = next_double(); } while (u1 <= 0.0);
        const double u2 = next_double();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double two_pi = 6.283185307179586476925286766559;
        cached_ = r * std::sin(two_pi * u2);
        have_cached_ = true;
        return r * std::cos(two_pi * u2);
    }

    // Partial Fisher-Yates: k distinct values from {0, ..., n-1}, unsorted.
    std::vector<int> sample_without_replacement(int n, int k) {
        std::vector<int> pool(n);
        for (int i = 0; i < n; ++i) pool[i] = i;
        std::vector<int> out(k);
        for (int i = 0; i < k; ++i) {
            const int j = i + static_cast<int>(next_below(static_cast<std::uint64_t>(n - i)));
            std::swap(pool[i], pool[j]);
            out[i] = pool[i];
        }
        return out;
    }

    // Unbiased in-place shuffle.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(next_below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    // Two rounds of the splitmix64 finalizer over key ^ (golden-ratio * ctr).
    static std::uint64_t mix(std::uint64_t key, std::uint64_t ctr) {
        std::uint64_t z = key ^ (ctr * 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        z ^= z >> 31;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    double cached_ = 0.0;
    bool have_cached_ = false;
};

}  // namespace uwise

#endif
