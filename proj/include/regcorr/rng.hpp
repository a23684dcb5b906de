#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace regcorr {

// Deterministic pseudo-random generator (splitmix64). Hand-rolled so that
// streams are bit-identical across platforms and standard libraries; all
// randomness in the project flows through this type, keyed by one master
// seed and named sub-streams.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ull;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1), 53-bit resolution.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    // Unbiased uniform integer in [0, n). n must be > 0.
    std::uint64_t uniform_int(std::uint64_t n) {
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n + 1) % n;
        std::uint64_t x = next_u64();
        while (x > limit) x = next_u64();
        return x % n;
    }

    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(uniform_int(i));
            std::swap(items[i - 1], items[j]);
        }
    }

    // Independent sub-stream derived from the *construction* seed and a
    // name, so derivation order does not matter.
    Rng derive(std::string_view stream) const {
        std::uint64_t h = 0xCBF29CE484222325ull;  // FNV-1a
        for (char c : stream) {
            h ^= static_cast<unsigned char>(c);
            h *= 0x100000001B3ull;
        }
        Rng mixer(seed_ ^ h);
        mixer.next_u64();
        return Rng(mixer.next_u64());
    }

    Rng derive(std::string_view stream, std::uint64_t index) const {
        Rng base = derive(stream);
        Rng mixer(base.seed_ + 0x9E3779B97F4A7C15ull * (index + 1));
        return Rng(mixer.next_u64());
    }

    std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t seed_;
    std::uint64_t state_;
};

}  // namespace regcorr
