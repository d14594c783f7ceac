#pragma once

// Deterministic random helpers. std::mt19937 output is fully specified by the
// standard, but the std distributions are not, so uniform/gaussian draws are
// built here from raw engine words to keep results identical across
// platforms and standard libraries.

#include <cmath>
#include <cstdint>
#include <random>

namespace nadpcm::detail {

class Rng {
  public:
    explicit Rng(std::uint32_t seed) : gen_(seed) {}
    Rng(std::uint32_t seed_a, std::uint32_t seed_b) {
        std::seed_seq seq{seed_a, seed_b};
        gen_.seed(seq);
    }

    // Uniform in [0, 1) with 53 random bits.
    double uniform() {
        const std::uint64_t hi = gen_() >> 5;   // 27 bits
        const std::uint64_t lo = gen_() >> 6;   // 26 bits
        return (hi * 67108864.0 + lo) * (1.0 / 9007199254740992.0);
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Marsaglia polar method with a cached spare.
    double gauss() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = uniform(-1.0, 1.0);
            v = uniform(-1.0, 1.0);
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double m = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * m;
        has_spare_ = true;
        return u * m;
    }

    std::uint32_t next_u32() { return gen_(); }

  private:
    std::mt19937 gen_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

// splitmix64-style mix for deriving independent stream seeds.
inline std::uint32_t mix_seed(std::uint32_t base, std::uint32_t salt) {
    std::uint64_t z = (static_cast<std::uint64_t>(base) << 32) | salt;
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return static_cast<std::uint32_t>(z & 0xffffffffULL);
}

}  // namespace nadpcm::detail
