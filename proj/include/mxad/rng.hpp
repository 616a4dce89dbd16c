#pragma once

#include <cstdint>

namespace mxad {

// Small deterministic generator (splitmix64). We avoid the standard
// distributions because their output sequences are implementation-defined;
// every sampled value here is reproducible from the seed alone.
class Rng {
   public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n). n must be > 0.
    std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

    bool bernoulli(double p) { return uniform() < p; }

    // Derive an independent stream keyed by up to three indices. Used to give
    // each (snapshot, relation, edge) its own reproducible sampler.
    Rng fork(std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) const {
        std::uint64_t h = state_;
        for (std::uint64_t k : {a, b, c}) {
            h ^= k + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
            Rng mix(h);
            h = mix.next_u64();
        }
        return Rng(h);
    }

   private:
    std::uint64_t state_;
};

}  // namespace mxad
