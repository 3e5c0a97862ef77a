#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace corrspec::rng {

// splitmix64: used both as a stream mixer (seed, item index) -> stream seed and as
// the generator itself. Fixed algorithm keeps results byte-identical across
// platforms and worker counts, which std::uniform_real_distribution would not.
struct Stream {
    std::uint64_t state;

    explicit Stream(std::uint64_t seed) : state(seed) {}

    std::uint64_t next_u64() {
        state += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // uniform in [0,1) with 53 random bits
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // strictly positive uniform, safe to feed into log()
    double next_unit_pos() {
        double u = next_unit();
        return u > 0.0 ? u : 0x1.0p-53;
    }

    double next_exponential() { return -std::log(next_unit_pos()); }

    // Dirichlet(1,...,1) = normalized i.i.d. exponentials
    std::vector<double> next_simplex(std::size_t k) {
        std::vector<double> v(k);
        double total = 0.0;
        for (auto& x : v) {
            x = next_exponential();
            total += x;
        }
        for (auto& x : v) x /= total;
        return v;
    }

    // integer in [0, n)
    std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }
};

// Independent per-item stream: mixing the item index through splitmix64 twice
// decorrelates neighboring items regardless of how work is split across threads.
inline Stream item_stream(std::uint64_t base_seed, std::uint64_t item) {
    Stream mixer(base_seed ^ (0x9e3779b97f4a7c15ULL + item * 0xd1342543de82ef95ULL));
    std::uint64_t s = mixer.next_u64();
    return Stream(s);
}

} // namespace corrspec::rng
