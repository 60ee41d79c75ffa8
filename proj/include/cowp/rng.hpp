#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace cowp {

/// Deterministic random stream. Wraps std::mt19937_64 (whose sequence is
/// pinned by the standard) and supplies its own bounded-draw routines so
/// results do not depend on the standard library's distribution
/// implementations.
class Rng {
public:
    explicit Rng(uint64_t seed) : engine_(seed) {}

    uint64_t next_u64() { return engine_(); }

    /// Uniform integer in [0, n). Rejection sampling, bias-free.
    uint64_t below(uint64_t n) {
        if (n == 0) return 0;
        const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

    /// Uniform double in [0, 1) with 53 bits of precision.
    double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return unit() < p; }

    /// Sample k distinct indices from [0, n), returned in ascending order.
    std::vector<size_t> sample_indices(size_t n, size_t k) {
        std::vector<size_t> pool(n);
        for (size_t i = 0; i < n; ++i) pool[i] = i;
        if (k > n) k = n;
        for (size_t i = 0; i < k; ++i) {
            size_t j = i + static_cast<size_t>(below(n - i));
            std::swap(pool[i], pool[j]);
        }
        pool.resize(k);
        std::sort(pool.begin(), pool.end());
        return pool;
    }

private:
    std::mt19937_64 engine_;
};

/// Derive an independent child seed from (master, stream, index).
/// SplitMix64 finalizer over the mixed words.
inline uint64_t derive_seed(uint64_t master, uint64_t stream, uint64_t index) {
    uint64_t z = master + 0x9e3779b97f4a7c15ULL * (stream + 1) +
                 0xbf58476d1ce4e5b9ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace cowp
