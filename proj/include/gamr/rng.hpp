#ifndef GAMR_RNG_HPP
#define GAMR_RNG_HPP

#include <cstdint>
#include <string_view>
#include <vector>

namespace gamr {

// All randomness in the simulator flows through named streams derived from a
// master seed. Derivation and sampling are hand-rolled (splitmix64 +
// xoshiro-style mixing through std draws would be library-dependent) so
// that the same seed produces the same bytes on any platform.

uint64_t mix_seed(uint64_t seed, uint64_t salt);
uint64_t mix_seed(uint64_t seed, std::string_view tag);

// Convenience: derive a stream seed from (master, tag, a, b).
uint64_t stream_seed(uint64_t master, std::string_view tag, uint64_t a = 0, uint64_t b = 0);

class Rng {
public:
    explicit Rng(uint64_t seed);

    uint64_t next_u64();
    // Uniform in [0, 1) with 53 bits of resolution.
    double uniform();
    double uniform(double lo, double hi);
    // Uniform integer in [0, n).
    int64_t uniform_int(int64_t n);
    // Standard normal via Box-Muller (pairs cached).
    double normal();
    double normal(double mean, double stddev);

    // Fisher-Yates shuffle of indices 0..n-1.
    std::vector<int64_t> permutation(int64_t n);
    // k distinct values from 0..n-1 (partial Fisher-Yates), sorted ascending.
    std::vector<int64_t> sample_without_replacement(int64_t n, int64_t k);

private:
    uint64_t state_;
    bool have_cached_normal_ = false;
    double cached_normal_ = 0.0;
};

} // namespace gamr

#endif
