#include "gamr/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace gamr {

namespace {

constexpr uint64_t kSplitMixGamma = 0x9e3779b97f4a7c15ull;

uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += kSplitMixGamma);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

uint64_t fnv1a(std::string_view s) {
    uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

} // namespace

uint64_t mix_seed(uint64_t seed, uint64_t salt) {
    uint64_t s = seed ^ (salt + kSplitMixGamma + (seed << 6) + (seed >> 2));
    return splitmix64(s);
}

uint64_t mix_seed(uint64_t seed, std::string_view tag) {
    return mix_seed(seed, fnv1a(tag));
}

uint64_t stream_seed(uint64_t master, std::string_view tag, uint64_t a, uint64_t b) {
    uint64_t s = mix_seed(master, tag);
    s = mix_seed(s, a);
    s = mix_seed(s, b + 1);
    return s;
}

Rng::Rng(uint64_t seed) : state_(seed) {
    // Warm up so nearby seeds diverge immediately.
    splitmix64(state_);
}

uint64_t Rng::next_u64() {
    return splitmix64(state_);
}

double Rng::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform();
}

int64_t Rng::uniform_int(int64_t n) {
    if (n <= 0) throw std::invalid_argument("uniform_int: n must be positive");
    // Rejection sampling keeps the distribution exact.
    const uint64_t un = static_cast<uint64_t>(n);
    const uint64_t limit = UINT64_MAX - UINT64_MAX % un;
    uint64_t v;
    do {
        v = next_u64();
    } while (v >= limit);
    return static_cast<int64_t>(v % un);
}

double Rng::normal() {
    if (have_cached_normal_) {
        have_cached_normal_ = false;
        return cached_normal_;
    }
    double u1 = 0.0;
    do {
        u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    cached_normal_ = r * std::sin(theta);
    have_cached_normal_ = true;
    return r * std::cos(theta);
}

double Rng::normal(double mean, double stddev) {
    return mean + stddev * normal();
}

std::vector<int64_t> Rng::permutation(int64_t n) {
    std::vector<int64_t> idx(static_cast<std::size_t>(n));
    for (int64_t i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
    for (int64_t i = n - 1; i > 0; --i) {
        const int64_t j = uniform_int(i + 1);
        std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
    }
    return idx;
}

std::vector<int64_t> Rng::sample_without_replacement(int64_t n, int64_t k) {
    if (k > n) throw std::invalid_argument("sample_without_replacement: k > n");
    std::vector<int64_t> idx(static_cast<std::size_t>(n));
    for (int64_t i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
    for (int64_t i = 0; i < k; ++i) {
        const int64_t j = i + uniform_int(n - i);
        std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
    }
    idx.resize(static_cast<std::size_t>(k));
    std::sort(idx.begin(), idx.end());
    return idx;
}

} // namespace gamr
