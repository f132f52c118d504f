#ifndef QCKM_RNG_HPP
#define QCKM_RNG_HPP

// Deterministic named random streams.
//
// Every stochastic component draws from its own stream, derived from
// (seed, label, salt...) by key mixing. Streams are therefore independent
// of evaluation order and of each other, which is what makes whole-run
// reproducibility and ablation comparisons at fixed seeds work.
// std::mt19937_64 output is pinned by the standard; the distribution
// transforms are written out here because std::*_distribution is not.

#include <cmath>
#include <cstdint>
#include <random>

namespace qckm {

struct RngSpec {
    std::uint64_t seed = 0;
};

enum class StreamLabel : std::uint64_t {
    frequencies = 1,
    subsampling = 2,
    shots = 3,
    jitter = 4,
    seeding = 5,
    synthesis = 6,
};

namespace detail {

inline constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

inline constexpr std::uint64_t stream_key(std::uint64_t seed, std::uint64_t label,
                                          std::uint64_t a, std::uint64_t b,
                                          std::uint64_t c) {
    std::uint64_t k = mix64(seed);
    k = mix64(k ^ mix64(label));
    k = mix64(k ^ mix64(a));
    k = mix64(k ^ mix64(b));
    k = mix64(k ^ mix64(c));
    return k;
}

} // namespace detail

// Keys carried alongside RngSpec so nested estimators (per iteration, per
// group) derive disjoint streams no matter what order they run in.
struct StreamContext {
    RngSpec rng;
    std::uint64_t salt = 0;      // outer-iteration tag
    std::uint64_t group_tag = 0; // 0 = whole dataset, g+1 = cluster g
};

class RngStream {
  public:
    RngStream(RngSpec spec, StreamLabel label, std::uint64_t a = 0,
              std::uint64_t b = 0, std::uint64_t c = 0)
        : gen_(detail::stream_key(spec.seed, static_cast<std::uint64_t>(label), a, b, c)) {}

    RngStream(const StreamContext& ctx, StreamLabel label, std::uint64_t c = 0)
        : RngStream(ctx.rng, label, ctx.salt, ctx.group_tag, c) {}

    std::uint64_t next_u64() { return gen_(); }

    // uniform in [0, 1), 53-bit resolution
    double uniform() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    // standard normal via Box-Muller, second value cached
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = static_cast<double>((gen_() >> 11) + 1) * 0x1.0p-53; // (0, 1]
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double t = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(t);
        have_spare_ = true;
        return r * std::cos(t);
    }

    // uniform index in [0, n)
    std::size_t index(std::size_t n) {
        std::size_t i = static_cast<std::size_t>(uniform() * static_cast<double>(n));
        return i < n ? i : n - 1;
    }

    bool bernoulli(double p) { return uniform() < p; }

  private:
    std::mt19937_64 gen_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

} // namespace qckm

#endif
