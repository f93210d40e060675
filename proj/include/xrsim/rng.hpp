#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace xrsim {

/// SplitMix64 finalizer. Used for every seed derivation so that derived
/// streams are identical on all platforms.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Folds `parts` into `base`. Order of parts matters; order of calls does not.
constexpr std::uint64_t derive_seed(std::uint64_t base,
                                    std::initializer_list<std::uint64_t> parts) noexcept {
    std::uint64_t h = splitmix64(base);
    for (std::uint64_t p : parts) {
        h = splitmix64(h ^ splitmix64(p + 0x632be59bd9b4e019ULL));
    }
    return h;
}

// Stream tags for derive_seed.
enum class SeedTag : std::uint64_t {
    kPosition = 1,
    kShadowing = 2,
    kTraffic = 3,
    kTransportBlock = 4,
    kSweepPoint = 5,
};

constexpr std::uint64_t tag(SeedTag t) noexcept { return static_cast<std::uint64_t>(t); }

/// mt19937_64 with hand-rolled real conversions. The standard distributions
/// are implementation-defined, so they are not used.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Standard normal, Marsaglia polar method.
    double normal();

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace xrsim
