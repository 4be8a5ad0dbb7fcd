// Deterministic, stream-splittable random number generation.
//
// Every sampler in the library is a pure function of (parameters, SeedStream).
// The generator is hand-rolled (xoshiro256++ seeded through splitmix64, with a
// polar-method Gaussian) so that sequences do not depend on the standard
// library implementation: the same (seed, stream_id) reproduces the same
// arrays bit-for-bit on any platform.

#pragma once

#include <cmath>
#include <complex>
#include <cstdint>

namespace gibbsflow {

struct SeedStream {
    std::uint64_t seed = 0;
    std::uint64_t stream_id = 0;

    SeedStream derive(std::uint64_t sub) const {
        // stream_id splitting for independent substreams
        return SeedStream{seed, stream_id * 0x100000001b3ULL + sub + 1};
    }
};

class Rng {
public:
    explicit Rng(SeedStream s) {
        std::uint64_t x = s.seed ^ (0x9e3779b97f4a7c15ULL * (s.stream_id + 1));
        for (auto& w : state_) {
            // splitmix64
            x += 0x9e3779b97f4a7c15ULL;
            std::uint64_t z = x;
            z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
            z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
            w = z ^ (z >> 31);
        }
    }

    std::uint64_t next_u64() {
        auto rotl = [](std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); };
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // uniform in (0,1)
    double uniform() {
        // 53-bit mantissa; offset by half an ulp so 0 is excluded
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    // standard normal, Marsaglia polar method
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        have_spare_ = true;
        return u * f;
    }

    // complex Gaussian with E|g|^2 = 1 (independent N(0,1/2) components)
    std::complex<double> complex_normal() {
        constexpr double half = 0.7071067811865476;  // 1/sqrt(2)
        const double re = normal();
        const double im = normal();
        return {half * re, half * im};
    }

private:
    std::uint64_t state_[4];
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace gibbsflow
