#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "flowlab/types.hpp"

namespace flowlab {

// splitmix64; used to derive independent substream seeds from (seed, index)
// pairs so that parallel/batched sampling is order-independent.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Deterministic RNG with a fully specified mapping from engine output to
// uniforms and normals (Box-Muller), so streams are reproducible bit for bit
// independent of the standard library's distribution internals.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

    // uniform on [0, 1)
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    int uniform_int(int n) {  // uniform on {0, .., n-1}
        return static_cast<int>(uniform() * n) % n;
    }

    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        // trig-form Box-Muller: exactly two uniforms per two normals
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log1p(-u1));
        const double theta = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    Arr normal_array(Eigen::Index n) {
        Arr out(n);
        for (Eigen::Index i = 0; i < n; ++i) out[i] = normal();
        return out;
    }

    std::string save_state() const {
        std::ostringstream ss;
        ss << engine_ << ' ' << (has_spare_ ? 1 : 0) << ' '
           << std::bit_cast<std::uint64_t>(spare_);
        return ss.str();
    }

    void load_state(const std::string& state) {
        std::istringstream ss(state);
        ss >> engine_;
        int flag = 0;
        std::uint64_t bits = 0;
        ss >> flag >> bits;
        if (ss.fail()) throw NumericError("Rng: malformed state string");
        has_spare_ = flag != 0;
        spare_ = std::bit_cast<double>(bits);
    }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace flowlab
