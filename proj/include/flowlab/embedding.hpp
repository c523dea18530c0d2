#pragma once

#include <cmath>

#include "flowlab/types.hpp"

namespace flowlab {

// Sinusoidal feature map: dim/2 geometric frequencies, sine channels first,
// cosine channels second.
struct EmbeddingSpec {
    int dim = 8;              // must be even
    double freq_base = 1e4;   // geometric base for the frequency ladder

    void validate() const {
        if (dim <= 0 || dim % 2 != 0)
            throw std::domain_error("EmbeddingSpec: dim must be a positive even integer");
        if (!(freq_base > 0.0))
            throw std::domain_error("EmbeddingSpec: freq_base must be positive");
    }
};

// omega_k = freq_base^(-2k/dim), k = 0 .. dim/2-1
inline Arr sinusoidal_frequencies(const EmbeddingSpec& spec) {
    spec.validate();
    const int half = spec.dim / 2;
    Arr omega(half);
    for (int k = 0; k < half; ++k)
        omega[k] = std::pow(spec.freq_base, -2.0 * k / spec.dim);
    return omega;
}

// [sin(omega_0 x), .., sin(omega_{h-1} x), cos(omega_0 x), .., cos(omega_{h-1} x)]
inline Vec sinusoidal_embed(double x, const EmbeddingSpec& spec) {
    if (!std::isfinite(x))
        throw NumericError("sinusoidal_embed: non-finite input");
    const Arr omega = sinusoidal_frequencies(spec);
    const int half = spec.dim / 2;
    Vec out(spec.dim);
    for (int k = 0; k < half; ++k) {
        out[k] = std::sin(omega[k] * x);
        out[half + k] = std::cos(omega[k] * x);
    }
    return out;
}

// Batched variant with precomputed frequencies: rows are samples, the first
// half of the columns are sine channels. sin_out/cos_out hold the channel
// blocks separately so the backward pass can reuse them.
inline void sinusoidal_embed_batch(const Arr& x, const Arr& omega, Mat& sin_out,
                                   Mat& cos_out) {
    const Eigen::Index n = x.size(), half = omega.size();
    sin_out.resize(n, half);
    cos_out.resize(n, half);
    for (Eigen::Index k = 0; k < half; ++k) {
        sin_out.col(k) = (x * omega[k]).sin();
        cos_out.col(k) = (x * omega[k]).cos();
    }
}

}  // namespace flowlab
