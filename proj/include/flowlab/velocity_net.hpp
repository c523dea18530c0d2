#pragma once

#include <vector>

#include "flowlab/embedding.hpp"
#include "flowlab/rng.hpp"
#include "flowlab/types.hpp"

namespace flowlab {

// Architecture of the velocity field network. The three scalar inputs
// (latent state, class label value, time) are each lifted to sin_dim
// sinusoidal features and projected by a trainable linear layer to
// embed_dim, concatenated, and passed through GELU hidden layers to a
// scalar output. The default configuration has 1,993 trainable scalars.
struct NetConfig {
    int sin_dim = 6;
    int embed_dim = 8;
    std::vector<int> hidden = {24, 24, 24};
    double freq_base = 1e4;
    std::vector<double> label_values = {-1.0, 1.0};

    void validate() const;
    long param_count() const;
};

class VelocityNet {
public:
    VelocityNet() = default;

    // Seeded uniform fan-in init: weights and biases ~ U(-1/sqrt(fan_in), +).
    static VelocityNet init(const NetConfig& cfg, Rng& rng);
    // All parameter arrays zero (useful as an analytic fixture: output is 0).
    static VelocityNet zeros(const NetConfig& cfg);

    const NetConfig& config() const { return cfg_; }
    long param_count() const;

    // Mutable views over every parameter array, in a fixed documented order.
    std::vector<ParamRef> param_refs();
    std::vector<ParamRef> param_refs() const;  // views are still mutable maps

    bool all_finite() const;

    // Batched evaluation: v(z_i, t_i, y_i) for each row. y entries must be
    // valid class indices into cfg.label_values.
    Arr forward(const Arr& z, const Arr& t, const std::vector<int>& y) const;
    double forward1(double z, double t, int y) const;

    // Trained class embedding per class (rows), embed_dim wide. The
    // shift/scale heads read the same embedding the backbone consumes.
    Mat class_embeddings() const;

    // Raw parameter access used by the backward pass and tests.
    Mat w_embed[3];  // order: z, y, t; each (embed_dim x sin_dim)
    Vec b_embed[3];
    std::vector<Mat> w_hidden;  // (H_l x H_{l-1})
    std::vector<Vec> b_hidden;
    Mat w_out;  // (1 x H_last)
    Vec b_out;  // (1)

    Arr omega;           // sinusoidal frequency ladder
    Mat class_features;  // (K x sin_dim) cached sinusoidal features per class

    void rebuild_caches();  // recompute omega/class_features after edits

private:
    NetConfig cfg_;
};

// Intermediate state of one batched forward pass, kept for the backward
// pass. Buffers are reused across steps.
struct NetForwardCache {
    Mat sin_z, cos_z;        // (B x sin_dim/2)
    Mat sin_t, cos_t;
    Mat feat_z, feat_t;      // (B x sin_dim) assembled sinusoidal features
    Mat feat_y;              // gathered class features
    Mat h0;                  // (B x 3*embed_dim)
    std::vector<Mat> pre;    // hidden preactivations
    std::vector<Mat> phi;    // standard normal CDF of preactivations
    std::vector<Mat> act;    // hidden activations
    Arr v;                   // outputs
};

// Forward pass that records everything backward needs.
void net_forward_cached(const VelocityNet& net, const Arr& z, const Arr& t,
                        const std::vector<int>& y, NetForwardCache& cache);

// Reverse pass. d_v is dLoss/d v per sample. Weight gradients are
// accumulated into `grads` (entries must exist and be zero-initialized,
// flat in the same layout as param_refs). Returns dLoss/dz per sample.
Arr net_backward(const VelocityNet& net, const NetForwardCache& cache, const Arr& d_v,
                 NamedArrays& grads);

// A zeroed gradient container matching the net's parameters.
NamedArrays zero_grads_like(const VelocityNet& net);

// Exact GELU and its derivative.
inline double gelu(double x) {
    return 0.5 * x * (1.0 + std::erf(x * 0.7071067811865475244)); // 1/sqrt(2)
}
inline double gelu_derivative(double x) {
    const double phi_cdf = 0.5 * (1.0 + std::erf(x * 0.7071067811865475244));
    const double pdf = std::exp(-0.5 * x * x) * 0.3989422804014326779; // 1/sqrt(2 pi)
    return phi_cdf + x * pdf;
}

}  // namespace flowlab
