#pragma once

#include <optional>
#include <string>
#include <vector>

#include "flowlab/schedule.hpp"
#include "flowlab/types.hpp"

namespace flowlab {

// Which endpoint maps are learned. Shift variants translate only; affine
// variants add a learned positive scale and exist to study the collapse
// failure modes of unrestricted maps.
enum class Variant {
    baseline,       // both maps identity
    source_only,    // z0 = x0 + mu0(y)
    target_only,    // z1 = x1 + mu1(y)
    joint,          // both shifts
    affine_source,  // z0 = sigma0(y) x0 + mu0(y)
    affine_target,  // z1 = sigma1(y) x1 + mu1(y)
};

Variant variant_from_string(const std::string& name);
std::string to_string(Variant v);

// Single linear head on the class embedding, zero-initialized so the map
// starts as the identity. With conditional=false the embedding weights are
// dropped and only the global bias trains.
struct CondLinear {
    Vec w;
    double b = 0.0;
    bool conditional = true;

    static CondLinear zeros(int embed_dim, bool conditional = true) {
        CondLinear n;
        n.conditional = conditional;
        n.w = conditional ? Vec::Zero(embed_dim) : Vec();
        return n;
    }
    double value(const Vec& features) const {
        return conditional ? w.dot(features) + b : b;
    }
};

// Learnable source/target maps. The conditional nets read the backbone's
// class embedding (synced into a local cache via set_class_embeddings), so
// any class separation the network learns is immediately available to the
// much faster shift/scale heads.
class ReparamMaps {
public:
    static ReparamMaps init(Variant v, int embed_dim, int num_classes,
                            bool conditional_source_shift = true);

    // Refresh the cached per-class embeddings (rows: classes).
    void set_class_embeddings(const Mat& embeddings);

    Variant variant() const { return variant_; }
    int num_classes() const { return static_cast<int>(class_embed_.rows()); }

    bool has_mu0() const { return mu0_.has_value(); }
    bool has_mu1() const { return mu1_.has_value(); }
    bool has_scale0() const { return log_s0_.has_value(); }
    bool has_scale1() const { return log_s1_.has_value(); }

    // Effective map coefficients per class; identity values when inactive.
    double mu0(int y) const;
    double mu1(int y) const;
    double sigma0(int y) const;
    double sigma1(int y) const;

    double map_source(double x0, int y) const { return sigma0(y) * x0 + mu0(y); }
    double map_target(double x1, int y) const { return sigma1(y) * x1 + mu1(y); }
    Arr map_source(const Arr& x0, const std::vector<int>& y) const;
    Arr map_target(const Arr& x1, const std::vector<int>& y) const;

    // x1 = (z1 - mu1(y)) / sigma1(y). Throws SingularMapError when sigma1
    // has collapsed below the singular tolerance.
    double inverse_target(double z1, int y) const;
    Arr inverse_target(const Arr& z1, const std::vector<int>& y) const;

    static constexpr double kSingularTolerance = 1e-6;

    // Gradient accumulation for one batch: d_z0/d_z1 are dLoss per sample
    // w.r.t. the mapped endpoints, x0/x1 the raw samples. Adds the chain
    // contributions for every active net into `grads`. When d_class_embed
    // is non-null it receives dLoss w.r.t. the per-class embedding rows
    // (the caller backpropagates those into the embedding parameters).
    void accumulate_grads(const Arr& d_z0, const Arr& d_z1, const Arr& x0,
                          const Arr& x1, const std::vector<int>& y,
                          NamedArrays& grads, Mat* d_class_embed = nullptr) const;

    NamedArrays zero_grads() const;

    // Parameter views keyed by optimizer group name:
    // source_shift -> mu0, target_shift -> mu1,
    // source_scale -> log sigma0, target_scale -> log sigma1.
    std::vector<std::pair<std::string, std::vector<ParamRef>>> param_groups();

    const Vec class_embedding(int y) const { return class_embed_.row(y).transpose(); }

    CondLinear* mu0_net() { return mu0_ ? &*mu0_ : nullptr; }
    CondLinear* mu1_net() { return mu1_ ? &*mu1_ : nullptr; }
    CondLinear* log_s0_net() { return log_s0_ ? &*log_s0_ : nullptr; }
    CondLinear* log_s1_net() { return log_s1_ ? &*log_s1_ : nullptr; }

private:
    Variant variant_ = Variant::baseline;
    std::optional<CondLinear> mu0_, mu1_, log_s0_, log_s1_;
    Mat class_embed_;  // (K x embed dim)
};

// Claim-2 style check: is shifting the source by mu0 path-equivalent to
// shifting the target by mu1? True iff beta_t mu0 == alpha_t mu1 on every
// grid point (which forces mu0 = mu1 = 0 for valid schedules).
struct ShiftEquivalenceResult {
    bool equivalent;
    Arr residuals;
};

ShiftEquivalenceResult check_shift_equivalence(double mu0, double mu1,
                                               const Schedule& schedule,
                                               const Arr& t_grid);

}  // namespace flowlab
