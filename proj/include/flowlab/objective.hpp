#pragma once

#include <functional>

#include "flowlab/data.hpp"
#include "flowlab/reparam.hpp"
#include "flowlab/schedule.hpp"
#include "flowlab/velocity_net.hpp"

namespace flowlab {

// One training batch: raw source draws, raw conditional target draws, class
// indices and times. Endpoint maps are applied downstream so their
// parameters stay differentiable.
struct TrainingBatch {
    Arr x0;
    Arr x1;
    Arr t;
    std::vector<int> y;

    Eigen::Index size() const { return x0.size(); }
    void validate() const;
};

// y uniform over classes, x0 ~ N(0,1), x1 ~ class mixture, t ~ U[0,1].
TrainingBatch sample_batch(Rng& rng, int size, const DataSpec& spec);

// Batched velocity field abstraction: the trained net and analytic fields
// plug into the same evaluation seams.
using VelocityFn =
    std::function<Arr(const Arr& z, const Arr& t, const std::vector<int>& y)>;

inline VelocityFn net_velocity(const VelocityNet& net) {
    return [&net](const Arr& z, const Arr& t, const std::vector<int>& y) {
        return net.forward(z, t, y);
    };
}

// Mean squared residual between the field and the path velocity over
// reparameterized endpoints.
double cfm_loss(const VelocityFn& v, const ReparamMaps& maps,
                const TrainingBatch& batch, const Schedule& schedule);

// Same, but with the mapped endpoints supplied directly (used to probe
// degenerate maps that the learnable parameterization cannot reach exactly).
double cfm_loss_endpoints(const VelocityFn& v, const Arr& z0, const Arr& z1,
                          const Arr& t, const std::vector<int>& y,
                          const Schedule& schedule);

// Loss plus exact reverse-mode gradients for every trainable parameter:
// the full network and all active shift/scale nets (the mapped endpoints
// depend on them through both the interpolant and the target velocity).
struct GradientBundle {
    double loss = 0.0;
    NamedArrays grads;
};

GradientBundle make_gradient_bundle(const VelocityNet& net, const ReparamMaps& maps);

struct LossWorkspace {
    NetForwardCache cache;
    ReparamMaps synced_maps;  // maps with the net's current class embeddings
    Mat d_class_embed;
    Arr alpha, beta, alpha_dot, beta_dot;
    Arr z0, z1, zt, u, residual;
};

void loss_and_grad(const VelocityNet& net, const ReparamMaps& maps,
                   const TrainingBatch& batch, const Schedule& schedule,
                   GradientBundle& out, LossWorkspace& ws);

}  // namespace flowlab
