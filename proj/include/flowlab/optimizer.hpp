#pragma once

#include <string>
#include <vector>

#include "flowlab/types.hpp"

namespace flowlab {

struct AdamWConfig {
    double beta1 = 0.9;
    double beta2 = 0.95;
    double epsilon = 1e-8;
};

// A named set of parameters sharing one learning rate and weight decay.
// Every trainable parameter belongs to exactly one group.
struct ParamGroup {
    std::string name;
    double learning_rate = 0.0;
    double weight_decay = 0.0;
    std::vector<ParamRef> params;
};

struct AdamWState {
    NamedArrays first_moment;
    NamedArrays second_moment;
    long step_count = 0;

    static AdamWState init(const std::vector<ParamGroup>& groups);
};

// Decoupled-weight-decay Adam with bias-corrected moments; each group
// applies its own learning rate. Throws OptimizerError naming the group on
// non-finite gradients or parameters.
void adamw_step(AdamWState& state, std::vector<ParamGroup>& groups,
                const NamedArrays& grads, const AdamWConfig& cfg);

}  // namespace flowlab
