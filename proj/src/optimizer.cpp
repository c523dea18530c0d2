#include "flowlab/optimizer.hpp"

#include <cmath>

namespace flowlab {

AdamWState AdamWState::init(const std::vector<ParamGroup>& groups) {
    AdamWState state;
    for (const ParamGroup& g : groups)
        for (const ParamRef& p : g.params) {
            state.first_moment.add(p.name, Arr::Zero(p.size));
            state.second_moment.add(p.name, Arr::Zero(p.size));
        }
    return state;
}

void adamw_step(AdamWState& state, std::vector<ParamGroup>& groups,
                const NamedArrays& grads, const AdamWConfig& cfg) {
    state.step_count += 1;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step_count));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step_count));

    for (ParamGroup& group : groups) {
        for (const ParamRef& p : group.params) {
            const Arr& g = grads.at(p.name);
            if (g.size() != p.size)
                throw ShapeError("adamw_step: gradient shape mismatch for " + p.name);
            if (!g.isFinite().all())
                throw OptimizerError("non-finite gradient in group '" + group.name +
                                     "' (parameter " + p.name + ")");
            Arr& m = state.first_moment.at(p.name);
            Arr& v = state.second_moment.at(p.name);
            m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
            v = cfg.beta2 * v + (1.0 - cfg.beta2) * g.square();
            auto param = p.map();
            param -= group.learning_rate * group.weight_decay * param;
            param -= group.learning_rate * (m / bc1) / ((v / bc2).sqrt() + cfg.epsilon);
            if (!param.isFinite().all())
                throw OptimizerError("non-finite parameter after update in group '" +
                                     group.name + "' (parameter " + p.name + ")");
        }
    }
}

}  // namespace flowlab
