#pragma once

#include <cstdint>
#include <functional>

#include "flowlab/objective.hpp"
#include "flowlab/reparam.hpp"
#include "flowlab/schedule.hpp"

namespace flowlab {

struct SamplerConfig {
    int steps = 50;
    enum class Mode { ode, sde } mode = Mode::ode;
    std::function<double(double)> sigma;  // diffusion schedule; unused in ode mode
    double t_max = 1.0 - 1e-3;            // stochastic terms gate for sde mode

    void validate() const;
};

// Marginal score expressed through the velocity field and the source-shift:
//   s = (alpha u - alpha_dot z) / (beta^2 alpha_dot - alpha beta_dot beta) + mu0 / beta
// Throws ScoreSingularityError when the denominator degenerates (t -> 1).
double score_from_velocity(const Schedule& s, double z, double u, double mu0, double t);

// Closed form of the same expression under the linear schedule.
double score_from_velocity_linear(double z, double u, double mu0, double t);

// Conditional (single fixed target z1) closed forms on a Gaussian path with
// a shifted source; used to cross-check the marginal coupling.
double conditional_score(const Schedule& s, double z, double z1, double mu0, double t);
double conditional_velocity(const Schedule& s, double z, double z1, double t);

struct SamplePath {
    double x1 = 0.0;  // data-space sample after the inverse target map
    Vec trajectory;   // latent state at every integrator node (steps + 1)
};

// Integrates one trajectory: draws x0 ~ N(0,1) from rng, applies the source
// map, then Euler (ode) or Euler-Maruyama (sde) with step 1/steps. In sde
// mode the score/noise terms are applied only while t < t_max; the
// remaining steps advance deterministically on the drift.
SamplePath sample_path(const VelocityFn& v, const ReparamMaps& maps,
                       const Schedule& schedule, int y, Rng& rng,
                       const SamplerConfig& cfg);

struct SampleBatch {
    Arr x1;            // n
    Mat trajectories;  // (steps + 1) x n
};

// Batched integration; trajectory i draws from an independent substream
// derived from (seed, i), so results do not depend on batch decomposition.
SampleBatch sample_paths(const VelocityFn& v, const ReparamMaps& maps,
                         const Schedule& schedule, const std::vector<int>& y,
                         std::uint64_t seed, const SamplerConfig& cfg);

// Same integration without the final inverse target map; the evaluation
// harness uses this to keep recording path diagnostics after a target map
// has collapsed (where the inverse rightly refuses to evaluate).
SampleBatch sample_paths_latent(const VelocityFn& v, const ReparamMaps& maps,
                                const Schedule& schedule, const std::vector<int>& y,
                                std::uint64_t seed, const SamplerConfig& cfg);

inline SamplerConfig ode_sampler(int steps = 50) {
    SamplerConfig cfg;
    cfg.steps = steps;
    cfg.mode = SamplerConfig::Mode::ode;
    return cfg;
}

inline SamplerConfig sde_sampler(int steps, std::function<double(double)> sigma,
                                 double t_max = 1.0 - 1e-3) {
    SamplerConfig cfg;
    cfg.steps = steps;
    cfg.mode = SamplerConfig::Mode::sde;
    cfg.sigma = std::move(sigma);
    cfg.t_max = t_max;
    return cfg;
}

}  // namespace flowlab
