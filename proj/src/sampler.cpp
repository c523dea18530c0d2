#include "flowlab/sampler.hpp"

#include <cmath>

namespace flowlab {

void SamplerConfig::validate() const {
    if (steps < 1) throw std::domain_error("SamplerConfig: steps must be >= 1");
    if (mode == Mode::sde) {
        if (!sigma) throw std::domain_error("SamplerConfig: sde mode needs a sigma schedule");
        if (!(t_max > 0.0 && t_max <= 1.0 - 1e-9))
            throw std::domain_error("SamplerConfig: sde mode needs t_max in (0, 1)");
    }
}

double score_from_velocity(const Schedule& s, double z, double u, double mu0, double t) {
    const ScheduleValues v = eval_schedule(s, t);
    const double denom = v.beta * v.beta * v.alpha_dot - v.alpha * v.beta_dot * v.beta;
    if (std::abs(denom) < 1e-12 || std::abs(v.beta) < 1e-12)
        throw ScoreSingularityError("score_from_velocity: degenerate at t = " +
                                    std::to_string(t));
    return (v.alpha * u - v.alpha_dot * z) / denom + mu0 / v.beta;
}

double score_from_velocity_linear(double z, double u, double mu0, double t) {
    if (std::abs(1.0 - t) < 1e-12)
        throw ScoreSingularityError("score_from_velocity_linear: t too close to 1");
    return (t * u - z) / (1.0 - t) + mu0 / (1.0 - t);
}

double conditional_score(const Schedule& s, double z, double z1, double mu0, double t) {
    const ScheduleValues v = eval_schedule(s, t);
    if (std::abs(v.beta) < 1e-12)
        throw ScoreSingularityError("conditional_score: beta ~ 0");
    return (v.alpha * z1 + v.beta * mu0 - z) / (v.beta * v.beta);
}

double conditional_velocity(const Schedule& s, double z, double z1, double t) {
    const ScheduleValues v = eval_schedule(s, t);
    if (std::abs(v.beta) < 1e-12)
        throw ScoreSingularityError("conditional_velocity: beta ~ 0");
    return v.beta_dot * (z - v.alpha * z1) / v.beta + v.alpha_dot * z1;
}

namespace {

// Shared stepping core over a batch of states. One velocity evaluation per
// step; rngs[i] feeds trajectory i's Wiener increments.
void integrate(const VelocityFn& v, const ReparamMaps& maps, const Schedule& schedule,
               const std::vector<int>& y, const SamplerConfig& cfg, Arr& z,
               std::vector<Rng>& rngs, Mat& trajectory) {
    const Eigen::Index n = z.size();
    const int steps = cfg.steps;
    const double dt = 1.0 / steps;
    const bool sde = cfg.mode == SamplerConfig::Mode::sde;

    trajectory.resize(steps + 1, n);
    trajectory.row(0) = z.matrix().transpose();

    Arr t_vec(n);
    for (int k = 0; k < steps; ++k) {
        const double t = static_cast<double>(k) * dt;
        t_vec.setConstant(t);
        const Arr u = v(z, t_vec, y);
        if (sde && t < cfg.t_max) {
            const double sig = cfg.sigma(t);
            const double half_sig2 = 0.5 * sig * sig;
            const double noise_scale = sig * std::sqrt(dt);
            for (Eigen::Index i = 0; i < n; ++i) {
                const double score =
                    score_from_velocity(schedule, z[i], u[i], maps.mu0(y[i]), t);
                z[i] += dt * (u[i] + half_sig2 * score) + noise_scale * rngs[i].normal();
            }
        } else {
            z += dt * u;
        }
        if (!z.isFinite().all())
            throw NumericError("sampler: non-finite state at step " + std::to_string(k + 1));
        trajectory.row(k + 1) = z.matrix().transpose();
    }
}

}  // namespace

SamplePath sample_path(const VelocityFn& v, const ReparamMaps& maps,
                       const Schedule& schedule, int y, Rng& rng,
                       const SamplerConfig& cfg) {
    cfg.validate();
    Arr z(1);
    z[0] = maps.map_source(rng.normal(), y);
    std::vector<int> ys{y};
    std::vector<Rng> rngs{rng};
    Mat traj;
    integrate(v, maps, schedule, ys, cfg, z, rngs, traj);
    rng = rngs[0];  // hand the advanced stream back to the caller
    SamplePath out;
    out.x1 = maps.inverse_target(z[0], y);
    out.trajectory = traj.col(0);
    return out;
}

SampleBatch sample_paths_latent(const VelocityFn& v, const ReparamMaps& maps,
                                const Schedule& schedule, const std::vector<int>& y,
                                std::uint64_t seed, const SamplerConfig& cfg) {
    cfg.validate();
    const Eigen::Index n = static_cast<Eigen::Index>(y.size());
    Arr z(n);
    std::vector<Rng> rngs;
    rngs.reserve(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        rngs.emplace_back(mix_seed(seed, static_cast<std::uint64_t>(i)));
        z[i] = maps.map_source(rngs.back().normal(), y[i]);
    }
    SampleBatch out;
    integrate(v, maps, schedule, y, cfg, z, rngs, out.trajectories);
    out.x1 = z;
    return out;
}

SampleBatch sample_paths(const VelocityFn& v, const ReparamMaps& maps,
                         const Schedule& schedule, const std::vector<int>& y,
                         std::uint64_t seed, const SamplerConfig& cfg) {
    SampleBatch out = sample_paths_latent(v, maps, schedule, y, seed, cfg);
    out.x1 = maps.inverse_target(out.x1, y);
    return out;
}

}  // namespace flowlab
