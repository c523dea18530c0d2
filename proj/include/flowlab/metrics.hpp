#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "flowlab/data.hpp"
#include "flowlab/reparam.hpp"
#include "flowlab/sampler.hpp"

namespace flowlab {

// Exact empirical 1D Wasserstein-1 for equal-weight samples: sort both sets
// and average the absolute differences of order statistics.
double wasserstein1_1d(Arr a, Arr b);

struct MeanWithError {
    double mean = 0.0;
    double two_stderr = 0.0;
};

MeanWithError mean_with_error(const Arr& values);

// Integrated Euler path length per trajectory (column): sum_k |z_{k+1} - z_k|.
Arr trajectory_lengths(const Mat& trajectories);
// Net displacement |z_N - z_0| per trajectory.
Arr trajectory_displacements(const Mat& trajectories);

struct MetricsRecord {
    long step = 0;
    std::vector<double> w1_per_class;
    double w1_mean = 0.0;
    MeanWithError traj_len;
    double displacement_mean = 0.0;
    std::vector<double> mu0_per_class, mu1_per_class;
    std::vector<double> sigma0_per_class, sigma1_per_class;
    double loss_ema = std::numeric_limits<double>::quiet_NaN();
    double collapse_gap = std::numeric_limits<double>::quiet_NaN();
};

// Draw n_per_class samples per class with the ODE/SDE sampler, compare
// against fresh ground-truth draws, and record path statistics plus the
// current shifts/scales. For affine variants, also evaluates the collapse
// gap on an 8192-sample batch.
MetricsRecord eval_checkpoint(const VelocityNet& net, const ReparamMaps& maps,
                              const Schedule& schedule, const DataSpec& data,
                              const SamplerConfig& sampler_cfg, int n_per_class,
                              std::uint64_t seed);

}  // namespace flowlab
