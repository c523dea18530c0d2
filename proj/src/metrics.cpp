#include "flowlab/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "flowlab/collapse.hpp"

namespace flowlab {

double wasserstein1_1d(Arr a, Arr b) {
    if (a.size() == 0 || b.size() == 0)
        throw std::domain_error("wasserstein1_1d: empty sample set");
    if (a.size() != b.size())
        throw ShapeError("wasserstein1_1d: sample counts differ");
    std::sort(a.data(), a.data() + a.size());
    std::sort(b.data(), b.data() + b.size());
    return (a - b).abs().mean();
}

MeanWithError mean_with_error(const Arr& values) {
    MeanWithError out;
    const Eigen::Index n = values.size();
    if (n == 0) throw std::domain_error("mean_with_error: empty input");
    out.mean = values.mean();
    if (n > 1) {
        const double var = (values - out.mean).square().sum() / static_cast<double>(n - 1);
        out.two_stderr = 2.0 * std::sqrt(var / static_cast<double>(n));
    }
    return out;
}

Arr trajectory_lengths(const Mat& traj) {
    if (traj.rows() < 2)
        throw std::domain_error("trajectory_lengths: need at least 2 points per path");
    Arr out = Arr::Zero(traj.cols());
    for (Eigen::Index k = 0; k + 1 < traj.rows(); ++k)
        out += (traj.row(k + 1) - traj.row(k)).array().abs().transpose();
    return out;
}

Arr trajectory_displacements(const Mat& traj) {
    if (traj.rows() < 2)
        throw std::domain_error("trajectory_displacements: need at least 2 points per path");
    return (traj.row(traj.rows() - 1) - traj.row(0)).array().abs().transpose();
}

MetricsRecord eval_checkpoint(const VelocityNet& net, const ReparamMaps& maps_in,
                              const Schedule& schedule, const DataSpec& data,
                              const SamplerConfig& sampler_cfg, int n_per_class,
                              std::uint64_t seed) {
    if (n_per_class < 1) throw std::domain_error("eval_checkpoint: n_per_class >= 1");
    const int k = data.num_classes();
    const VelocityFn field = net_velocity(net);
    ReparamMaps maps = maps_in;
    maps.set_class_embeddings(net.class_embeddings());

    MetricsRecord rec;
    Arr all_lengths(static_cast<Eigen::Index>(k) * n_per_class);
    Arr all_disps(all_lengths.size());
    for (int c = 0; c < k; ++c) {
        const std::vector<int> y(n_per_class, c);
        const SampleBatch batch = sample_paths_latent(field, maps, schedule, y,
                                                      mix_seed(seed, 17 + c), sampler_cfg);
        // a collapsed target map cannot be inverted; record the path
        // diagnostics anyway and leave this class's W1 empty
        try {
            const Arr x1 = maps.inverse_target(batch.x1, y);
            Rng gt_rng(mix_seed(seed, 1000 + c));
            const Arr truth = sample_conditional_1d(data, c, n_per_class, gt_rng);
            rec.w1_per_class.push_back(wasserstein1_1d(x1, truth));
        } catch (const SingularMapError&) {
            rec.w1_per_class.push_back(std::numeric_limits<double>::quiet_NaN());
        }
        all_lengths.segment(static_cast<Eigen::Index>(c) * n_per_class, n_per_class) =
            trajectory_lengths(batch.trajectories);
        all_disps.segment(static_cast<Eigen::Index>(c) * n_per_class, n_per_class) =
            trajectory_displacements(batch.trajectories);
    }
    rec.w1_mean = 0.0;
    for (double w : rec.w1_per_class) rec.w1_mean += w;
    rec.w1_mean /= k;
    rec.traj_len = mean_with_error(all_lengths);
    rec.displacement_mean = all_disps.mean();

    for (int c = 0; c < k; ++c) {
        rec.mu0_per_class.push_back(maps.mu0(c));
        rec.mu1_per_class.push_back(maps.mu1(c));
        rec.sigma0_per_class.push_back(maps.sigma0(c));
        rec.sigma1_per_class.push_back(maps.sigma1(c));
    }

    if (maps.variant() == Variant::affine_source || maps.variant() == Variant::affine_target) {
        Rng gap_rng(mix_seed(seed, 2000));
        const TrainingBatch gap_batch = sample_batch(gap_rng, 32768, data);
        rec.collapse_gap = collapse_gap(field, maps, schedule, gap_batch);
    }
    return rec;
}

}  // namespace flowlab
