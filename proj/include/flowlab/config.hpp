#pragma once

#include <map>
#include <string>
#include <vector>

#include "flowlab/data.hpp"
#include "flowlab/optimizer.hpp"
#include "flowlab/velocity_net.hpp"

namespace flowlab {

// Full description of one training run. Defaults are the reference bench
// settings: batch 1024, 50k steps, AdamW(0.9, 0.95), group learning rates
// 1e-3 / 1e-4 / 1e-5 (source shift / target shift / backbone), linear
// schedule and a 50-step deterministic Euler sampler.
struct ExperimentConfig {
    // run
    std::string variant = "baseline";
    std::uint64_t seed = 0;
    long total_steps = 50000;
    int batch_size = 1024;
    long eval_every = 1000;
    int eval_samples = 10000;
    std::string out_dir;
    bool source_shift_conditional = true;

    // schedule
    std::string schedule_name = "linear";

    // network
    NetConfig net;

    // optimizer
    AdamWConfig adam;
    double lr_backbone = 1e-5;
    double lr_source_shift = 1e-3;
    double lr_target_shift = 1e-4;
    double lr_source_scale = 1e-2;
    double lr_target_scale = 1e-2;
    double weight_decay = 0.0;

    // data (single-component 1D classes; programmatic specs cover the rest)
    std::vector<double> class_means = {-1.5, 1.5};
    std::vector<double> class_stds = {0.2, 0.2};

    // sampler
    int sampler_steps = 50;
    std::string sampler_mode = "ode";
    double sampler_sigma = 0.0;
    double sampler_t_max = 1.0 - 1e-3;

    DataSpec data_spec() const;
    void validate() const;

    std::string serialize() const;
    static ExperimentConfig parse(const std::string& text);
    static ExperimentConfig load(const std::string& path);

    // "section.key=value" strings, same keys as the config file.
    void apply_override(const std::string& assignment);

    std::uint64_t config_hash() const;  // FNV-1a over the canonical serialization
};

}  // namespace flowlab
