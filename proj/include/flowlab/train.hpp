#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "flowlab/config.hpp"
#include "flowlab/metrics.hpp"
#include "flowlab/reparam.hpp"
#include "flowlab/sampler.hpp"

namespace flowlab {

Schedule make_schedule(const std::string& name);
SamplerConfig make_sampler_config(const ExperimentConfig& cfg);

// Substream identifiers: every random stream a run consumes is derived as
// mix_seed(seed, id), so artifacts are a pure function of (config, seed).
inline constexpr std::uint64_t kInitStreamId = 0x11;
inline constexpr std::uint64_t kTrainStreamId = 0x22;
inline constexpr std::uint64_t kEvalStreamId = 0x33;

struct TrainResult {
    std::string run_dir;
    MetricsRecord final_metrics;
    std::vector<MetricsRecord> history;
};

// Full training run: writes config.txt, metrics.csv, checkpoint.bin(+.json),
// convergence/diagnostic SVGs and manifest.json into cfg.out_dir. Every
// artifact except the manifest is a pure function of (config, seed).
// `log` may be null for silent operation.
TrainResult run_train(const ExperimentConfig& cfg, std::ostream* log = nullptr);

// Continues a checkpointed run in place, appending to its metrics file.
// `overrides` are applied to the stored config (typically run.steps).
TrainResult resume_train(const std::string& run_dir,
                         const std::vector<std::string>& overrides,
                         std::ostream* log = nullptr);

}  // namespace flowlab
