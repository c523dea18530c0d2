#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "flowlab/train.hpp"

namespace flowlab {

struct SuiteOptions {
    std::string out_dir = "suites";
    std::vector<std::uint64_t> seeds = {0, 1, 2};
    long steps_override = -1;         // -1 keeps the suite default
    long eval_every_override = -1;
    int eval_samples_override = -1;
    int batch_size_override = -1;
    std::ostream* log = nullptr;
};

// One labeled configuration aggregated over its seeds.
struct SuiteRow {
    std::string label;
    std::string variant;
    double traj_len_mean = 0.0;
    double traj_len_2se = 0.0;
    std::vector<double> w1_per_class;  // seed-averaged
    double w1_mean = 0.0;
    std::vector<TrainResult> runs;
};

struct SuiteReport {
    std::string name;
    std::vector<SuiteRow> rows;
    std::string report_path;
    bool collapse_sampling_rejected = false;  // fig4: sampling a collapsed
                                              // target model must fail loudly
};

// Suites:
//   table2     - four variants x seeds, mean trajectory length table
//   fig2       - four variants, convergence and shift plots
//   fig4       - affine source/target collapse runs (100k steps), sigma and
//                gap plots, plus the sampling-rejection probe
//   appD_sweep - shift-net learning-rate sweep for source/target variants
//   appD_uncond- conditional vs global (unconditional) source shift
SuiteReport run_suite(const std::string& name, const SuiteOptions& opts);

}  // namespace flowlab
