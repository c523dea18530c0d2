// Command-line front end: train / eval / sample / suite / collapse.

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "flowlab/checkpoint.hpp"
#include "flowlab/collapse.hpp"
#include "flowlab/csv.hpp"
#include "flowlab/suite.hpp"
#include "flowlab/train.hpp"

namespace fs = std::filesystem;
using namespace flowlab;

namespace {

struct CommonConfigArgs {
    std::string config_path;
    std::vector<std::string> overrides;
};

ExperimentConfig resolve_config(const CommonConfigArgs& args) {
    ExperimentConfig cfg;
    if (!args.config_path.empty()) cfg = ExperimentConfig::load(args.config_path);
    for (const std::string& o : args.overrides) cfg.apply_override(o);
    return cfg;
}

void add_config_options(CLI::App* cmd, CommonConfigArgs& args) {
    cmd->add_option("--config", args.config_path, "config file to start from");
    cmd->add_option("--set", args.overrides,
                    "override any config key, e.g. --set run.steps=2000");
}

int cmd_train(const CommonConfigArgs& args, const std::string& resume_dir,
              const std::string& variant, long steps, std::int64_t seed,
              const std::string& out_dir) {
    if (!resume_dir.empty()) {
        std::vector<std::string> overrides = args.overrides;
        if (steps >= 0) overrides.push_back("run.steps=" + std::to_string(steps));
        resume_train(resume_dir, overrides, &std::cout);
        return 0;
    }
    ExperimentConfig cfg = resolve_config(args);
    if (!variant.empty()) cfg.variant = variant;
    if (steps >= 0) cfg.total_steps = steps;
    if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (cfg.out_dir.empty())
        cfg.out_dir = "runs/" + cfg.variant + "_s" + std::to_string(cfg.seed);
    run_train(cfg, &std::cout);
    return 0;
}

int cmd_eval(const std::string& checkpoint_path, int samples, std::int64_t seed) {
    LoadedCheckpoint ckpt = load_checkpoint(checkpoint_path);
    ExperimentConfig cfg = ExperimentConfig::parse(ckpt.config_text);
    if (samples > 0) cfg.eval_samples = samples;
    const std::uint64_t eval_seed =
        seed >= 0 ? static_cast<std::uint64_t>(seed) : mix_seed(cfg.seed, 0x33);
    MetricsRecord rec =
        eval_checkpoint(ckpt.net, ckpt.maps, make_schedule(cfg.schedule_name),
                        cfg.data_spec(), make_sampler_config(cfg), cfg.eval_samples,
                        eval_seed);
    rec.step = ckpt.state.step;
    std::cout << "step " << rec.step << "\n";
    for (std::size_t c = 0; c < rec.w1_per_class.size(); ++c)
        std::cout << "w1 class " << c << ": " << format_double(rec.w1_per_class[c]) << "\n";
    std::cout << "w1 mean: " << format_double(rec.w1_mean) << "\n";
    std::cout << "trajectory length: " << format_double(rec.traj_len.mean) << " +- "
              << format_double(rec.traj_len.two_stderr) << " (2se)\n";
    std::cout << "displacement mean: " << format_double(rec.displacement_mean) << "\n";
    for (std::size_t c = 0; c < rec.mu0_per_class.size(); ++c)
        std::cout << "class " << c << ": mu0 " << format_double(rec.mu0_per_class[c])
                  << "  mu1 " << format_double(rec.mu1_per_class[c]) << "  sigma0 "
                  << format_double(rec.sigma0_per_class[c]) << "  sigma1 "
                  << format_double(rec.sigma1_per_class[c]) << "\n";
    if (!std::isnan(rec.collapse_gap))
        std::cout << "collapse gap: " << format_double(rec.collapse_gap) << "\n";
    return 0;
}

int cmd_sample(const std::string& checkpoint_path, int n, int class_index,
               const std::string& mode, int steps, double sigma, std::int64_t seed,
               const std::string& traj_path) {
    LoadedCheckpoint ckpt = load_checkpoint(checkpoint_path);
    ExperimentConfig cfg = ExperimentConfig::parse(ckpt.config_text);
    cfg.sampler_mode = mode;
    if (steps > 0) cfg.sampler_steps = steps;
    cfg.sampler_sigma = sigma;
    const SamplerConfig sampler = make_sampler_config(cfg);
    const Schedule schedule = make_schedule(cfg.schedule_name);
    const std::uint64_t s = seed >= 0 ? static_cast<std::uint64_t>(seed) : 0;

    const int k = static_cast<int>(cfg.net.label_values.size());
    std::vector<int> y;
    for (int i = 0; i < n; ++i)
        y.push_back(class_index >= 0 ? class_index : i % k);
    const SampleBatch batch =
        sample_paths(net_velocity(ckpt.net), ckpt.maps, schedule, y, s, sampler);

    if (!traj_path.empty()) {
        std::ofstream out(traj_path, std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + traj_path);
        for (int i = 0; i < n; ++i) {
            nlohmann::json rec;
            rec["y"] = y[i];
            std::vector<double> z(batch.trajectories.col(i).data(),
                                  batch.trajectories.col(i).data() +
                                      batch.trajectories.rows());
            rec["z"] = z;
            rec["x1"] = batch.x1[i];
            out << rec.dump() << "\n";
        }
        std::cout << "wrote " << n << " trajectories to " << traj_path << "\n";
    }
    for (int c = 0; c < k; ++c) {
        std::vector<double> vals;
        for (int i = 0; i < n; ++i)
            if (y[i] == c) vals.push_back(batch.x1[i]);
        if (vals.empty()) continue;
        Eigen::Map<Arr> arr(vals.data(), static_cast<Eigen::Index>(vals.size()));
        const double mean = arr.mean();
        const double sd = std::sqrt((arr - mean).square().sum() /
                                    std::max<Eigen::Index>(1, arr.size() - 1));
        std::cout << "class " << c << ": n=" << vals.size() << " mean "
                  << format_double(mean) << " std " << format_double(sd) << "\n";
    }
    return 0;
}

int cmd_collapse(const std::string& case_name, const std::string& checkpoint_path,
                 int n_points, std::int64_t seed) {
    const Schedule schedule = linear_schedule();
    const std::uint64_t s = seed >= 0 ? static_cast<std::uint64_t>(seed) : 0;

    if (!checkpoint_path.empty()) {
        LoadedCheckpoint ckpt = load_checkpoint(checkpoint_path);
        ExperimentConfig cfg = ExperimentConfig::parse(ckpt.config_text);
        Rng rng(mix_seed(s, 7));
        const TrainingBatch batch = sample_batch(rng, n_points, cfg.data_spec());
        const double gap =
            collapse_gap(net_velocity(ckpt.net), ckpt.maps, schedule, batch);
        std::cout << "collapse gap (" << cfg.variant << "): " << format_double(gap) << "\n";
        return 0;
    }

    // analytic battery: pointwise identities per case + the shift-equivalence
    // falsification sweep
    int failures = 0;
    auto check = [&failures](const std::string& name, double value, double bound) {
        const bool ok = value <= bound;
        std::cout << (ok ? "PASS " : "FAIL ") << name << ": " << format_double(value)
                  << " (bound " << format_double(bound) << ")\n";
        if (!ok) ++failures;
    };

    std::vector<CollapseSpec> specs = {
        {CollapseCase::constant_source, 0.5, 1.0},
        {CollapseCase::constant_target, -0.8, 1.0},
        {CollapseCase::unbounded_source, 0.0, 1.0},
        {CollapseCase::unbounded_target, 0.0, 1.0},
        {CollapseCase::proportional, 0.3, 2.0},
    };
    for (const CollapseSpec& spec : specs) {
        if (!case_name.empty() && to_string(spec.kind) != case_name) continue;
        Rng rng(mix_seed(s, 100 + static_cast<int>(spec.kind)));
        check("pointwise identity " + to_string(spec.kind),
              verify_pointwise_identity(spec, schedule, rng, n_points), 1e-10);
    }

    if (case_name.empty()) {
        Rng rng(mix_seed(s, 55));
        Arr grid(19);
        for (int i = 0; i < 19; ++i) grid[i] = 0.05 * (i + 1);
        int false_negatives = 0;
        for (int i = 0; i < 1000; ++i) {
            double mu0 = 0.0, mu1 = 0.0;
            do {
                mu0 = rng.uniform(-2.0, 2.0);
                mu1 = rng.uniform(-2.0, 2.0);
            } while (std::max(std::abs(mu0), std::abs(mu1)) < 1e-3);
            if (check_shift_equivalence(mu0, mu1, schedule, grid).equivalent)
                ++false_negatives;
        }
        check("shift-equivalence false accepts over 1000 nonzero pairs",
              static_cast<double>(false_negatives), 0.0);
        const bool zero_ok = check_shift_equivalence(0.0, 0.0, schedule, grid).equivalent;
        std::cout << (zero_ok ? "PASS " : "FAIL ") << "shift equivalence accepts (0,0)\n";
        if (!zero_ok) ++failures;
    }
    return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"conditional flow-matching lab"};
    app.require_subcommand(1);

    // train
    auto* train = app.add_subcommand("train", "train one model");
    CommonConfigArgs train_cfg;
    add_config_options(train, train_cfg);
    std::string train_variant, train_out, resume_dir;
    long train_steps = -1;
    std::int64_t train_seed = -1;
    train->add_option("--variant", train_variant,
                      "baseline|source_only|target_only|joint|affine_source|affine_target");
    train->add_option("--steps", train_steps, "total optimization steps");
    train->add_option("--seed", train_seed, "experiment seed");
    train->add_option("--out", train_out, "output directory");
    train->add_option("--resume", resume_dir, "continue a checkpointed run directory");

    // eval
    auto* eval = app.add_subcommand("eval", "evaluate a checkpoint");
    std::string eval_ckpt;
    int eval_samples = -1;
    std::int64_t eval_seed = -1;
    eval->add_option("--checkpoint", eval_ckpt, "checkpoint file")->required();
    eval->add_option("--samples", eval_samples, "samples per class");
    eval->add_option("--seed", eval_seed, "evaluation seed");

    // sample
    auto* sample = app.add_subcommand("sample", "draw samples from a checkpoint");
    std::string sample_ckpt, sample_mode = "ode", sample_traj;
    int sample_n = 16, sample_class = -1, sample_steps = -1;
    double sample_sigma = 0.0;
    std::int64_t sample_seed = 0;
    sample->add_option("--checkpoint", sample_ckpt, "checkpoint file")->required();
    sample->add_option("--n", sample_n, "number of samples");
    sample->add_option("--class", sample_class, "class index (default: cycle)");
    sample->add_option("--mode", sample_mode, "ode|sde");
    sample->add_option("--steps", sample_steps, "integrator steps");
    sample->add_option("--sigma", sample_sigma, "constant diffusion coefficient (sde)");
    sample->add_option("--seed", sample_seed, "sampling seed");
    sample->add_option("--traj", sample_traj, "write trajectories as JSONL");

    // suite
    auto* suite = app.add_subcommand("suite", "run an experiment suite");
    std::string suite_name, suite_out = "suites";
    std::vector<std::uint64_t> suite_seeds;
    long suite_steps = -1, suite_eval_every = -1;
    int suite_eval_samples = -1, suite_batch = -1;
    suite->add_option("--name", suite_name, "table2|fig2|fig4|appD_sweep|appD_uncond")
        ->required();
    suite->add_option("--out", suite_out, "suite output directory");
    suite->add_option("--seeds", suite_seeds, "seeds (default 0 1 2)");
    suite->add_option("--steps", suite_steps, "override steps per run");
    suite->add_option("--eval-every", suite_eval_every, "override eval cadence");
    suite->add_option("--eval-samples", suite_eval_samples, "override eval sample count");
    suite->add_option("--batch", suite_batch, "override batch size");

    // collapse
    auto* collapse = app.add_subcommand("collapse", "collapse diagnostics");
    std::string collapse_case, collapse_ckpt;
    int collapse_points = 10000;
    std::int64_t collapse_seed = 0;
    collapse->add_option("--case", collapse_case, "restrict to one collapse case");
    collapse->add_option("--checkpoint", collapse_ckpt,
                         "evaluate the collapse gap of a trained affine model");
    collapse->add_option("--points", collapse_points, "number of test points");
    collapse->add_option("--seed", collapse_seed, "rng seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (train->parsed())
            return cmd_train(train_cfg, resume_dir, train_variant, train_steps, train_seed,
                             train_out);
        if (eval->parsed()) return cmd_eval(eval_ckpt, eval_samples, eval_seed);
        if (sample->parsed())
            return cmd_sample(sample_ckpt, sample_n, sample_class, sample_mode,
                              sample_steps, sample_sigma, sample_seed, sample_traj);
        if (suite->parsed()) {
            SuiteOptions opts;
            opts.out_dir = suite_out;
            if (!suite_seeds.empty()) opts.seeds = suite_seeds;
            opts.steps_override = suite_steps;
            opts.eval_every_override = suite_eval_every;
            opts.eval_samples_override = suite_eval_samples;
            opts.batch_size_override = suite_batch;
            opts.log = &std::cout;
            const SuiteReport report = run_suite(suite_name, opts);
            std::ifstream rep(report.report_path);
            std::cout << rep.rdbuf();
            return 0;
        }
        if (collapse->parsed())
            return cmd_collapse(collapse_case, collapse_ckpt, collapse_points,
                                collapse_seed);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 1;
    }
    return 0;
}
