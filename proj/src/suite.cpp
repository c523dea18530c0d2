#include "flowlab/suite.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <sstream>

#include "flowlab/checkpoint.hpp"
#include "flowlab/csv.hpp"
#include "flowlab/svgplot.hpp"

namespace fs = std::filesystem;

namespace flowlab {

namespace {

ExperimentConfig base_config(const SuiteOptions& opts) {
    ExperimentConfig cfg;
    if (opts.steps_override >= 0) cfg.total_steps = opts.steps_override;
    if (opts.eval_every_override > 0) cfg.eval_every = opts.eval_every_override;
    if (opts.eval_samples_override > 0) cfg.eval_samples = opts.eval_samples_override;
    if (opts.batch_size_override > 0) cfg.batch_size = opts.batch_size_override;
    return cfg;
}

SuiteRow aggregate(const std::string& label, const std::string& variant,
                   std::vector<TrainResult> runs) {
    SuiteRow row;
    row.label = label;
    row.variant = variant;
    const double k = static_cast<double>(runs.size());
    double se2_sum = 0.0;
    row.w1_per_class.assign(runs.front().final_metrics.w1_per_class.size(), 0.0);
    for (const TrainResult& r : runs) {
        row.traj_len_mean += r.final_metrics.traj_len.mean / k;
        se2_sum += r.final_metrics.traj_len.two_stderr * r.final_metrics.traj_len.two_stderr;
        row.w1_mean += r.final_metrics.w1_mean / k;
        for (std::size_t c = 0; c < row.w1_per_class.size(); ++c)
            row.w1_per_class[c] += r.final_metrics.w1_per_class[c] / k;
    }
    row.traj_len_2se = std::sqrt(se2_sum) / k;
    row.runs = std::move(runs);
    return row;
}

TrainResult run_one(ExperimentConfig cfg, const fs::path& dir, const std::string& name,
                    std::uint64_t seed, std::ostream* log) {
    cfg.seed = seed;
    cfg.out_dir = (dir / (name + "_s" + std::to_string(seed))).string();
    if (log) (*log) << "[suite] run " << name << " seed " << seed << std::endl;
    return run_train(cfg, log);
}

void write_report(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("suite: cannot write " + path.string());
    out << text;
}

std::string fmt(double v, int prec = 4) {
    std::ostringstream ss;
    ss << std::fixed << std::setprecision(prec) << v;
    return ss.str();
}

// Pulls one metrics column out of a run's history for plotting.
PlotSeries history_series(const std::string& label, const TrainResult& run,
                          const std::function<double(const MetricsRecord&)>& get) {
    PlotSeries s;
    s.label = label;
    for (const MetricsRecord& r : run.history) {
        s.x.push_back(static_cast<double>(r.step));
        s.y.push_back(get(r));
    }
    return s;
}

SuiteReport suite_table2(const SuiteOptions& opts, bool with_plots) {
    const fs::path dir = fs::path(opts.out_dir) / (with_plots ? "fig2" : "table2");
    fs::create_directories(dir);
    SuiteReport report;
    report.name = with_plots ? "fig2" : "table2";

    const std::vector<std::string> variants = {"baseline", "source_only", "target_only",
                                               "joint"};
    for (const std::string& variant : variants) {
        std::vector<TrainResult> runs;
        for (std::uint64_t seed : opts.seeds) {
            ExperimentConfig cfg = base_config(opts);
            cfg.variant = variant;
            runs.push_back(run_one(cfg, dir, variant, seed, opts.log));
        }
        report.rows.push_back(aggregate(variant, variant, std::move(runs)));
    }

    std::ostringstream rep;
    rep << "suite: " << report.name << "\n";
    rep << "seeds:";
    for (auto s : opts.seeds) rep << " " << s;
    rep << "\n\n";
    rep << "variant        traj_len (+-2se)        w1_mean\n";
    for (const SuiteRow& row : report.rows)
        rep << std::left << std::setw(14) << row.variant << " " << fmt(row.traj_len_mean)
            << " (+-" << fmt(row.traj_len_2se) << ")      " << fmt(row.w1_mean) << "\n";
    const fs::path report_path = dir / "report.txt";
    write_report(report_path, rep.str());
    report.report_path = report_path.string();

    if (with_plots) {
        std::vector<PlotSeries> w1_series, shift_series;
        for (const SuiteRow& row : report.rows) {
            w1_series.push_back(history_series(
                row.variant, row.runs.front(),
                [](const MetricsRecord& r) { return r.w1_mean; }));
            const TrainResult& run = row.runs.front();
            const MetricsRecord& last = run.final_metrics;
            for (std::size_t c = 0; c < last.mu0_per_class.size(); ++c) {
                if (row.variant == "source_only" || row.variant == "joint")
                    shift_series.push_back(history_series(
                        row.variant + " mu0/" + std::to_string(c), run,
                        [c](const MetricsRecord& r) { return r.mu0_per_class[c]; }));
                if (row.variant == "target_only" || row.variant == "joint")
                    shift_series.push_back(history_series(
                        row.variant + " mu1/" + std::to_string(c), run,
                        [c](const MetricsRecord& r) { return r.mu1_per_class[c]; }));
            }
        }
        write_svg_plot((dir / "w1_vs_step.svg").string(),
                       {"Wasserstein-1 convergence", "step", "W1 (mean over classes)",
                        AxisScale::symlog},
                       w1_series);
        write_svg_plot((dir / "shifts_vs_step.svg").string(),
                       {"Learned shifts", "step", "shift", AxisScale::linear}, shift_series);
    }
    return report;
}

SuiteReport suite_fig4(const SuiteOptions& opts) {
    const fs::path dir = fs::path(opts.out_dir) / "fig4";
    fs::create_directories(dir);
    SuiteReport report;
    report.name = "fig4";

    for (const std::string& variant : std::vector<std::string>{"affine_source", "affine_target"}) {
        ExperimentConfig cfg = base_config(opts);
        cfg.variant = variant;
        if (opts.steps_override < 0) cfg.total_steps = 100000;  // collapse runs run longer
        std::vector<TrainResult> runs;
        runs.push_back(run_one(cfg, dir, variant, opts.seeds.front(), opts.log));
        report.rows.push_back(aggregate(variant, variant, std::move(runs)));
    }

    // sampling from the collapsed target map must trip the singular-map error
    {
        const TrainResult& run = report.rows.back().runs.front();
        const ExperimentConfig cfg =
            ExperimentConfig::load((fs::path(run.run_dir) / "config.txt").string());
        LoadedCheckpoint ckpt =
            load_checkpoint((fs::path(run.run_dir) / "checkpoint.bin").string());
        try {
            Rng rng(12345);
            sample_path(net_velocity(ckpt.net), ckpt.maps, make_schedule(cfg.schedule_name),
                        0, rng, make_sampler_config(cfg));
            report.collapse_sampling_rejected = false;
        } catch (const SingularMapError&) {
            report.collapse_sampling_rejected = true;
        }
    }

    std::vector<PlotSeries> sigma_series, gap_series;
    for (const SuiteRow& row : report.rows) {
        const bool source = row.variant == "affine_source";
        const TrainResult& run = row.runs.front();
        for (std::size_t c = 0; c < run.final_metrics.sigma0_per_class.size(); ++c)
            sigma_series.push_back(history_series(
                row.variant + (source ? " s0/" : " s1/") + std::to_string(c), run,
                [c, source](const MetricsRecord& r) {
                    return source ? r.sigma0_per_class[c] : r.sigma1_per_class[c];
                }));
        gap_series.push_back(history_series(row.variant, run, [](const MetricsRecord& r) {
            return r.collapse_gap;
        }));
    }
    write_svg_plot((dir / "sigma_vs_step.svg").string(),
                   {"Learned scales under affine maps", "step", "sigma", AxisScale::linear},
                   sigma_series);
    write_svg_plot((dir / "gap_vs_step.svg").string(),
                   {"Collapse gap", "step", "E |v - v*|^2", AxisScale::log10}, gap_series);

    std::ostringstream rep;
    rep << "suite: fig4\n\n";
    for (const SuiteRow& row : report.rows) {
        const MetricsRecord& m = row.runs.front().final_metrics;
        const bool source = row.variant == "affine_source";
        rep << row.variant << ": final sigma =";
        for (double s : (source ? m.sigma0_per_class : m.sigma1_per_class))
            rep << " " << format_double(s);
        rep << ", collapse gap = " << format_double(m.collapse_gap) << "\n";
    }
    rep << "collapsed-model sampling rejected: "
        << (report.collapse_sampling_rejected ? "yes" : "no") << "\n";
    const fs::path report_path = dir / "report.txt";
    write_report(report_path, rep.str());
    report.report_path = report_path.string();
    return report;
}

SuiteReport suite_appd_sweep(const SuiteOptions& opts) {
    const fs::path dir = fs::path(opts.out_dir) / "appD_sweep";
    fs::create_directories(dir);
    SuiteReport report;
    report.name = "appD_sweep";

    const std::vector<double> lrs = {1e-5, 1e-4, 1e-3};
    for (const std::string& variant : std::vector<std::string>{"source_only", "target_only"}) {
        std::vector<PlotSeries> mu_series, w1_series;
        for (double lr : lrs) {
            ExperimentConfig cfg = base_config(opts);
            cfg.variant = variant;
            if (variant == "source_only") cfg.lr_source_shift = lr;
            else cfg.lr_target_shift = lr;
            const std::string label = variant + "_lr" + format_double(lr);
            std::vector<TrainResult> runs;
            runs.push_back(run_one(cfg, dir, label, opts.seeds.front(), opts.log));
            const TrainResult& run = runs.front();
            for (std::size_t c = 0; c < run.final_metrics.mu0_per_class.size(); ++c)
                mu_series.push_back(history_series(
                    "lr " + format_double(lr) + " /" + std::to_string(c), run,
                    [c, &variant](const MetricsRecord& r) {
                        return variant == "source_only" ? r.mu0_per_class[c]
                                                        : r.mu1_per_class[c];
                    }));
            w1_series.push_back(history_series("lr " + format_double(lr), run,
                                               [](const MetricsRecord& r) { return r.w1_mean; }));
            report.rows.push_back(aggregate(label, variant, std::move(runs)));
        }
        write_svg_plot((dir / (variant + "_shift_vs_step.svg")).string(),
                       {"Learned shift vs step (" + variant + ")", "step", "shift",
                        AxisScale::linear},
                       mu_series);
        write_svg_plot((dir / (variant + "_w1_vs_step.svg")).string(),
                       {"W1 vs step (" + variant + ")", "step", "W1", AxisScale::symlog},
                       w1_series);
    }

    std::ostringstream rep;
    rep << "suite: appD_sweep\n\n";
    rep << "run                         final w1_mean\n";
    for (const SuiteRow& row : report.rows)
        rep << std::left << std::setw(28) << row.label << fmt(row.w1_mean) << "\n";
    const fs::path report_path = dir / "report.txt";
    write_report(report_path, rep.str());
    report.report_path = report_path.string();
    return report;
}

SuiteReport suite_appd_uncond(const SuiteOptions& opts) {
    const fs::path dir = fs::path(opts.out_dir) / "appD_uncond";
    fs::create_directories(dir);
    SuiteReport report;
    report.name = "appD_uncond";

    for (const bool conditional : {false, true}) {
        ExperimentConfig cfg = base_config(opts);
        cfg.variant = "source_only";
        cfg.source_shift_conditional = conditional;
        const std::string label = conditional ? "conditional_shift" : "unconditional_shift";
        std::vector<TrainResult> runs;
        for (std::uint64_t seed : opts.seeds)
            runs.push_back(run_one(cfg, dir, label, seed, opts.log));
        report.rows.push_back(aggregate(label, "source_only", std::move(runs)));
    }

    std::ostringstream rep;
    rep << "suite: appD_uncond\n\n";
    for (const SuiteRow& row : report.rows)
        rep << std::left << std::setw(22) << row.label << " w1_mean = " << fmt(row.w1_mean, 4)
            << "\n";
    rep << "\nconditional beats unconditional: "
        << (report.rows[1].w1_mean < report.rows[0].w1_mean ? "yes" : "no") << "\n";
    const fs::path report_path = dir / "report.txt";
    write_report(report_path, rep.str());
    report.report_path = report_path.string();
    return report;
}

}  // namespace

SuiteReport run_suite(const std::string& name, const SuiteOptions& opts) {
    if (name == "table2") return suite_table2(opts, false);
    if (name == "fig2") return suite_table2(opts, true);
    if (name == "fig4") return suite_fig4(opts);
    if (name == "appD_sweep") return suite_appd_sweep(opts);
    if (name == "appD_uncond") return suite_appd_uncond(opts);
    throw std::domain_error("unknown suite '" + name + "'");
}

}  // namespace flowlab
