#include "flowlab/train.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "flowlab/checkpoint.hpp"
#include "flowlab/csv.hpp"
#include "flowlab/objective.hpp"
#include "flowlab/optimizer.hpp"
#include "flowlab/svgplot.hpp"

namespace fs = std::filesystem;

namespace flowlab {

namespace {

constexpr std::uint64_t kInitStream = kInitStreamId;
constexpr std::uint64_t kTrainStream = kTrainStreamId;
constexpr std::uint64_t kEvalStream = kEvalStreamId;
constexpr double kEmaDecay = 0.999;

std::string class_name(int c) {
    std::string name;
    do {
        name.insert(name.begin(), static_cast<char>('A' + c % 26));
        c = c / 26 - 1;
    } while (c >= 0);
    return name;
}

std::string metrics_header(int num_classes) {
    std::string h = "step,loss_ema";
    for (int c = 0; c < num_classes; ++c) h += ",w1_class" + class_name(c);
    h += ",w1_mean,traj_len_mean,traj_len_2se,displacement_mean";
    for (const char* base : {"mu0_class", "mu1_class", "sigma0_class", "sigma1_class"})
        for (int c = 0; c < num_classes; ++c) h += "," + std::string(base) + class_name(c);
    h += ",collapse_gap";
    return h;
}

std::string metrics_row(const MetricsRecord& rec) {
    auto cell = [](double v) { return std::isnan(v) ? std::string() : format_double(v); };
    std::string row = std::to_string(rec.step) + "," + cell(rec.loss_ema);
    for (double w : rec.w1_per_class) row += "," + cell(w);
    row += "," + cell(rec.w1_mean);
    row += "," + cell(rec.traj_len.mean) + "," + cell(rec.traj_len.two_stderr);
    row += "," + cell(rec.displacement_mean);
    for (const auto* vals : {&rec.mu0_per_class, &rec.mu1_per_class, &rec.sigma0_per_class,
                             &rec.sigma1_per_class})
        for (double v : *vals) row += "," + cell(v);
    row += "," + cell(rec.collapse_gap);
    return row;
}

std::string read_git_hash() {
    std::ifstream head(".git/HEAD");
    if (!head) return "unknown";
    std::string line;
    std::getline(head, line);
    if (line.rfind("ref: ", 0) == 0) {
        std::ifstream ref(".git/" + line.substr(5));
        if (!ref) return "unknown";
        std::getline(ref, line);
    }
    return line.empty() ? "unknown" : line;
}

std::string utc_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm_utc{};
    gmtime_r(&tt, &tm_utc);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

struct TrainerState {
    ExperimentConfig cfg;
    Schedule schedule;
    DataSpec data;
    VelocityNet net;
    ReparamMaps maps;
    std::vector<ParamGroup> groups;
    AdamWState opt;
    Rng rng_train{0};
    double loss_ema = std::numeric_limits<double>::quiet_NaN();
    long step = 0;
};

std::vector<ParamGroup> make_groups(const ExperimentConfig& cfg, VelocityNet& net,
                                    ReparamMaps& maps) {
    std::vector<ParamGroup> groups;
    groups.push_back({"backbone", cfg.lr_backbone, cfg.weight_decay, net.param_refs()});
    for (auto& [name, refs] : maps.param_groups()) {
        double lr = 0.0;
        if (name == "source_shift") lr = cfg.lr_source_shift;
        else if (name == "target_shift") lr = cfg.lr_target_shift;
        else if (name == "source_scale") lr = cfg.lr_source_scale;
        else if (name == "target_scale") lr = cfg.lr_target_scale;
        groups.push_back({name, lr, cfg.weight_decay, refs});
    }
    return groups;
}

TrainerState build_trainer(const ExperimentConfig& cfg) {
    cfg.validate();
    TrainerState st;
    st.cfg = cfg;
    st.schedule = make_schedule(cfg.schedule_name);
    check_schedule_invariants(st.schedule);
    st.data = cfg.data_spec();
    Rng rng_init(mix_seed(cfg.seed, kInitStream));
    st.net = VelocityNet::init(cfg.net, rng_init);
    st.maps = ReparamMaps::init(variant_from_string(cfg.variant), cfg.net.embed_dim,
                                static_cast<int>(cfg.net.label_values.size()),
                                cfg.source_shift_conditional);
    st.maps.set_class_embeddings(st.net.class_embeddings());
    st.groups = make_groups(st.cfg, st.net, st.maps);
    st.opt = AdamWState::init(st.groups);
    st.rng_train = Rng(mix_seed(cfg.seed, kTrainStream));
    return st;
}

MetricsRecord eval_now(const TrainerState& st) {
    MetricsRecord rec = eval_checkpoint(st.net, st.maps, st.schedule, st.data,
                                        make_sampler_config(st.cfg), st.cfg.eval_samples,
                                        mix_seed(mix_seed(st.cfg.seed, kEvalStream),
                                                 static_cast<std::uint64_t>(st.step)));
    rec.step = st.step;
    rec.loss_ema = st.loss_ema;
    return rec;
}

void write_plots(const fs::path& dir, const std::vector<MetricsRecord>& history,
                 const TrainerState& st) {
    if (history.size() < 2) return;
    const int k = st.data.num_classes();
    std::vector<double> steps;
    for (const auto& r : history) steps.push_back(static_cast<double>(r.step));

    std::vector<PlotSeries> w1;
    for (int c = 0; c < k; ++c) {
        PlotSeries s{"class " + class_name(c), steps, {}};
        for (const auto& r : history) s.y.push_back(r.w1_per_class[c]);
        w1.push_back(std::move(s));
    }
    write_svg_plot((dir / "w1_vs_step.svg").string(),
                   {"Wasserstein-1 vs training step", "step", "W1", AxisScale::symlog},
                   w1);

    if (st.maps.has_mu0() || st.maps.has_mu1()) {
        std::vector<PlotSeries> shifts;
        for (int c = 0; c < k; ++c) {
            if (st.maps.has_mu0()) {
                PlotSeries s{"mu0 " + class_name(c), steps, {}};
                for (const auto& r : history) s.y.push_back(r.mu0_per_class[c]);
                shifts.push_back(std::move(s));
            }
            if (st.maps.has_mu1()) {
                PlotSeries s{"mu1 " + class_name(c), steps, {}};
                for (const auto& r : history) s.y.push_back(r.mu1_per_class[c]);
                shifts.push_back(std::move(s));
            }
        }
        write_svg_plot((dir / "shifts_vs_step.svg").string(),
                       {"Learned shifts", "step", "shift", AxisScale::linear}, shifts);
    }

    if (st.maps.has_scale0() || st.maps.has_scale1()) {
        std::vector<PlotSeries> sig, gap;
        for (int c = 0; c < k; ++c) {
            PlotSeries s{"sigma " + class_name(c), steps, {}};
            for (const auto& r : history)
                s.y.push_back(st.maps.has_scale0() ? r.sigma0_per_class[c]
                                                   : r.sigma1_per_class[c]);
            sig.push_back(std::move(s));
        }
        write_svg_plot((dir / "sigma_vs_step.svg").string(),
                       {"Learned scale", "step", "sigma", AxisScale::linear}, sig);
        PlotSeries g{"gap", steps, {}};
        for (const auto& r : history) g.y.push_back(r.collapse_gap);
        write_svg_plot((dir / "gap_vs_step.svg").string(),
                       {"Collapse gap", "step", "E |v - v*|^2", AxisScale::log10}, {g});
    }
}

TrainResult train_loop(TrainerState& st, std::vector<MetricsRecord> history,
                       bool fresh_metrics_file, std::ostream* log) {
    const ExperimentConfig& cfg = st.cfg;
    const fs::path dir(cfg.out_dir.empty() ? "." : cfg.out_dir);
    fs::create_directories(dir);
    {
        std::ofstream cf(dir / "config.txt", std::ios::trunc);
        cf << cfg.serialize();
    }
    const std::string started = utc_now();
    const auto t_begin = std::chrono::steady_clock::now();

    std::ofstream csv(dir / "metrics.csv", fresh_metrics_file ? std::ios::trunc : std::ios::app);
    if (!csv) throw std::runtime_error("train: cannot open metrics.csv");
    if (fresh_metrics_file) {
        csv << "# flowlab metrics v1\n";
        csv << metrics_header(st.data.num_classes()) << "\n";
    }

    auto checkpoint_now = [&]() {
        TrainCheckpoint tc;
        tc.step = st.step;
        tc.loss_ema = st.loss_ema;
        tc.rng_state = st.rng_train.save_state();
        save_checkpoint((dir / "checkpoint.bin").string(), st.net, st.maps, st.opt, tc,
                        cfg.serialize());
    };
    auto log_eval = [&]() {
        MetricsRecord rec = eval_now(st);
        history.push_back(rec);
        csv << metrics_row(rec) << "\n";
        csv.flush();
        if (log)
            (*log) << "step " << rec.step << "  loss_ema "
                   << (std::isnan(rec.loss_ema) ? std::string("-") : format_double(rec.loss_ema))
                   << "  w1_mean " << format_double(rec.w1_mean) << "  traj_len "
                   << format_double(rec.traj_len.mean) << std::endl;
    };

    if (st.step == 0) {
        checkpoint_now();
        log_eval();
    }

    GradientBundle bundle = make_gradient_bundle(st.net, st.maps);
    LossWorkspace ws;
    for (long s = st.step + 1; s <= cfg.total_steps; ++s) {
        st.step = s;
        const TrainingBatch batch = sample_batch(st.rng_train, cfg.batch_size, st.data);
        loss_and_grad(st.net, st.maps, batch, st.schedule, bundle, ws);
        if (!std::isfinite(bundle.loss)) {
            std::string diag = "train: non-finite loss at step " + std::to_string(s);
            for (const ParamGroup& g : st.groups)
                for (const ParamRef& p : g.params)
                    if (!p.map().isFinite().all())
                        diag += "; non-finite parameters in group '" + g.name + "'";
            throw OptimizerError(diag);
        }
        try {
            adamw_step(st.opt, st.groups, bundle.grads, cfg.adam);
        } catch (const OptimizerError& e) {
            throw OptimizerError("train: step " + std::to_string(s) + ": " + e.what());
        }
        st.loss_ema = std::isnan(st.loss_ema)
                          ? bundle.loss
                          : kEmaDecay * st.loss_ema + (1.0 - kEmaDecay) * bundle.loss;
        if (s % cfg.eval_every == 0 || s == cfg.total_steps) {
            checkpoint_now();
            log_eval();
        }
    }

    if (history.empty()) log_eval();  // resume that was already at its final step
    write_plots(dir, history, st);

    nlohmann::json manifest;
    manifest["seed"] = cfg.seed;
    manifest["config_hash"] = cfg.config_hash();
    manifest["git_hash"] = read_git_hash();
    manifest["started_utc"] = started;
    manifest["finished_utc"] = utc_now();
    manifest["wall_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_begin).count();
    std::ofstream mf(dir / "manifest.json", std::ios::trunc);
    mf << manifest.dump(2) << "\n";

    TrainResult result;
    result.run_dir = dir.string();
    result.final_metrics = history.back();
    result.history = std::move(history);
    return result;
}

}  // namespace

Schedule make_schedule(const std::string& name) {
    if (name == "linear") return linear_schedule();
    throw std::domain_error("unknown schedule '" + name + "'");
}

SamplerConfig make_sampler_config(const ExperimentConfig& cfg) {
    SamplerConfig sc;
    sc.steps = cfg.sampler_steps;
    sc.mode = cfg.sampler_mode == "sde" ? SamplerConfig::Mode::sde : SamplerConfig::Mode::ode;
    const double sigma = cfg.sampler_sigma;
    sc.sigma = [sigma](double) { return sigma; };
    sc.t_max = cfg.sampler_t_max;
    return sc;
}

TrainResult run_train(const ExperimentConfig& cfg, std::ostream* log) {
    TrainerState st = build_trainer(cfg);
    if (log)
        (*log) << "training " << cfg.variant << " seed " << cfg.seed << " for "
               << cfg.total_steps << " steps -> " << cfg.out_dir << std::endl;
    return train_loop(st, {}, /*fresh_metrics_file=*/true, log);
}

TrainResult resume_train(const std::string& run_dir,
                         const std::vector<std::string>& overrides, std::ostream* log) {
    const fs::path dir(run_dir);
    ExperimentConfig cfg = ExperimentConfig::load((dir / "config.txt").string());
    for (const std::string& o : overrides) cfg.apply_override(o);
    cfg.out_dir = run_dir;
    cfg.validate();

    LoadedCheckpoint ckpt = load_checkpoint((dir / "checkpoint.bin").string());
    TrainerState st;
    st.cfg = cfg;
    st.schedule = make_schedule(cfg.schedule_name);
    st.data = cfg.data_spec();
    st.net = std::move(ckpt.net);
    st.maps = std::move(ckpt.maps);
    st.groups = make_groups(st.cfg, st.net, st.maps);
    st.opt = std::move(ckpt.opt);
    st.rng_train.load_state(ckpt.state.rng_state);
    st.loss_ema = ckpt.state.loss_ema;
    st.step = ckpt.state.step;
    if (log)
        (*log) << "resuming " << cfg.variant << " at step " << st.step << " -> "
               << cfg.total_steps << " steps" << std::endl;
    return train_loop(st, {}, /*fresh_metrics_file=*/false, log);
}

}  // namespace flowlab
