#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "flowlab/checkpoint.hpp"
#include "flowlab/config.hpp"
#include "flowlab/csv.hpp"
#include "flowlab/train.hpp"

using namespace flowlab;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path temp_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "flowlab_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

ExperimentConfig tiny_config(const std::string& out) {
    ExperimentConfig cfg;
    cfg.total_steps = 40;
    cfg.batch_size = 64;
    cfg.eval_every = 20;
    cfg.eval_samples = 200;
    cfg.out_dir = out;
    return cfg;
}

}  // namespace

TEST_CASE("config serializes and parses back unchanged") {
    ExperimentConfig cfg;
    cfg.variant = "affine_target";
    cfg.seed = 42;
    cfg.total_steps = 1234;
    cfg.lr_target_scale = 3e-3;
    cfg.class_means = {-2.0, 0.5, 2.0};
    cfg.class_stds = {0.1, 0.2, 0.3};
    cfg.net.label_values = {0.0, 1.0, 2.0};
    const ExperimentConfig back = ExperimentConfig::parse(cfg.serialize());
    CHECK(back.serialize() == cfg.serialize());
    CHECK(back.variant == "affine_target");
    CHECK(back.lr_target_scale == 3e-3);
    CHECK(back.class_means.size() == 3);
}

TEST_CASE("defaults match the reference settings") {
    const ExperimentConfig cfg;
    CHECK(cfg.batch_size == 1024);
    CHECK(cfg.total_steps == 50000);
    CHECK(cfg.adam.beta1 == 0.9);
    CHECK(cfg.adam.beta2 == 0.95);
    CHECK(cfg.lr_source_shift == 1e-3);
    CHECK(cfg.lr_target_shift == 1e-4);
    CHECK(cfg.lr_backbone == 1e-5);
    CHECK(cfg.sampler_steps == 50);
    CHECK(cfg.sampler_mode == "ode");
    CHECK(cfg.sampler_sigma == 0.0);
    CHECK(cfg.net.param_count() == 1993);
    CHECK(cfg.class_means == std::vector<double>{-1.5, 1.5});
}

TEST_CASE("config overrides reach nested keys and bad keys are rejected") {
    ExperimentConfig cfg;
    cfg.apply_override("optimizer.lr_backbone=2e-4");
    CHECK(cfg.lr_backbone == 2e-4);
    cfg.apply_override("run.variant=joint");
    CHECK(cfg.variant == "joint");
    CHECK_THROWS_AS(cfg.apply_override("run.nonsense=1"), std::domain_error);
    CHECK_THROWS_AS(cfg.apply_override("no_equals_sign"), std::domain_error);
}

TEST_CASE("array files round-trip bit for bit") {
    const fs::path dir = temp_dir("arrays");
    std::vector<ArrayRecord> records;
    Rng rng(3);
    ArrayRecord a{"alpha", {3, 4}, {}};
    for (int i = 0; i < 12; ++i) a.data.push_back(rng.normal());
    ArrayRecord b{"beta", {5}, {}};
    for (int i = 0; i < 5; ++i) b.data.push_back(rng.normal());
    records.push_back(a);
    records.push_back(b);
    write_array_file((dir / "t.bin").string(), records);
    const auto back = read_array_file((dir / "t.bin").string());
    REQUIRE(back.size() == 2);
    CHECK(back[0].name == "alpha");
    CHECK(back[0].shape == std::vector<std::uint64_t>{3, 4});
    for (int i = 0; i < 12; ++i) CHECK(back[0].data[i] == a.data[i]);
    CHECK(back[1].shape == std::vector<std::uint64_t>{5});
}

TEST_CASE("checkpoint restores parameters exactly") {
    const fs::path dir = temp_dir("ckpt");
    ExperimentConfig cfg = tiny_config((dir / "run").string());
    cfg.variant = "affine_target";
    cfg.validate();

    Rng rng(7);
    VelocityNet net = VelocityNet::init(cfg.net, rng);
    ReparamMaps maps = ReparamMaps::init(Variant::affine_target, cfg.net.embed_dim,
                                         static_cast<int>(cfg.net.label_values.size()));
    maps.mu1_net()->b = 0.33;
    maps.log_s1_net()->w.setConstant(0.01);
    maps.set_class_embeddings(net.class_embeddings());
    std::vector<ParamGroup> groups{{"backbone", 1e-5, 0.0, net.param_refs()}};
    AdamWState opt = AdamWState::init(groups);
    opt.step_count = 17;

    TrainCheckpoint tc;
    tc.step = 17;
    tc.loss_ema = 0.125;
    Rng stream(99);
    stream.normal();
    tc.rng_state = stream.save_state();

    const std::string path = (dir / "checkpoint.bin").string();
    save_checkpoint(path, net, maps, opt, tc, cfg.serialize());
    const LoadedCheckpoint loaded = load_checkpoint(path);

    CHECK(loaded.state.step == 17);
    CHECK(loaded.state.loss_ema == 0.125);
    CHECK(loaded.opt.step_count == 17);
    const auto refs_a = net.param_refs();
    const auto refs_b = loaded.net.param_refs();
    REQUIRE(refs_a.size() == refs_b.size());
    for (std::size_t i = 0; i < refs_a.size(); ++i)
        for (Eigen::Index j = 0; j < refs_a[i].size; ++j)
            CHECK(refs_a[i].data[j] == refs_b[i].data[j]);
    CHECK(loaded.maps.mu1(0) == maps.mu1(0));
    CHECK(loaded.maps.sigma1(1) == maps.sigma1(1));

    Rng resumed(1);
    resumed.load_state(loaded.state.rng_state);
    CHECK(resumed.normal() == stream.normal());
}

TEST_CASE("rng state save/load preserves the stream") {
    Rng a(123);
    a.normal();
    a.uniform();
    const std::string state = a.save_state();
    Rng b(0);
    b.load_state(state);
    for (int i = 0; i < 10; ++i) {
        CHECK(a.normal() == b.normal());
        CHECK(a.uniform() == b.uniform());
    }
}

TEST_CASE("identical config and seed give byte-identical artifacts") {
    const fs::path dir = temp_dir("repro");
    ExperimentConfig cfg1 = tiny_config((dir / "a").string());
    ExperimentConfig cfg2 = tiny_config((dir / "b").string());
    run_train(cfg1);
    run_train(cfg2);
    CHECK(slurp(dir / "a" / "metrics.csv") == slurp(dir / "b" / "metrics.csv"));
    CHECK(slurp(dir / "a" / "checkpoint.bin") == slurp(dir / "b" / "checkpoint.bin"));
    CHECK(slurp(dir / "a" / "config.txt") == slurp(dir / "b" / "config.txt"));
    CHECK(slurp(dir / "a" / "w1_vs_step.svg") == slurp(dir / "b" / "w1_vs_step.svg"));
}

TEST_CASE("checkpoint-resume equals an uninterrupted run") {
    const fs::path dir = temp_dir("resume");
    ExperimentConfig full = tiny_config((dir / "full").string());
    full.variant = "joint";
    run_train(full);

    ExperimentConfig part = tiny_config((dir / "part").string());
    part.variant = "joint";
    part.total_steps = 20;
    run_train(part);
    resume_train((dir / "part").string(), {"run.steps=40"});

    CHECK(slurp(dir / "full" / "metrics.csv") == slurp(dir / "part" / "metrics.csv"));
    CHECK(slurp(dir / "full" / "checkpoint.bin") == slurp(dir / "part" / "checkpoint.bin"));
}

TEST_CASE("metrics csv is parseable and carries the schema header") {
    const fs::path dir = temp_dir("csv");
    ExperimentConfig cfg = tiny_config((dir / "run").string());
    cfg.variant = "source_only";
    const TrainResult result = run_train(cfg);
    const std::string text = slurp(dir / "run" / "metrics.csv");
    CHECK(text.rfind("# flowlab metrics v1", 0) == 0);

    const CsvTable table = read_csv((dir / "run" / "metrics.csv").string());
    CHECK(table.rows.size() == 3);  // steps 0, 20, 40
    CHECK(table.column("step").back() == 40.0);
    CHECK(table.column("w1_mean").back() == result.final_metrics.w1_mean);
    CHECK(table.column_index("mu0_classA") >= 0);
    CHECK(table.column_index("sigma1_classB") >= 0);
}

TEST_CASE("zero-step run leaves parameters at initialization") {
    const fs::path dir = temp_dir("zerostep");
    ExperimentConfig cfg = tiny_config((dir / "run").string());
    cfg.total_steps = 0;
    const TrainResult result = run_train(cfg);
    CHECK(result.final_metrics.step == 0);
    CHECK(result.history.size() == 1);

    const LoadedCheckpoint ckpt = load_checkpoint((dir / "run" / "checkpoint.bin").string());
    Rng rng(mix_seed(cfg.seed, kInitStreamId));
    VelocityNet fresh = VelocityNet::init(cfg.net, rng);
    const auto a = fresh.param_refs();
    const auto b = ckpt.net.param_refs();
    for (std::size_t i = 0; i < a.size(); ++i)
        for (Eigen::Index j = 0; j < a[i].size; ++j) CHECK(a[i].data[j] == b[i].data[j]);
}
