#include <doctest.h>

#include <cmath>

#include "flowlab/objective.hpp"

using namespace flowlab;

namespace {

ReparamMaps make_maps(Variant v) { return ReparamMaps::init(v, 8, 2); }

TrainingBatch constant_batch(double x0, double x1, double t, int y, int n) {
    TrainingBatch b;
    b.x0 = Arr::Constant(n, x0);
    b.x1 = Arr::Constant(n, x1);
    b.t = Arr::Constant(n, t);
    b.y.assign(n, y);
    return b;
}

}  // namespace

TEST_CASE("sample_batch reproduces the bench moments") {
    const DataSpec spec = DataSpec::two_class_1d();
    Rng rng(1234);
    const int n = 1000000;
    const TrainingBatch batch = sample_batch(rng, n, spec);

    double sum_a = 0, sum_b = 0, sum_b2 = 0, sum_x0 = 0, sum_t = 0;
    long n_a = 0, n_b = 0;
    for (int i = 0; i < n; ++i) {
        if (batch.y[i] == 0) {
            sum_a += batch.x1[i];
            ++n_a;
        } else {
            sum_b += batch.x1[i];
            sum_b2 += batch.x1[i] * batch.x1[i];
            ++n_b;
        }
        sum_x0 += batch.x0[i];
        sum_t += batch.t[i];
        CHECK(batch.t[i] >= 0.0);
        CHECK(batch.t[i] <= 1.0);
    }
    const double mean_a = sum_a / n_a;
    const double mean_b = sum_b / n_b;
    const double std_b = std::sqrt(sum_b2 / n_b - mean_b * mean_b);
    CHECK(std::abs(mean_a - (-1.5)) < 0.001);
    CHECK(std::abs(mean_b - 1.5) < 0.001);
    CHECK(std::abs(std_b - 0.2) < 0.001);
    CHECK(std::abs(sum_x0 / n) < 0.004);
    CHECK(std::abs(sum_t / n - 0.5) < 0.002);
    CHECK(std::abs(static_cast<double>(n_a) / n - 0.5) < 0.002);
}

TEST_CASE("sample_batch validates its arguments") {
    Rng rng(0);
    CHECK_THROWS_AS(sample_batch(rng, 0, DataSpec::two_class_1d()), std::domain_error);
}

TEST_CASE("a field equal to the path velocity has zero loss") {
    // constant endpoints: u = x1 - x0 for every sample under the linear schedule
    const Schedule s = linear_schedule();
    const ReparamMaps maps =
        make_maps(Variant::baseline);
    TrainingBatch batch = constant_batch(0.25, 1.75, 0.0, 0, 64);
    Rng rng(5);
    for (int i = 0; i < 64; ++i) batch.t[i] = rng.uniform();

    const VelocityFn exact = [](const Arr& z, const Arr&, const std::vector<int>&) {
        return Arr(Arr::Constant(z.size(), 1.5));
    };
    CHECK(cfm_loss(exact, maps, batch, s) == 0.0);
}

TEST_CASE("single hand-computed loss value") {
    // z0 = 1, z1 = 3, t = 0.25, zero field: loss = (0 - 2)^2 = 4
    const Schedule s = linear_schedule();
    const ReparamMaps maps =
        make_maps(Variant::baseline);
    const TrainingBatch batch = constant_batch(1.0, 3.0, 0.25, 0, 1);
    const VelocityFn zero = [](const Arr& z, const Arr&, const std::vector<int>&) {
        return Arr(Arr::Zero(z.size()));
    };
    CHECK(cfm_loss(zero, maps, batch, s) == 4.0);
}

TEST_CASE("empty batch is rejected") {
    const Schedule s = linear_schedule();
    const ReparamMaps maps =
        make_maps(Variant::baseline);
    TrainingBatch batch;
    batch.x0.resize(0);
    batch.x1.resize(0);
    batch.t.resize(0);
    const VelocityFn zero = [](const Arr& z, const Arr&, const std::vector<int>&) {
        return Arr(Arr::Zero(z.size()));
    };
    CHECK_THROWS_AS(cfm_loss(zero, maps, batch, s), std::domain_error);
}

TEST_CASE("baseline and zero-initialized joint variant agree bit for bit") {
    const Schedule s = linear_schedule();
    const DataSpec spec = DataSpec::two_class_1d();
    Rng rng(77);
    const TrainingBatch batch = sample_batch(rng, 256, spec);
    Rng net_rng(3);
    const VelocityNet net = VelocityNet::init({}, net_rng);

    const ReparamMaps base = make_maps(Variant::baseline);
    const ReparamMaps joint = make_maps(Variant::joint);
    const double l1 = cfm_loss(net_velocity(net), base, batch, s);
    const double l2 = cfm_loss(net_velocity(net), joint, batch, s);
    CHECK(l1 == l2);
}

TEST_CASE("scaling the endpoints quadruples the loss exactly") {
    const Schedule s = linear_schedule();
    const ReparamMaps maps =
        make_maps(Variant::baseline);
    Rng rng(9);
    const TrainingBatch batch = sample_batch(rng, 128, DataSpec::two_class_1d());
    TrainingBatch doubled = batch;
    doubled.x0 *= 2.0;
    doubled.x1 *= 2.0;
    const VelocityFn zero = [](const Arr& z, const Arr&, const std::vector<int>&) {
        return Arr(Arr::Zero(z.size()));
    };
    CHECK(cfm_loss(zero, maps, doubled, s) == 4.0 * cfm_loss(zero, maps, batch, s));
}

TEST_CASE("loss is nonnegative") {
    const Schedule s = linear_schedule();
    Rng rng(11);
    Rng net_rng(12);
    const VelocityNet net = VelocityNet::init({}, net_rng);
    for (Variant v : {Variant::baseline, Variant::joint, Variant::affine_source}) {
        ReparamMaps maps = make_maps(v);
        const TrainingBatch batch = sample_batch(rng, 64, DataSpec::two_class_1d());
        CHECK(cfm_loss(net_velocity(net), maps, batch, s) >= 0.0);
    }
}

TEST_CASE("loss is Monte-Carlo stable across disjoint large batches") {
    const Schedule s = linear_schedule();
    const DataSpec spec = DataSpec::two_class_1d();
    Rng net_rng(42);
    const VelocityNet net = VelocityNet::init({}, net_rng);
    const ReparamMaps maps = make_maps(Variant::baseline);

    Rng rng(1001);
    const int chunks = 64, chunk_size = 1024;
    auto chunked = [&](Arr& means) {
        means.resize(chunks);
        for (int c = 0; c < chunks; ++c) {
            const TrainingBatch b = sample_batch(rng, chunk_size, spec);
            means[c] = cfm_loss(net_velocity(net), maps, b, s);
        }
    };
    Arr means1, means2;
    chunked(means1);
    chunked(means2);
    const double l1 = means1.mean(), l2 = means2.mean();
    const double se1 = std::sqrt((means1 - l1).square().sum() / (chunks - 1) / chunks);
    const double se2 = std::sqrt((means2 - l2).square().sum() / (chunks - 1) / chunks);
    CHECK(std::abs(l1 - l2) < 3.0 * std::sqrt(se1 * se1 + se2 * se2));
}

TEST_CASE("loss_and_grad at the global minimum: zero loss, zero gradients") {
    const Schedule s = linear_schedule();
    const VelocityNet net = VelocityNet::zeros({});
    const ReparamMaps maps = make_maps(Variant::joint);
    // x0 == x1 makes u identically zero; the zero net matches it exactly
    TrainingBatch batch = constant_batch(0.8, 0.8, 0.0, 1, 32);
    Rng rng(2);
    for (int i = 0; i < 32; ++i) batch.t[i] = rng.uniform();

    GradientBundle bundle = make_gradient_bundle(net, maps);
    LossWorkspace ws;
    loss_and_grad(net, maps, batch, s, bundle, ws);
    CHECK(bundle.loss == 0.0);
    for (const auto& [name, g] : bundle.grads) {
        CAPTURE(name);
        CHECK(g.abs().maxCoeff() == 0.0);
    }
}

TEST_CASE("loss_and_grad loss agrees with cfm_loss") {
    const Schedule s = linear_schedule();
    Rng net_rng(15);
    const VelocityNet net = VelocityNet::init({}, net_rng);
    for (Variant v : {Variant::baseline, Variant::joint, Variant::affine_target}) {
        ReparamMaps maps = make_maps(v);
        if (maps.mu1_net()) maps.mu1_net()->b = 0.3;
        Rng rng(16);
        const TrainingBatch batch = sample_batch(rng, 100, DataSpec::two_class_1d());
        GradientBundle bundle = make_gradient_bundle(net, maps);
        LossWorkspace ws;
        loss_and_grad(net, maps, batch, s, bundle, ws);
        const double reference = cfm_loss(net_velocity(net), maps, batch, s);
        CHECK(bundle.loss == doctest::Approx(reference).epsilon(1e-14));
    }
}
