#include <doctest.h>

#include <cmath>

#include "flowlab/velocity_net.hpp"

using namespace flowlab;

namespace {

// independent straight-line forward pass for the toy configuration below
// (sin_dim 2, embed_dim 1, one hidden unit): the oracle never touches the
// library's matrix code.
double toy_oracle(const VelocityNet& net, double z, double t, int y) {
    auto embed = [&](int which, double x) {
        const double s = std::sin(x), c = std::cos(x);  // omega_0 = 1
        return net.w_embed[which](0, 0) * s + net.w_embed[which](0, 1) * c +
               net.b_embed[which][0];
    };
    const double h0[3] = {embed(0, z), embed(1, net.config().label_values[y]), embed(2, t)};
    double pre = net.b_hidden[0][0];
    for (int i = 0; i < 3; ++i) pre += net.w_hidden[0](0, i) * h0[i];
    const double act = 0.5 * pre * (1.0 + std::erf(pre / std::sqrt(2.0)));
    return net.w_out(0, 0) * act + net.b_out[0];
}

}  // namespace

TEST_CASE("default configuration has exactly 1993 trainable scalars") {
    const NetConfig cfg;
    CHECK(cfg.param_count() == 1993);
    Rng rng(0);
    VelocityNet net = VelocityNet::init(cfg, rng);
    long total = 0;
    for (const ParamRef& r : net.param_refs()) total += r.size;
    CHECK(total == 1993);
}

TEST_CASE("parameter count formula for a non-default width") {
    NetConfig cfg;
    cfg.sin_dim = 4;
    cfg.embed_dim = 6;
    cfg.hidden = {10, 12};
    // 3*(4*6+6) + (18*10+10) + (10*12+12) + (12+1)
    CHECK(cfg.param_count() == 90 + 190 + 132 + 13);
}

TEST_CASE("all-zero network outputs zero everywhere") {
    const VelocityNet net = VelocityNet::zeros({});
    Rng rng(1);
    for (int trial = 0; trial < 20; ++trial)
        CHECK(net.forward1(rng.normal() * 2, rng.uniform(), trial % 2) == 0.0);
}

TEST_CASE("forward is deterministic") {
    Rng rng(2);
    const VelocityNet net = VelocityNet::init({}, rng);
    Arr z(5), t(5);
    std::vector<int> y(5);
    for (int i = 0; i < 5; ++i) {
        z[i] = rng.normal();
        t[i] = rng.uniform();
        y[i] = i % 2;
    }
    const Arr a = net.forward(z, t, y);
    const Arr b = net.forward(z, t, y);
    for (int i = 0; i < 5; ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("batched forward matches single-sample forward") {
    Rng rng(4);
    const VelocityNet net = VelocityNet::init({}, rng);
    Arr z(7), t(7);
    std::vector<int> y(7);
    for (int i = 0; i < 7; ++i) {
        z[i] = rng.normal() * 2;
        t[i] = rng.uniform();
        y[i] = i % 2;
    }
    const Arr batched = net.forward(z, t, y);
    for (int i = 0; i < 7; ++i)
        CHECK(batched[i] == doctest::Approx(net.forward1(z[i], t[i], y[i])).epsilon(1e-12));
}

TEST_CASE("toy network matches a hand-written GELU composition") {
    NetConfig cfg;
    cfg.sin_dim = 2;
    cfg.embed_dim = 1;
    cfg.hidden = {1};
    cfg.freq_base = 10.0;  // irrelevant for sin_dim=2: omega_0 = 1
    Rng rng(6);
    VelocityNet net = VelocityNet::init(cfg, rng);
    CHECK(net.param_count() == 3 * 3 + 4 + 2);

    for (int trial = 0; trial < 30; ++trial) {
        const double z = rng.normal() * 2, t = rng.uniform();
        const int y = trial % 2;
        CHECK(net.forward1(z, t, y) == doctest::Approx(toy_oracle(net, z, t, y)).epsilon(1e-14));
    }
}

TEST_CASE("invalid class index raises a domain error") {
    Rng rng(8);
    const VelocityNet net = VelocityNet::init({}, rng);
    CHECK_THROWS_AS(net.forward1(0.0, 0.5, 2), std::domain_error);
    CHECK_THROWS_AS(net.forward1(0.0, 0.5, -1), std::domain_error);
}

TEST_CASE("forward is Lipschitz in z on sampled regions") {
    Rng rng(9);
    const VelocityNet net = VelocityNet::init({}, rng);
    // estimate a slope bound, then verify small perturbations respect it
    double slope_bound = 0.0;
    for (int i = 0; i < 100; ++i) {
        const double z = rng.uniform(-4.0, 4.0), t = rng.uniform();
        const int y = i % 2;
        const double d = (net.forward1(z + 1e-4, t, y) - net.forward1(z - 1e-4, t, y)) / 2e-4;
        slope_bound = std::max(slope_bound, std::abs(d));
    }
    const double lipschitz = 2.0 * slope_bound + 1.0;
    for (int i = 0; i < 200; ++i) {
        const double z = rng.uniform(-4.0, 4.0), t = rng.uniform();
        const double eps = rng.uniform(1e-6, 1e-3);
        const int y = i % 2;
        CHECK(std::abs(net.forward1(z + eps, t, y) - net.forward1(z, t, y)) <=
              lipschitz * eps);
    }
}

TEST_CASE("gelu matches its definition and derivative") {
    CHECK(gelu(0.0) == 0.0);
    Rng rng(10);
    for (int i = 0; i < 50; ++i) {
        const double x = rng.normal() * 2;
        const double fd = (gelu(x + 1e-6) - gelu(x - 1e-6)) / 2e-6;
        CHECK(gelu_derivative(x) == doctest::Approx(fd).epsilon(1e-7));
    }
}
