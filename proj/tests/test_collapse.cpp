#include <doctest.h>

#include <cmath>

#include "flowlab/collapse.hpp"

using namespace flowlab;

TEST_CASE("constant-source field closed form") {
    // mu0 = 0.5, t = 0.5: v*(z) = (z - 0.5) / 0.5 = 2z - 1
    const AffineField f =
        collapsed_field({CollapseCase::constant_source, 0.5, 1.0}, linear_schedule());
    CHECK(f.gamma(0.5) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(f.eta(0.5) == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(f(1.0, 0.5) == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("constant-target field closed form") {
    // mu1 = 1, t = 0.75: v*(z) = (1 - z) / 0.25 = 4 - 4z
    const AffineField f =
        collapsed_field({CollapseCase::constant_target, 1.0, 1.0}, linear_schedule());
    CHECK(f.gamma(0.75) == doctest::Approx(-4.0).epsilon(1e-13));
    CHECK(f.eta(0.75) == doctest::Approx(4.0).epsilon(1e-13));
}

TEST_CASE("proportional field is constant") {
    // k = 2, mu = 0.3: v*(z) = (k - 1) mu = 0.3 for all z
    const AffineField f =
        collapsed_field({CollapseCase::proportional, 0.3, 2.0}, linear_schedule());
    for (double z : {-5.0, 0.0, 7.0})
        for (double t : {0.1, 0.5, 0.9})
            CHECK(f(z, t) == doctest::Approx(0.3).epsilon(1e-14));
}

TEST_CASE("unbounded cases share their slope with the constant cases") {
    // gamma printed in the closed-form table: 1/t for source-pinned cases,
    // -1/(1-t) for target-pinned ones; cross-checked against the general
    // alpha_dot/alpha and beta_dot/beta construction
    const Schedule s = linear_schedule();
    const AffineField const_src = collapsed_field({CollapseCase::constant_source, 0.4, 1}, s);
    const AffineField unb_tgt = collapsed_field({CollapseCase::unbounded_target, 0, 1}, s);
    const AffineField const_tgt = collapsed_field({CollapseCase::constant_target, 0.4, 1}, s);
    const AffineField unb_src = collapsed_field({CollapseCase::unbounded_source, 0, 1}, s);
    Rng rng(3);
    for (int i = 0; i < 100; ++i) {
        const double t = rng.uniform(0.01, 0.99);
        CHECK(const_src.gamma(t) == unb_tgt.gamma(t));
        CHECK(const_src.gamma(t) == doctest::Approx(1.0 / t).epsilon(1e-12));
        CHECK(const_tgt.gamma(t) == unb_src.gamma(t));
        CHECK(const_tgt.gamma(t) == doctest::Approx(-1.0 / (1.0 - t)).epsilon(1e-12));
        CHECK(unb_src.eta(t) == 0.0);
        CHECK(unb_tgt.eta(t) == 0.0);
    }
}

TEST_CASE("fields have poles at the expected endpoints") {
    const Schedule s = linear_schedule();
    const AffineField src = collapsed_field({CollapseCase::constant_source, 0.5, 1}, s);
    CHECK_THROWS_AS(src.gamma(0.0), PoleError);
    CHECK_NOTHROW(src.gamma(1.0));
    const AffineField tgt = collapsed_field({CollapseCase::constant_target, 0.5, 1}, s);
    CHECK_THROWS_AS(tgt.gamma(1.0), PoleError);
    CHECK_NOTHROW(tgt.gamma(0.0));
    const AffineField unb_s = collapsed_field({CollapseCase::unbounded_source, 0, 1}, s);
    CHECK_THROWS_AS(unb_s.gamma(1.0), PoleError);
    const AffineField unb_t = collapsed_field({CollapseCase::unbounded_target, 0, 1}, s);
    CHECK_THROWS_AS(unb_t.gamma(0.0), PoleError);
}

TEST_CASE("pointwise identity holds to 1e-10 on every collapse manifold") {
    const Schedule s = linear_schedule();
    const std::vector<CollapseSpec> specs = {
        {CollapseCase::constant_source, 0.5, 1.0},
        {CollapseCase::constant_target, -0.8, 1.0},
        {CollapseCase::unbounded_source, 0.0, 1.0},
        {CollapseCase::unbounded_target, 0.0, 1.0},
        {CollapseCase::proportional, 0.3, 2.0},
    };
    for (const CollapseSpec& spec : specs) {
        CAPTURE(to_string(spec.kind));
        Rng rng(7 + static_cast<int>(spec.kind));
        CHECK(verify_pointwise_identity(spec, s, rng, 10000) <= 1e-10);
    }
}

TEST_CASE("the identity fails off the collapse manifold") {
    // free (z0, z1) under the constant-source field: residuals are O(1)
    const Schedule s = linear_schedule();
    const AffineField f = collapsed_field({CollapseCase::constant_source, 0.5, 1.0}, s);
    Rng rng(9);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const double t = rng.uniform(0.05, 0.95);
        const double z0 = 2.0 * rng.normal();  // not pinned to mu0
        const double z1 = 2.0 * rng.normal();
        const ScheduleValues v = eval_schedule(s, t);
        const double zt = v.beta * z0 + v.alpha * z1;
        const double u = v.beta_dot * z0 + v.alpha_dot * z1;
        worst = std::max(worst, std::abs(f(zt, t) - u));
    }
    CHECK(worst > 0.1);
}

TEST_CASE("collapse gap vanishes when the model equals the analytic field") {
    const Schedule s = linear_schedule();
    ReparamMaps maps = ReparamMaps::init(Variant::affine_source, 8, 2);
    maps.mu0_net()->b = 0.4;  // same shift for both classes
    const AffineField field = collapsed_field({CollapseCase::constant_source, 0.4, 1.0}, s);
    const VelocityFn model = [field](const Arr& z, const Arr& t, const std::vector<int>&) {
        Arr out(z.size());
        for (Eigen::Index i = 0; i < z.size(); ++i) out[i] = field(z[i], t[i]);
        return out;
    };
    Rng rng(11);
    const TrainingBatch batch = sample_batch(rng, 4096, DataSpec::two_class_1d());
    CHECK(collapse_gap(model, maps, s, batch) <= 1e-20);
}

TEST_CASE("collapse gap of the zero model matches quadrature") {
    // affine_source at init: z0 = x0, mu0 = 0, so v* = z/t and the gap is
    // E[(z_t / t)^2] with z_t = (1-t') x0 + t' x1 over the evaluation window.
    const Schedule s = linear_schedule();
    const ReparamMaps maps = ReparamMaps::init(Variant::affine_source, 8, 2);
    const VelocityNet net = VelocityNet::zeros({});
    Rng rng(13);
    const TrainingBatch batch = sample_batch(rng, 400000, DataSpec::two_class_1d());
    const double mc = collapse_gap(net_velocity(net), maps, s, batch);

    // independent quadrature over t' = 0.01 + 0.98 u:
    // E[z_t^2 | t] = (1-t)^2 + t^2 (m^2 + 0.04), m = +-1.5
    const int n = 200000;
    double quad = 0.0;
    for (int i = 0; i < n; ++i) {
        const double t = 0.01 + 0.98 * (i + 0.5) / n;
        quad += ((1 - t) * (1 - t) + t * t * (2.25 + 0.04)) / (t * t) / n;
    }
    CHECK(mc == doctest::Approx(quad).epsilon(0.02));
}

TEST_CASE("collapse gap is invariant to batch order") {
    const Schedule s = linear_schedule();
    ReparamMaps maps = ReparamMaps::init(Variant::affine_target, 8, 2);
    maps.mu1_net()->b = -0.2;
    Rng net_rng(15);
    const VelocityNet net = VelocityNet::init({}, net_rng);
    Rng rng(16);
    TrainingBatch batch = sample_batch(rng, 512, DataSpec::two_class_1d());
    const double gap1 = collapse_gap(net_velocity(net), maps, s, batch);

    // reverse the batch
    TrainingBatch rev = batch;
    const Eigen::Index n = batch.size();
    for (Eigen::Index i = 0; i < n; ++i) {
        rev.x0[i] = batch.x0[n - 1 - i];
        rev.x1[i] = batch.x1[n - 1 - i];
        rev.t[i] = batch.t[n - 1 - i];
        rev.y[i] = batch.y[n - 1 - i];
    }
    const double gap2 = collapse_gap(net_velocity(net), maps, s, rev);
    CHECK(gap1 == doctest::Approx(gap2).epsilon(1e-12));
}

TEST_CASE("degenerate endpoint substitution drives the training loss to machine zero") {
    // constant-source maps plus the matching affine field: the objective
    // cannot distinguish them from a perfect model
    const Schedule s = linear_schedule();
    Rng rng(21);
    const int n = 4096;
    const double mu0 = 0.45;
    Arr z0 = Arr::Constant(n, mu0);
    Arr z1(n), t(n);
    std::vector<int> y(n, 0);
    for (int i = 0; i < n; ++i) {
        z1[i] = rng.normal() * 1.5;
        t[i] = rng.uniform(0.01, 0.99);
    }
    const AffineField field = collapsed_field({CollapseCase::constant_source, mu0, 1.0}, s);
    const VelocityFn model = [field](const Arr& z, const Arr& tt, const std::vector<int>&) {
        Arr out(z.size());
        for (Eigen::Index i = 0; i < z.size(); ++i) out[i] = field(z[i], tt[i]);
        return out;
    };
    CHECK(cfm_loss_endpoints(model, z0, z1, t, y, s) <= 1e-20);
}
