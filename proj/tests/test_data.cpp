#include <doctest.h>

#include <cmath>

#include "flowlab/data.hpp"

using namespace flowlab;

TEST_CASE("bench spec moments at one million draws") {
    const DataSpec spec = DataSpec::two_class_1d();
    Rng rng(2024);
    const Arr a = sample_conditional_1d(spec, 0, 1000000, rng);
    CHECK(std::abs(a.mean() - (-1.5)) < 0.001);
    const double sd = std::sqrt((a - a.mean()).square().mean());
    CHECK(std::abs(sd - 0.2) < 0.001);
}

TEST_CASE("invalid specs are rejected at construction") {
    DataSpec spec;
    spec.dim = 1;
    spec.classes = {{{Vec::Constant(1, 0.0), 0.0}}};  // zero std
    spec.label_values = {0.0};
    CHECK_THROWS_AS(spec.validate(), std::domain_error);

    DataSpec empty;
    empty.label_values = {};
    CHECK_THROWS_AS(empty.validate(), std::domain_error);

    DataSpec mismatch = DataSpec::two_class_1d();
    mismatch.label_values = {0.0};
    CHECK_THROWS_AS(mismatch.validate(), std::domain_error);
}

TEST_CASE("invalid class index is rejected") {
    const DataSpec spec = DataSpec::two_class_1d();
    Rng rng(1);
    CHECK_THROWS_AS(sample_conditional(spec, 2, 10, rng), std::domain_error);
    CHECK_THROWS_AS(sample_conditional(spec, -1, 10, rng), std::domain_error);
}

TEST_CASE("2D spec has isotropic empirical covariance") {
    DataSpec spec;
    spec.dim = 2;
    Vec m0(2), m1(2);
    m0 << -1.0, -1.0;
    m1 << 1.0, 1.0;
    spec.classes = {{{m0, 0.3}}, {{m1, 0.3}}};
    spec.label_values = {0.0, 1.0};
    spec.validate();

    Rng rng(77);
    const Mat draws = sample_conditional(spec, 1, 200000, rng);
    const Vec mean = draws.colwise().mean().transpose();
    CHECK(std::abs(mean[0] - 1.0) < 0.01);
    CHECK(std::abs(mean[1] - 1.0) < 0.01);
    const Mat centered = draws.rowwise() - mean.transpose();
    const Mat cov = centered.transpose() * centered / static_cast<double>(draws.rows());
    CHECK(std::abs(cov(0, 0) - 0.09) < 0.01);
    CHECK(std::abs(cov(1, 1) - 0.09) < 0.01);
    CHECK(std::abs(cov(0, 1)) < 0.01);
}

TEST_CASE("multi-component classes mix their components") {
    DataSpec spec;
    spec.dim = 1;
    spec.classes = {{{Vec::Constant(1, -2.0), 0.1}, {Vec::Constant(1, 2.0), 0.1}}};
    spec.label_values = {0.0};
    spec.validate();
    Rng rng(5);
    const Arr draws = sample_conditional_1d(spec, 0, 100000, rng);
    CHECK(std::abs(draws.mean()) < 0.03);  // symmetric mixture
    int low = 0;
    for (int i = 0; i < draws.size(); ++i)
        if (draws[i] < 0) ++low;
    CHECK(std::abs(low / 100000.0 - 0.5) < 0.01);
}

TEST_CASE("seeded draws are reproducible") {
    const DataSpec spec = DataSpec::two_class_1d();
    Rng r1(9), r2(9);
    const Arr a = sample_conditional_1d(spec, 1, 100, r1);
    const Arr b = sample_conditional_1d(spec, 1, 100, r2);
    for (int i = 0; i < 100; ++i) CHECK(a[i] == b[i]);
}
