#include "flowlab/collapse.hpp"

#include <cmath>

namespace flowlab {

CollapseCase collapse_case_from_string(const std::string& name) {
    if (name == "constant_source") return CollapseCase::constant_source;
    if (name == "constant_target") return CollapseCase::constant_target;
    if (name == "unbounded_source") return CollapseCase::unbounded_source;
    if (name == "unbounded_target") return CollapseCase::unbounded_target;
    if (name == "proportional") return CollapseCase::proportional;
    throw std::domain_error("unknown collapse case '" + name + "'");
}

std::string to_string(CollapseCase c) {
    switch (c) {
        case CollapseCase::constant_source: return "constant_source";
        case CollapseCase::constant_target: return "constant_target";
        case CollapseCase::unbounded_source: return "unbounded_source";
        case CollapseCase::unbounded_target: return "unbounded_target";
        case CollapseCase::proportional: return "proportional";
    }
    throw std::domain_error("unknown collapse case enum value");
}

namespace {

constexpr double kPoleTol = 1e-14;

std::function<double(double)> gamma_alpha(const Schedule& s) {
    return [s](double t) {
        const double a = s.alpha(t);
        if (std::abs(a) < kPoleTol)
            throw PoleError("collapsed field: alpha pole at t = " + std::to_string(t));
        return s.alpha_dot(t) / a;
    };
}

std::function<double(double)> gamma_beta(const Schedule& s) {
    return [s](double t) {
        const double b = s.beta(t);
        if (std::abs(b) < kPoleTol)
            throw PoleError("collapsed field: beta pole at t = " + std::to_string(t));
        return s.beta_dot(t) / b;
    };
}

}  // namespace

AffineField collapsed_field(const CollapseSpec& spec, const Schedule& s) {
    AffineField f;
    const double c = spec.mu;
    switch (spec.kind) {
        case CollapseCase::constant_source:
            f.gamma = gamma_alpha(s);
            f.eta = [s, c, g = f.gamma](double t) { return c * (s.beta_dot(t) - g(t) * s.beta(t)); };
            break;
        case CollapseCase::constant_target:
            f.gamma = gamma_beta(s);
            f.eta = [s, c, g = f.gamma](double t) { return c * (s.alpha_dot(t) - g(t) * s.alpha(t)); };
            break;
        case CollapseCase::unbounded_source:
            f.gamma = gamma_beta(s);
            f.eta = [](double) { return 0.0; };
            break;
        case CollapseCase::unbounded_target:
            f.gamma = gamma_alpha(s);
            f.eta = [](double) { return 0.0; };
            break;
        case CollapseCase::proportional: {
            const double eta = (spec.k - 1.0) * spec.mu;
            f.gamma = [](double) { return 0.0; };
            f.eta = [eta](double) { return eta; };
            break;
        }
    }
    return f;
}

double verify_pointwise_identity(const CollapseSpec& spec, const Schedule& s,
                                 Rng& rng, int n_trials) {
    if (n_trials < 1) throw std::domain_error("verify_pointwise_identity: n_trials >= 1");
    const AffineField field = collapsed_field(spec, s);
    double worst = 0.0;
    for (int i = 0; i < n_trials; ++i) {
        const double t = rng.uniform(0.01, 0.99);
        double z0 = 0.0, z1 = 0.0;
        switch (spec.kind) {
            case CollapseCase::constant_source:
                z0 = spec.mu;
                z1 = 2.0 * rng.normal();
                break;
            case CollapseCase::constant_target:
                z1 = spec.mu;
                z0 = 2.0 * rng.normal();
                break;
            case CollapseCase::unbounded_source:
                z1 = 0.0;
                z0 = 2.0 * rng.normal();
                break;
            case CollapseCase::unbounded_target:
                z0 = 0.0;
                z1 = 2.0 * rng.normal();
                break;
            case CollapseCase::proportional:
                z0 = spec.mu;
                z1 = spec.k * spec.mu;
                break;
        }
        const ScheduleValues v = eval_schedule(s, t);
        const double zt = v.beta * z0 + v.alpha * z1;
        const double u = v.beta_dot * z0 + v.alpha_dot * z1;
        worst = std::max(worst, std::abs(field(zt, t) - u));
    }
    return worst;
}

double collapse_gap(const VelocityFn& v, const ReparamMaps& maps,
                    const Schedule& schedule, const TrainingBatch& batch) {
    batch.validate();
    CollapseSpec spec;
    const bool source_case = maps.variant() == Variant::affine_source;
    if (!source_case && maps.variant() != Variant::affine_target)
        throw std::domain_error("collapse_gap: needs an affine variant");
    spec.kind = source_case ? CollapseCase::constant_source : CollapseCase::constant_target;

    std::vector<AffineField> field_per_class;
    for (int c = 0; c < maps.num_classes(); ++c) {
        spec.mu = source_case ? maps.mu0(c) : maps.mu1(c);
        field_per_class.push_back(collapsed_field(spec, schedule));
    }

    const Eigen::Index n = batch.size();
    Arr t_win = 0.01 + 0.98 * batch.t;
    const Arr z0 = maps.map_source(batch.x0, batch.y);
    const Arr z1 = maps.map_target(batch.x1, batch.y);
    Arr zt(n), target(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const ScheduleValues sv = eval_schedule(schedule, t_win[i]);
        zt[i] = sv.beta * z0[i] + sv.alpha * z1[i];
        target[i] = field_per_class[batch.y[i]](zt[i], t_win[i]);
    }
    const Arr pred = v(zt, t_win, batch.y);
    return (pred - target).square().mean();
}

}  // namespace flowlab
