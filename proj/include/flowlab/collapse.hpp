#pragma once

#include <functional>
#include <string>

#include "flowlab/objective.hpp"
#include "flowlab/reparam.hpp"
#include "flowlab/schedule.hpp"

namespace flowlab {

// Degenerate endpoint-map patterns that zero the flow-matching loss. The
// unbounded cases are represented by their limiting fields rather than by
// infinite parameters.
enum class CollapseCase {
    constant_source,   // f(x0, y) = c
    constant_target,   // g(x1, y) = c
    unbounded_source,  // ||f|| -> inf
    unbounded_target,  // ||g|| -> inf
    proportional,      // z0 = mu, z1 = k mu (both endpoints pinned)
};

CollapseCase collapse_case_from_string(const std::string& name);
std::string to_string(CollapseCase c);

struct CollapseSpec {
    CollapseCase kind = CollapseCase::constant_source;
    double mu = 0.0;  // the constant c (cases i/ii/v)
    double k = 1.0;   // proportionality factor (case v)
};

// Velocity field affine in the state: v(z, t) = gamma(t) z + eta(t).
struct AffineField {
    std::function<double(double)> gamma;
    std::function<double(double)> eta;

    double operator()(double z, double t) const { return gamma(t) * z + eta(t); }
};

// The zero-loss field for a collapse pattern:
//   constant source:  gamma = alpha_dot/alpha,  eta = c (beta_dot - gamma beta)
//   constant target:  gamma = beta_dot/beta,    eta = c (alpha_dot - gamma alpha)
//   unbounded source: gamma = beta_dot/beta,    eta = 0
//   unbounded target: gamma = alpha_dot/alpha,  eta = 0
//   proportional:     gamma = 0,                eta = (k - 1) mu   (linear schedule)
// Evaluation throws PoleError where the denominators vanish (t = 0 for the
// alpha-based cases, t = 1 for the beta-based ones).
AffineField collapsed_field(const CollapseSpec& spec, const Schedule& schedule);

// Samples (z0, z1) on the case's degeneracy manifold with t ~ U(0.01, 0.99)
// and returns the largest absolute residual of
//   gamma (beta z0 + alpha z1) + eta - (beta_dot z0 + alpha_dot z1).
double verify_pointwise_identity(const CollapseSpec& spec, const Schedule& schedule,
                                 Rng& rng, int n_trials);

// Monte-Carlo estimate of E || v(z_t, t, y) - v*(z_t, t, y) ||^2 for a
// model with affine maps, where v* is the matching collapse field
// instantiated from the currently learned shifts. Batch times are remapped
// into the (0.01, 0.99) window to stay clear of the field's poles.
double collapse_gap(const VelocityFn& v, const ReparamMaps& maps,
                    const Schedule& schedule, const TrainingBatch& batch);

}  // namespace flowlab
