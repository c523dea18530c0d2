#pragma once

#include <functional>
#include <string>

#include "flowlab/types.hpp"

namespace flowlab {

// Noise schedule pair (alpha_t, beta_t) with time derivatives. alpha ramps
// 0 -> 1, beta ramps 1 -> 0 over t in [0, 1]; together they define the
// Gaussian interpolation path between source and target samples.
struct Schedule {
    std::string name;
    std::function<double(double)> alpha;
    std::function<double(double)> beta;
    std::function<double(double)> alpha_dot;
    std::function<double(double)> beta_dot;
};

struct ScheduleValues {
    double alpha;
    double beta;
    double alpha_dot;
    double beta_dot;
};

// alpha_t = t, beta_t = 1 - t: straight-line interpolants.
Schedule linear_schedule();

// Evaluates all four schedule functions at t. Throws std::domain_error for
// t outside [0, 1].
ScheduleValues eval_schedule(const Schedule& s, double t);

// One point on the interpolation path: latent z_t and the regression
// target velocity u_t.
struct PathPoint {
    Vec z;
    Vec u;
    double t;
};

// z_t = beta_t z0 + alpha_t z1, u_t = beta_dot z0 + alpha_dot z1.
// Throws ShapeError if z0 and z1 have different sizes.
PathPoint interpolate(const Schedule& s, const Vec& z0, const Vec& z1, double t);

// Scalar fast path used by the training loop.
inline double interpolate_z(const ScheduleValues& v, double z0, double z1) {
    return v.beta * z0 + v.alpha * z1;
}
inline double interpolate_u(const ScheduleValues& v, double z0, double z1) {
    return v.beta_dot * z0 + v.alpha_dot * z1;
}

// Checks boundary conditions, monotonicity on a 1001-point grid, and
// derivative consistency by central finite differences. Throws
// NumericError describing the first violated condition.
void check_schedule_invariants(const Schedule& s);

}  // namespace flowlab
