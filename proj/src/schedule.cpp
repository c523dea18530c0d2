#include "flowlab/schedule.hpp"

#include <cmath>
#include <sstream>

namespace flowlab {

Schedule linear_schedule() {
    Schedule s;
    s.name = "linear";
    s.alpha = [](double t) { return t; };
    s.beta = [](double t) { return 1.0 - t; };
    s.alpha_dot = [](double) { return 1.0; };
    s.beta_dot = [](double) { return -1.0; };
    return s;
}

ScheduleValues eval_schedule(const Schedule& s, double t) {
    if (!(t >= 0.0 && t <= 1.0))
        throw std::domain_error("eval_schedule: t outside [0,1]");
    return {s.alpha(t), s.beta(t), s.alpha_dot(t), s.beta_dot(t)};
}

PathPoint interpolate(const Schedule& s, const Vec& z0, const Vec& z1, double t) {
    if (z0.size() != z1.size())
        throw ShapeError("interpolate: endpoint dimension mismatch");
    const ScheduleValues v = eval_schedule(s, t);
    PathPoint p;
    p.z = v.beta * z0 + v.alpha * z1;
    p.u = v.beta_dot * z0 + v.alpha_dot * z1;
    p.t = t;
    return p;
}

namespace {

[[noreturn]] void fail(const std::string& what) {
    throw NumericError("schedule invariant violated: " + what);
}

}  // namespace

void check_schedule_invariants(const Schedule& s) {
    const double tol_boundary = 1e-12;
    if (std::abs(s.alpha(0.0)) > tol_boundary) fail("alpha(0) != 0");
    if (std::abs(s.alpha(1.0) - 1.0) > tol_boundary) fail("alpha(1) != 1");
    if (std::abs(s.beta(0.0) - 1.0) > tol_boundary) fail("beta(0) != 1");
    if (std::abs(s.beta(1.0)) > tol_boundary) fail("beta(1) != 0");

    const int n = 1001;
    double prev_a = s.alpha(0.0), prev_b = s.beta(0.0);
    for (int i = 1; i < n; ++i) {
        const double t = static_cast<double>(i) / (n - 1);
        const double a = s.alpha(t), b = s.beta(t);
        if (a < prev_a) fail("alpha not nondecreasing near t=" + std::to_string(t));
        if (b > prev_b) fail("beta not nonincreasing near t=" + std::to_string(t));
        prev_a = a;
        prev_b = b;
    }

    const double h = 1e-5;
    for (int i = 1; i < n - 1; ++i) {
        const double t = static_cast<double>(i) / (n - 1);
        const double fd_a = (s.alpha(t + h) - s.alpha(t - h)) / (2.0 * h);
        const double fd_b = (s.beta(t + h) - s.beta(t - h)) / (2.0 * h);
        if (std::abs(s.alpha_dot(t) - fd_a) > 1e-6)
            fail("alpha_dot mismatch at t=" + std::to_string(t));
        if (std::abs(s.beta_dot(t) - fd_b) > 1e-6)
            fail("beta_dot mismatch at t=" + std::to_string(t));
    }
}

}  // namespace flowlab
