#include "flowlab/data.hpp"

namespace flowlab {

void DataSpec::validate() const {
    if (dim < 1) throw std::domain_error("DataSpec: dim must be >= 1");
    if (classes.empty()) throw std::domain_error("DataSpec: need at least one class");
    if (label_values.size() != classes.size())
        throw std::domain_error("DataSpec: label_values must match class count");
    for (const auto& comps : classes) {
        if (comps.empty()) throw std::domain_error("DataSpec: class with no components");
        for (const auto& c : comps) {
            if (!(c.stddev > 0.0)) throw std::domain_error("DataSpec: stddev must be > 0");
            if (c.mean.size() != dim) throw std::domain_error("DataSpec: mean dim mismatch");
        }
    }
}

DataSpec DataSpec::two_class_1d() {
    DataSpec spec;
    spec.dim = 1;
    spec.classes = {{{Vec::Constant(1, -1.5), 0.2}}, {{Vec::Constant(1, 1.5), 0.2}}};
    spec.label_values = {-1.0, 1.0};
    spec.validate();
    return spec;
}

DataSpec DataSpec::single_class_1d(double mean, double stddev) {
    DataSpec spec;
    spec.dim = 1;
    spec.classes = {{{Vec::Constant(1, mean), stddev}}};
    spec.label_values = {0.0};
    spec.validate();
    return spec;
}

namespace {

const GaussComponent& pick_component(const std::vector<GaussComponent>& comps, Rng& rng) {
    if (comps.size() == 1) return comps.front();
    return comps[rng.uniform_int(static_cast<int>(comps.size()))];
}

}  // namespace

Mat sample_conditional(const DataSpec& spec, int y, int n, Rng& rng) {
    if (y < 0 || y >= spec.num_classes())
        throw std::domain_error("sample_conditional: invalid class " + std::to_string(y));
    Mat out(n, spec.dim);
    for (int i = 0; i < n; ++i) {
        const GaussComponent& c = pick_component(spec.classes[y], rng);
        for (int d = 0; d < spec.dim; ++d)
            out(i, d) = c.mean[d] + c.stddev * rng.normal();
    }
    return out;
}

double draw_conditional_1d(const DataSpec& spec, int y, Rng& rng) {
    if (y < 0 || y >= spec.num_classes())
        throw std::domain_error("sample_conditional: invalid class " + std::to_string(y));
    const GaussComponent& c = pick_component(spec.classes[y], rng);
    return c.mean[0] + c.stddev * rng.normal();
}

Arr sample_conditional_1d(const DataSpec& spec, int y, int n, Rng& rng) {
    Arr out(n);
    for (int i = 0; i < n; ++i) out[i] = draw_conditional_1d(spec, y, rng);
    return out;
}

}  // namespace flowlab
