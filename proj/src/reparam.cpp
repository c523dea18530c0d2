#include "flowlab/reparam.hpp"

#include <cmath>

namespace flowlab {

Variant variant_from_string(const std::string& name) {
    if (name == "baseline") return Variant::baseline;
    if (name == "source_only") return Variant::source_only;
    if (name == "target_only") return Variant::target_only;
    if (name == "joint") return Variant::joint;
    if (name == "affine_source") return Variant::affine_source;
    if (name == "affine_target") return Variant::affine_target;
    throw std::domain_error("unknown variant '" + name + "'");
}

std::string to_string(Variant v) {
    switch (v) {
        case Variant::baseline: return "baseline";
        case Variant::source_only: return "source_only";
        case Variant::target_only: return "target_only";
        case Variant::joint: return "joint";
        case Variant::affine_source: return "affine_source";
        case Variant::affine_target: return "affine_target";
    }
    throw std::domain_error("unknown variant enum value");
}

ReparamMaps ReparamMaps::init(Variant v, int embed_dim, int num_classes,
                              bool conditional_source_shift) {
    ReparamMaps maps;
    maps.variant_ = v;
    maps.class_embed_ = Mat::Zero(num_classes, embed_dim);

    const bool source_shift = v == Variant::source_only || v == Variant::joint ||
                              v == Variant::affine_source;
    const bool target_shift = v == Variant::target_only || v == Variant::joint ||
                              v == Variant::affine_target;
    if (source_shift) maps.mu0_ = CondLinear::zeros(embed_dim, conditional_source_shift);
    if (target_shift) maps.mu1_ = CondLinear::zeros(embed_dim);
    if (v == Variant::affine_source) maps.log_s0_ = CondLinear::zeros(embed_dim);
    if (v == Variant::affine_target) maps.log_s1_ = CondLinear::zeros(embed_dim);
    return maps;
}

void ReparamMaps::set_class_embeddings(const Mat& embeddings) {
    if (embeddings.rows() != class_embed_.rows() || embeddings.cols() != class_embed_.cols())
        throw ShapeError("ReparamMaps: class embedding shape changed");
    class_embed_ = embeddings;
}

double ReparamMaps::mu0(int y) const {
    return mu0_ ? mu0_->value(class_embed_.row(y).transpose()) : 0.0;
}
double ReparamMaps::mu1(int y) const {
    return mu1_ ? mu1_->value(class_embed_.row(y).transpose()) : 0.0;
}
double ReparamMaps::sigma0(int y) const {
    return log_s0_ ? std::exp(log_s0_->value(class_embed_.row(y).transpose())) : 1.0;
}
double ReparamMaps::sigma1(int y) const {
    return log_s1_ ? std::exp(log_s1_->value(class_embed_.row(y).transpose())) : 1.0;
}

Arr ReparamMaps::map_source(const Arr& x0, const std::vector<int>& y) const {
    if (static_cast<Eigen::Index>(y.size()) != x0.size())
        throw ShapeError("map_source: batch length mismatch");
    Arr out(x0.size());
    for (Eigen::Index i = 0; i < x0.size(); ++i)
        out[i] = sigma0(y[i]) * x0[i] + mu0(y[i]);
    return out;
}

Arr ReparamMaps::map_target(const Arr& x1, const std::vector<int>& y) const {
    if (static_cast<Eigen::Index>(y.size()) != x1.size())
        throw ShapeError("map_target: batch length mismatch");
    Arr out(x1.size());
    for (Eigen::Index i = 0; i < x1.size(); ++i)
        out[i] = sigma1(y[i]) * x1[i] + mu1(y[i]);
    return out;
}

double ReparamMaps::inverse_target(double z1, int y) const {
    const double s = sigma1(y);
    if (s < kSingularTolerance)
        throw SingularMapError("inverse_target: sigma1 collapsed for class " +
                               std::to_string(y) + " (sigma1 = " + std::to_string(s) + ")");
    return (z1 - mu1(y)) / s;
}

Arr ReparamMaps::inverse_target(const Arr& z1, const std::vector<int>& y) const {
    Arr out(z1.size());
    for (Eigen::Index i = 0; i < z1.size(); ++i) out[i] = inverse_target(z1[i], y[i]);
    return out;
}

void ReparamMaps::accumulate_grads(const Arr& d_z0, const Arr& d_z1, const Arr& x0,
                                   const Arr& x1, const std::vector<int>& y,
                                   NamedArrays& grads, Mat* d_class_embed) const {
    const Eigen::Index b = d_z0.size();
    const int k = num_classes();

    // per-class reductions so the embedding products happen K times, not B
    Arr mu0_sum = Arr::Zero(k), mu1_sum = Arr::Zero(k);
    Arr s0_sum = Arr::Zero(k), s1_sum = Arr::Zero(k);
    for (Eigen::Index i = 0; i < b; ++i) {
        const int c = y[i];
        if (mu0_) mu0_sum[c] += d_z0[i];
        if (mu1_) mu1_sum[c] += d_z1[i];
        // d sigma = d_z * x; d log_s = d_sigma * sigma
        if (log_s0_) s0_sum[c] += d_z0[i] * x0[i] * sigma0(c);
        if (log_s1_) s1_sum[c] += d_z1[i] * x1[i] * sigma1(c);
    }

    auto reduce = [&](const CondLinear& net, const Arr& per_class, const std::string& name) {
        if (net.conditional) {
            Eigen::Map<Vec> gw(grads.at(name + ".w").data(), net.w.size());
            for (int c = 0; c < k; ++c)
                gw.noalias() += per_class[c] * class_embed_.row(c).transpose();
            if (d_class_embed)
                for (int c = 0; c < k; ++c)
                    d_class_embed->row(c) += per_class[c] * net.w.transpose();
        }
        grads.at(name + ".b")[0] += per_class.sum();
    };
    if (mu0_) reduce(*mu0_, mu0_sum, "mu0");
    if (mu1_) reduce(*mu1_, mu1_sum, "mu1");
    if (log_s0_) reduce(*log_s0_, s0_sum, "s0");
    if (log_s1_) reduce(*log_s1_, s1_sum, "s1");
}

NamedArrays ReparamMaps::zero_grads() const {
    NamedArrays grads;
    auto add = [&](const std::optional<CondLinear>& net, const std::string& name) {
        if (!net) return;
        if (net->conditional) grads.add(name + ".w", Arr::Zero(net->w.size()));
        grads.add(name + ".b", Arr::Zero(1));
    };
    add(mu0_, "mu0");
    add(mu1_, "mu1");
    add(log_s0_, "s0");
    add(log_s1_, "s1");
    return grads;
}

std::vector<std::pair<std::string, std::vector<ParamRef>>> ReparamMaps::param_groups() {
    std::vector<std::pair<std::string, std::vector<ParamRef>>> groups;
    auto add = [&](std::optional<CondLinear>& net, const std::string& group,
                   const std::string& name) {
        if (!net) return;
        std::vector<ParamRef> refs;
        if (net->conditional) refs.push_back({name + ".w", net->w.data(), net->w.size()});
        refs.push_back({name + ".b", &net->b, 1});
        groups.emplace_back(group, std::move(refs));
    };
    add(mu0_, "source_shift", "mu0");
    add(mu1_, "target_shift", "mu1");
    add(log_s0_, "source_scale", "s0");
    add(log_s1_, "target_scale", "s1");
    return groups;
}

ShiftEquivalenceResult check_shift_equivalence(double mu0, double mu1,
                                               const Schedule& schedule,
                                               const Arr& t_grid) {
    if (t_grid.size() < 2)
        throw std::domain_error("check_shift_equivalence: need at least 2 grid points");
    ShiftEquivalenceResult res;
    res.residuals.resize(t_grid.size());
    bool ok = true;
    for (Eigen::Index i = 0; i < t_grid.size(); ++i) {
        const double t = t_grid[i];
        if (!(t > 0.0 && t < 1.0))
            throw std::domain_error("check_shift_equivalence: grid must lie in (0,1)");
        res.residuals[i] = std::abs(schedule.beta(t) * mu0 - schedule.alpha(t) * mu1);
        if (res.residuals[i] > 1e-10) ok = false;
    }
    res.equivalent = ok;
    return res;
}

}  // namespace flowlab
