#include "flowlab/objective.hpp"

namespace flowlab {

void TrainingBatch::validate() const {
    const Eigen::Index n = x0.size();
    if (n == 0) throw std::domain_error("TrainingBatch: empty batch");
    if (x1.size() != n || t.size() != n || static_cast<Eigen::Index>(y.size()) != n)
        throw ShapeError("TrainingBatch: arrays disagree on length");
    for (Eigen::Index i = 0; i < n; ++i)
        if (!(t[i] >= 0.0 && t[i] <= 1.0))
            throw std::domain_error("TrainingBatch: t outside [0,1]");
}

TrainingBatch sample_batch(Rng& rng, int size, const DataSpec& spec) {
    if (size < 1) throw std::domain_error("sample_batch: size must be >= 1");
    spec.validate();
    TrainingBatch batch;
    batch.x0.resize(size);
    batch.x1.resize(size);
    batch.t.resize(size);
    batch.y.resize(size);
    const int k = spec.num_classes();
    for (int i = 0; i < size; ++i) {
        batch.y[i] = rng.uniform_int(k);
        batch.x0[i] = rng.normal();
        batch.x1[i] = draw_conditional_1d(spec, batch.y[i], rng);
        batch.t[i] = rng.uniform();
    }
    return batch;
}

namespace {

void eval_schedule_batch(const Schedule& s, const Arr& t, Arr& alpha, Arr& beta,
                         Arr& alpha_dot, Arr& beta_dot) {
    const Eigen::Index n = t.size();
    alpha.resize(n);
    beta.resize(n);
    alpha_dot.resize(n);
    beta_dot.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const ScheduleValues v = eval_schedule(s, t[i]);
        alpha[i] = v.alpha;
        beta[i] = v.beta;
        alpha_dot[i] = v.alpha_dot;
        beta_dot[i] = v.beta_dot;
    }
}

}  // namespace

double cfm_loss_endpoints(const VelocityFn& v, const Arr& z0, const Arr& z1,
                          const Arr& t, const std::vector<int>& y,
                          const Schedule& schedule) {
    const Eigen::Index n = z0.size();
    if (n == 0) throw std::domain_error("cfm_loss: empty batch");
    Arr alpha, beta, alpha_dot, beta_dot;
    eval_schedule_batch(schedule, t, alpha, beta, alpha_dot, beta_dot);
    const Arr zt = beta * z0 + alpha * z1;
    const Arr u = beta_dot * z0 + alpha_dot * z1;
    const Arr pred = v(zt, t, y);
    return (pred - u).square().mean();
}

double cfm_loss(const VelocityFn& v, const ReparamMaps& maps,
                const TrainingBatch& batch, const Schedule& schedule) {
    batch.validate();
    return cfm_loss_endpoints(v, maps.map_source(batch.x0, batch.y),
                              maps.map_target(batch.x1, batch.y), batch.t, batch.y,
                              schedule);
}

GradientBundle make_gradient_bundle(const VelocityNet& net, const ReparamMaps& maps) {
    GradientBundle bundle;
    bundle.grads = zero_grads_like(net);
    for (const auto& [name, arr] : maps.zero_grads()) bundle.grads.add(name, arr);
    return bundle;
}

void loss_and_grad(const VelocityNet& net, const ReparamMaps& maps,
                   const TrainingBatch& batch, const Schedule& schedule,
                   GradientBundle& out, LossWorkspace& ws) {
    batch.validate();
    const Eigen::Index n = batch.size();

    // the shift/scale heads read the net's current class embeddings
    ws.synced_maps = maps;
    ws.synced_maps.set_class_embeddings(net.class_embeddings());
    const ReparamMaps& live = ws.synced_maps;

    eval_schedule_batch(schedule, batch.t, ws.alpha, ws.beta, ws.alpha_dot, ws.beta_dot);
    ws.z0 = live.map_source(batch.x0, batch.y);
    ws.z1 = live.map_target(batch.x1, batch.y);
    ws.zt = ws.beta * ws.z0 + ws.alpha * ws.z1;
    ws.u = ws.beta_dot * ws.z0 + ws.alpha_dot * ws.z1;

    net_forward_cached(net, ws.zt, batch.t, batch.y, ws.cache);
    ws.residual = ws.cache.v - ws.u;
    out.loss = ws.residual.square().mean();

    for (auto& [name, g] : out.grads) g.setZero();

    const Arr d_v = ws.residual * (2.0 / static_cast<double>(n));
    const Arr d_zt = net_backward(net, ws.cache, d_v, out.grads);
    // the target velocity depends on the endpoints too: d u = -d_v
    const Arr d_z0 = d_zt * ws.beta - d_v * ws.beta_dot;
    const Arr d_z1 = d_zt * ws.alpha - d_v * ws.alpha_dot;
    ws.d_class_embed = Mat::Zero(net.class_embeddings().rows(), net.config().embed_dim);
    live.accumulate_grads(d_z0, d_z1, batch.x0, batch.x1, batch.y, out.grads,
                          &ws.d_class_embed);
    // embedding coupling: the heads' inputs are themselves trainable
    {
        Eigen::Map<Mat> gw(out.grads.at("embed_y.w").data(), net.config().embed_dim,
                           net.config().sin_dim);
        gw.noalias() += ws.d_class_embed.transpose() * net.class_features;
        Eigen::Map<Vec> gb(out.grads.at("embed_y.b").data(), net.config().embed_dim);
        gb.noalias() += ws.d_class_embed.colwise().sum().transpose();
    }
}

}  // namespace flowlab
