#include "flowlab/velocity_net.hpp"

#include <unsupported/Eigen/SpecialFunctions>

#include <cmath>

namespace flowlab {

namespace {

constexpr double kInvSqrt2 = 0.7071067811865475244;
constexpr double kInvSqrt2Pi = 0.3989422804014326779;

void fill_uniform(Mat& w, double bound, Rng& rng) {
    for (Eigen::Index c = 0; c < w.cols(); ++c)
        for (Eigen::Index r = 0; r < w.rows(); ++r)
            w(r, c) = rng.uniform(-bound, bound);
}

void fill_uniform(Vec& b, double bound, Rng& rng) {
    for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = rng.uniform(-bound, bound);
}

}  // namespace

void NetConfig::validate() const {
    EmbeddingSpec spec{sin_dim, freq_base};
    spec.validate();
    if (embed_dim <= 0) throw std::domain_error("NetConfig: embed_dim must be positive");
    if (hidden.empty()) throw std::domain_error("NetConfig: need at least one hidden layer");
    for (int h : hidden)
        if (h <= 0) throw std::domain_error("NetConfig: hidden widths must be positive");
    if (label_values.empty())
        throw std::domain_error("NetConfig: need at least one class label value");
}

long NetConfig::param_count() const {
    long n = 3L * (static_cast<long>(sin_dim) * embed_dim + embed_dim);
    int in = 3 * embed_dim;
    for (int h : hidden) {
        n += static_cast<long>(in) * h + h;
        in = h;
    }
    n += in + 1;  // output head
    return n;
}

VelocityNet VelocityNet::zeros(const NetConfig& cfg) {
    cfg.validate();
    VelocityNet net;
    net.cfg_ = cfg;
    for (int i = 0; i < 3; ++i) {
        net.w_embed[i] = Mat::Zero(cfg.embed_dim, cfg.sin_dim);
        net.b_embed[i] = Vec::Zero(cfg.embed_dim);
    }
    int in = 3 * cfg.embed_dim;
    for (int h : cfg.hidden) {
        net.w_hidden.push_back(Mat::Zero(h, in));
        net.b_hidden.push_back(Vec::Zero(h));
        in = h;
    }
    net.w_out = Mat::Zero(1, in);
    net.b_out = Vec::Zero(1);
    net.rebuild_caches();
    return net;
}

VelocityNet VelocityNet::init(const NetConfig& cfg, Rng& rng) {
    // uniform fan-in weights, zero biases
    VelocityNet net = zeros(cfg);
    for (int i = 0; i < 3; ++i) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(cfg.sin_dim));
        fill_uniform(net.w_embed[i], bound, rng);
    }
    for (std::size_t l = 0; l < net.w_hidden.size(); ++l) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(net.w_hidden[l].cols()));
        fill_uniform(net.w_hidden[l], bound, rng);
    }
    const double bound = 1.0 / std::sqrt(static_cast<double>(net.w_out.cols()));
    fill_uniform(net.w_out, bound, rng);
    return net;
}

void VelocityNet::rebuild_caches() {
    EmbeddingSpec spec{cfg_.sin_dim, cfg_.freq_base};
    omega = sinusoidal_frequencies(spec);
    const int k = static_cast<int>(cfg_.label_values.size());
    class_features.resize(k, cfg_.sin_dim);
    for (int c = 0; c < k; ++c)
        class_features.row(c) = sinusoidal_embed(cfg_.label_values[c], spec).transpose();
}

long VelocityNet::param_count() const { return cfg_.param_count(); }

Mat VelocityNet::class_embeddings() const {
    Mat out = class_features * w_embed[1].transpose();
    out.rowwise() += b_embed[1].transpose();
    return out;
}

std::vector<ParamRef> VelocityNet::param_refs() {
    std::vector<ParamRef> refs;
    const char* embed_names[3] = {"embed_z", "embed_y", "embed_t"};
    for (int i = 0; i < 3; ++i) {
        refs.push_back({std::string(embed_names[i]) + ".w", w_embed[i].data(), w_embed[i].size()});
        refs.push_back({std::string(embed_names[i]) + ".b", b_embed[i].data(), b_embed[i].size()});
    }
    for (std::size_t l = 0; l < w_hidden.size(); ++l) {
        const std::string base = "hidden" + std::to_string(l + 1);
        refs.push_back({base + ".w", w_hidden[l].data(), w_hidden[l].size()});
        refs.push_back({base + ".b", b_hidden[l].data(), b_hidden[l].size()});
    }
    refs.push_back({"out.w", w_out.data(), w_out.size()});
    refs.push_back({"out.b", b_out.data(), b_out.size()});
    return refs;
}

std::vector<ParamRef> VelocityNet::param_refs() const {
    return const_cast<VelocityNet*>(this)->param_refs();
}

bool VelocityNet::all_finite() const {
    for (const ParamRef& r : param_refs())
        if (!r.map().isFinite().all()) return false;
    return true;
}

namespace {

// Assembles the (B x sin_dim) feature block [sin | cos] from channel halves.
void assemble_features(const Mat& sin_part, const Mat& cos_part, Mat& out) {
    out.resize(sin_part.rows(), sin_part.cols() + cos_part.cols());
    out.leftCols(sin_part.cols()) = sin_part;
    out.rightCols(cos_part.cols()) = cos_part;
}

void check_classes(const std::vector<int>& y, int k) {
    for (int c : y)
        if (c < 0 || c >= k)
            throw std::domain_error("velocity net: invalid class index " + std::to_string(c));
}

}  // namespace

void net_forward_cached(const VelocityNet& net, const Arr& z, const Arr& t,
                        const std::vector<int>& y, NetForwardCache& cache) {
    const Eigen::Index b = z.size();
    if (t.size() != b || static_cast<Eigen::Index>(y.size()) != b)
        throw ShapeError("velocity net: batch arrays disagree on length");
    const NetConfig& cfg = net.config();
    check_classes(y, static_cast<int>(cfg.label_values.size()));

    sinusoidal_embed_batch(z, net.omega, cache.sin_z, cache.cos_z);
    sinusoidal_embed_batch(t, net.omega, cache.sin_t, cache.cos_t);
    assemble_features(cache.sin_z, cache.cos_z, cache.feat_z);
    assemble_features(cache.sin_t, cache.cos_t, cache.feat_t);
    cache.feat_y.resize(b, cfg.sin_dim);
    for (Eigen::Index i = 0; i < b; ++i)
        cache.feat_y.row(i) = net.class_features.row(y[i]);

    const int e = cfg.embed_dim;
    cache.h0.resize(b, 3 * e);
    cache.h0.leftCols(e) = cache.feat_z * net.w_embed[0].transpose();
    cache.h0.leftCols(e).rowwise() += net.b_embed[0].transpose();
    cache.h0.middleCols(e, e) = cache.feat_y * net.w_embed[1].transpose();
    cache.h0.middleCols(e, e).rowwise() += net.b_embed[1].transpose();
    cache.h0.rightCols(e) = cache.feat_t * net.w_embed[2].transpose();
    cache.h0.rightCols(e).rowwise() += net.b_embed[2].transpose();

    const std::size_t layers = net.w_hidden.size();
    cache.pre.resize(layers);
    cache.phi.resize(layers);
    cache.act.resize(layers);
    const Mat* prev = &cache.h0;
    for (std::size_t l = 0; l < layers; ++l) {
        cache.pre[l].noalias() = *prev * net.w_hidden[l].transpose();
        cache.pre[l].rowwise() += net.b_hidden[l].transpose();
        cache.phi[l] = (0.5 * (1.0 + (cache.pre[l].array() * kInvSqrt2).erf())).matrix();
        cache.act[l] = cache.pre[l].cwiseProduct(cache.phi[l]);
        prev = &cache.act[l];
    }
    cache.v = (*prev * net.w_out.transpose()).array() + net.b_out[0];
}

Arr net_backward(const VelocityNet& net, const NetForwardCache& cache, const Arr& d_v,
                 NamedArrays& grads) {
    const Eigen::Index b = d_v.size();
    const NetConfig& cfg = net.config();
    const int e = cfg.embed_dim;
    const std::size_t layers = net.w_hidden.size();

    // head
    const Mat& last = cache.act[layers - 1];
    {
        Eigen::Map<Mat> gw(grads.at("out.w").data(), 1, net.w_out.cols());
        gw.noalias() += d_v.matrix().transpose() * last;
        grads.at("out.b")[0] += d_v.sum();
    }
    Mat d_h = d_v.matrix() * net.w_out;  // (B x H_last)

    // hidden stack
    for (std::size_t l = layers; l-- > 0;) {
        // gelu'(pre) = Phi(pre) + pre * pdf(pre)
        Mat d_pre = d_h.cwiseProduct(
            (cache.phi[l].array() +
             cache.pre[l].array() * (-0.5 * cache.pre[l].array().square()).exp() * kInvSqrt2Pi)
                .matrix());
        const Mat& input = (l == 0) ? cache.h0 : cache.act[l - 1];
        const std::string base = "hidden" + std::to_string(l + 1);
        Eigen::Map<Mat> gw(grads.at(base + ".w").data(), net.w_hidden[l].rows(),
                           net.w_hidden[l].cols());
        gw.noalias() += d_pre.transpose() * input;
        Eigen::Map<Vec> gb(grads.at(base + ".b").data(), net.b_hidden[l].size());
        gb.noalias() += d_pre.colwise().sum().transpose();
        d_h.noalias() = d_pre * net.w_hidden[l];
    }

    // embedding projections
    const char* names[3] = {"embed_z", "embed_y", "embed_t"};
    const Mat* feats[3] = {&cache.feat_z, &cache.feat_y, &cache.feat_t};
    Mat d_feat_z;
    for (int i = 0; i < 3; ++i) {
        const Mat d_embed = d_h.middleCols(i * e, e);
        Eigen::Map<Mat> gw(grads.at(std::string(names[i]) + ".w").data(), e, cfg.sin_dim);
        gw.noalias() += d_embed.transpose() * (*feats[i]);
        Eigen::Map<Vec> gb(grads.at(std::string(names[i]) + ".b").data(), e);
        gb.noalias() += d_embed.colwise().sum().transpose();
        if (i == 0) d_feat_z.noalias() = d_embed * net.w_embed[0];
    }

    // through the sinusoidal features of z:
    // d sin(w z)/dz = w cos(w z), d cos(w z)/dz = -w sin(w z)
    const Eigen::Index half = net.omega.size();
    Arr d_z = Arr::Zero(b);
    for (Eigen::Index k = 0; k < half; ++k) {
        d_z += d_feat_z.col(k).array() * net.omega[k] * cache.cos_z.col(k).array();
        d_z -= d_feat_z.col(half + k).array() * net.omega[k] * cache.sin_z.col(k).array();
    }
    return d_z;
}

Arr VelocityNet::forward(const Arr& z, const Arr& t, const std::vector<int>& y) const {
    NetForwardCache cache;
    net_forward_cached(*this, z, t, y, cache);
    return cache.v;
}

double VelocityNet::forward1(double z, double t, int y) const {
    Arr za(1), ta(1);
    za[0] = z;
    ta[0] = t;
    return forward(za, ta, {y})[0];
}

NamedArrays zero_grads_like(const VelocityNet& net) {
    NamedArrays grads;
    for (const ParamRef& r : net.param_refs()) grads.add(r.name, Arr::Zero(r.size));
    return grads;
}

}  // namespace flowlab
