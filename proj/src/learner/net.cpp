#include "nbp/learner/net.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

namespace nbp {

void Conv3x3::init(int in_channels, int out_channels, int stride_, Rng& rng, bool zero) {
    in_c = in_channels;
    out_c = out_channels;
    stride = stride_;
    w.assign(static_cast<size_t>(out_c) * in_c * 9, 0.0);
    b.assign(out_c, 0.0);
    gw.assign(w.size(), 0.0);
    gb.assign(b.size(), 0.0);
    if (!zero) {
        std::normal_distribution<double> dist(0.0, std::sqrt(1.0 / (in_c * 9.0)));
        for (double& x : w) x = dist(rng);
    }
}

namespace {

// Output rows/cols for which tap (ky|kx) stays inside an input extent of n:
// index = o*stride - 1 + k must lie in [0, n).
inline void tap_range(int k, int stride, int n, int out_n, int* lo, int* hi) {
    *lo = (k == 0) ? (stride == 1 ? 1 : 1) : 0;
    *hi = std::min(out_n - 1, (n - k) / stride);
}

}  // namespace

Tensor Conv3x3::forward(const Tensor& x) const {
    Tensor out(out_c, out_h(x.h), out_h(x.w));
    const int ow = out.w, oh = out.h;
    for (int oc = 0; oc < out_c; ++oc) {
        double* op = &out.v[static_cast<size_t>(oc) * oh * ow];
        std::fill(op, op + static_cast<size_t>(oh) * ow, b[oc]);
        for (int ic = 0; ic < in_c; ++ic) {
            const double* xp = &x.v[static_cast<size_t>(ic) * x.h * x.w];
            for (int ky = 0; ky < 3; ++ky) {
                int oy_lo, oy_hi;
                tap_range(ky, stride, x.h, oh, &oy_lo, &oy_hi);
                for (int kx = 0; kx < 3; ++kx) {
                    int ox_lo, ox_hi;
                    tap_range(kx, stride, x.w, ow, &ox_lo, &ox_hi);
                    const double wv =
                        w[((static_cast<size_t>(oc) * in_c + ic) * 3 + ky) * 3 + kx];
                    for (int oy = oy_lo; oy <= oy_hi; ++oy) {
                        double* orow = op + static_cast<size_t>(oy) * ow;
                        const double* xrow =
                            xp + static_cast<size_t>(oy * stride - 1 + ky) * x.w + (kx - 1);
                        if (stride == 1)
                            for (int ox = ox_lo; ox <= ox_hi; ++ox) orow[ox] += wv * xrow[ox];
                        else
                            for (int ox = ox_lo; ox <= ox_hi; ++ox) orow[ox] += wv * xrow[2 * ox];
                    }
                }
            }
        }
    }
    return out;
}

Tensor Conv3x3::backward(const Tensor& x, const Tensor& gout) {
    Tensor gx(x.c, x.h, x.w);
    const int ow = gout.w, oh = gout.h;
    for (int oc = 0; oc < out_c; ++oc) {
        const double* gp = &gout.v[static_cast<size_t>(oc) * oh * ow];
        double acc = 0.0;
        for (size_t i = 0; i < static_cast<size_t>(oh) * ow; ++i) acc += gp[i];
        gb[oc] += acc;
        for (int ic = 0; ic < in_c; ++ic) {
            const double* xp = &x.v[static_cast<size_t>(ic) * x.h * x.w];
            double* gxp = &gx.v[static_cast<size_t>(ic) * x.h * x.w];
            for (int ky = 0; ky < 3; ++ky) {
                int oy_lo, oy_hi;
                tap_range(ky, stride, x.h, oh, &oy_lo, &oy_hi);
                for (int kx = 0; kx < 3; ++kx) {
                    int ox_lo, ox_hi;
                    tap_range(kx, stride, x.w, ow, &ox_lo, &ox_hi);
                    const size_t wi = ((static_cast<size_t>(oc) * in_c + ic) * 3 + ky) * 3 + kx;
                    const double wv = w[wi];
                    double s0 = 0.0, s1 = 0.0;
                    for (int oy = oy_lo; oy <= oy_hi; ++oy) {
                        const double* grow = gp + static_cast<size_t>(oy) * ow;
                        const size_t xoff =
                            static_cast<size_t>(oy * stride - 1 + ky) * x.w + (kx - 1);
                        const double* xrow = xp + xoff;
                        double* gxrow = gxp + xoff;
                        if (stride == 1) {
                            int ox = ox_lo;
                            for (; ox + 1 <= ox_hi; ox += 2) {
                                s0 += grow[ox] * xrow[ox];
                                s1 += grow[ox + 1] * xrow[ox + 1];
                                gxrow[ox] += grow[ox] * wv;
                                gxrow[ox + 1] += grow[ox + 1] * wv;
                            }
                            for (; ox <= ox_hi; ++ox) {
                                s0 += grow[ox] * xrow[ox];
                                gxrow[ox] += grow[ox] * wv;
                            }
                        } else {
                            for (int ox = ox_lo; ox <= ox_hi; ++ox) {
                                s0 += grow[ox] * xrow[2 * ox];
                                gxrow[2 * ox] += grow[ox] * wv;
                            }
                        }
                    }
                    gw[wi] += s0 + s1;
                }
            }
        }
    }
    return gx;
}

void Conv3x3::zero_grad() {
    std::fill(gw.begin(), gw.end(), 0.0);
    std::fill(gb.begin(), gb.end(), 0.0);
}

namespace {

Tensor tanh_fwd(const Tensor& x) {
    Tensor y = x;
    for (double& v : y.v) v = std::tanh(v);
    return y;
}

// gx from gout using the tanh *output* y.
Tensor tanh_bwd(const Tensor& y, const Tensor& gout) {
    Tensor gx = gout;
    for (size_t i = 0; i < gx.v.size(); ++i) gx.v[i] *= 1.0 - y.v[i] * y.v[i];
    return gx;
}

Tensor upsample2(const Tensor& x) {
    Tensor y(x.c, x.h * 2, x.w * 2);
    for (int c = 0; c < x.c; ++c)
        for (int iy = 0; iy < y.h; ++iy)
            for (int ix = 0; ix < y.w; ++ix) y.at(c, iy, ix) = x.at(c, iy / 2, ix / 2);
    return y;
}

Tensor upsample2_bwd(const Tensor& gout) {
    Tensor gx(gout.c, gout.h / 2, gout.w / 2);
    for (int c = 0; c < gout.c; ++c)
        for (int iy = 0; iy < gout.h; ++iy)
            for (int ix = 0; ix < gout.w; ++ix) gx.at(c, iy / 2, ix / 2) += gout.at(c, iy, ix);
    return gx;
}

Tensor concat(const Tensor& a, const Tensor& b) {
    Tensor y(a.c + b.c, a.h, a.w);
    std::copy(a.v.begin(), a.v.end(), y.v.begin());
    std::copy(b.v.begin(), b.v.end(), y.v.begin() + a.v.size());
    return y;
}

void split(const Tensor& g, int c_a, Tensor* ga, Tensor* gb) {
    *ga = Tensor(c_a, g.h, g.w);
    *gb = Tensor(g.c - c_a, g.h, g.w);
    std::copy(g.v.begin(), g.v.begin() + ga->v.size(), ga->v.begin());
    std::copy(g.v.begin() + ga->v.size(), g.v.end(), gb->v.begin());
}

void accumulate(Tensor* dst, const Tensor& src) {
    for (size_t i = 0; i < dst->v.size(); ++i) dst->v[i] += src.v[i];
}

constexpr double kBceClip = 1e-6;

}  // namespace

struct NbpNet::DecoderCache {
    Tensor u1, x1, cat1, u2, x2, cat2, u3, x3;
};

NbpNet::NbpNet(const NetConfig& cfg, uint64_t seed) : cfg_(cfg) {
    if (cfg.input_hw % 8 != 0) throw NbpError("NetConfig: input_hw must be divisible by 8");
    Rng rng(seed);
    enc1_.init(cfg.in_channels, cfg.c1, 2, rng);
    enc2_.init(cfg.c1, cfg.c2, 2, rng);
    enc3_.init(cfg.c2, cfg.c3, 2, rng);
    auto init_decoder = [&](Decoder& d, int out_channels) {
        d.c1.init(cfg.c3, cfg.c2, 1, rng);
        d.c2.init(2 * cfg.c2, cfg.c1, 1, rng);
        d.c3.init(2 * cfg.c1, cfg.c1, 1, rng);
        d.head.init(cfg.c1, out_channels, 1, rng, /*zero=*/true);
    };
    init_decoder(value_dec_, cfg.value_channels);
    init_decoder(obs_dec_, 1);
}

Tensor NbpNet::decode(const Decoder& dec, const Tensor& a1, const Tensor& a2, const Tensor& a3,
                      DecoderCache* cache) const {
    DecoderCache local;
    DecoderCache& c = cache ? *cache : local;
    c.u1 = upsample2(a3);
    c.x1 = tanh_fwd(dec.c1.forward(c.u1));
    c.cat1 = concat(c.x1, a2);
    c.u2 = upsample2(c.cat1);
    c.x2 = tanh_fwd(dec.c2.forward(c.u2));
    c.cat2 = concat(c.x2, a1);
    c.u3 = upsample2(c.cat2);
    c.x3 = tanh_fwd(dec.c3.forward(c.u3));
    return dec.head.forward(c.x3);
}

void NbpNet::decode_backward(Decoder& dec, const DecoderCache& c, const Tensor& gout, Tensor* ga1,
                             Tensor* ga2, Tensor* ga3) {
    Tensor g = dec.head.backward(c.x3, gout);
    g = tanh_bwd(c.x3, g);
    g = dec.c3.backward(c.u3, g);
    g = upsample2_bwd(g);
    Tensor gx2, ga1_part;
    split(g, c.x2.c, &gx2, &ga1_part);
    accumulate(ga1, ga1_part);
    gx2 = tanh_bwd(c.x2, gx2);
    g = dec.c2.backward(c.u2, gx2);
    g = upsample2_bwd(g);
    Tensor gx1, ga2_part;
    split(g, c.x1.c, &gx1, &ga2_part);
    accumulate(ga2, ga2_part);
    gx1 = tanh_bwd(c.x1, gx1);
    g = dec.c1.backward(c.u1, gx1);
    accumulate(ga3, upsample2_bwd(g));
}

NbpNet::Forward NbpNet::forward(const Tensor& input) const {
    if (input.c != cfg_.in_channels || input.h != cfg_.input_hw || input.w != cfg_.input_hw)
        throw NbpError("NbpNet: input shape mismatch");
    const Tensor a1 = tanh_fwd(enc1_.forward(input));
    const Tensor a2 = tanh_fwd(enc2_.forward(a1));
    const Tensor a3 = tanh_fwd(enc3_.forward(a2));
    Forward out;
    out.value = decode(value_dec_, a1, a2, a3, nullptr);
    out.obs_logits = decode(obs_dec_, a1, a2, a3, nullptr);
    return out;
}

namespace {

// Loss terms and output-side gradients, shared by loss_and_grad / loss_only.
struct LossTerms {
    LossResult result;
    Tensor g_value;
    Tensor g_logits;
    double g_log_sigma1 = 0.0;
    double g_log_sigma2 = 0.0;
};

LossTerms compute_loss_terms(const Tensor& value, const Tensor& logits, const LossSample& sample,
                             double log_sigma1, double log_sigma2) {
    LossTerms t;
    t.g_value = Tensor(value.c, value.h, value.w);
    t.g_logits = Tensor(logits.c, logits.h, logits.w);
    const double s1sq = std::exp(2.0 * log_sigma1);
    const double s2sq = std::exp(2.0 * log_sigma2);

    const size_t n_labels = sample.value_labels.size();
    if (n_labels > 0) {
        double mse = 0.0;
        for (const auto& [idx, target] : sample.value_labels) {
            const double diff = value.v[idx] - target;
            mse += diff * diff;
        }
        mse /= n_labels;
        t.result.mse = mse;
        for (const auto& [idx, target] : sample.value_labels)
            t.g_value.v[idx] += (value.v[idx] - target) / (s1sq * n_labels);
        t.g_log_sigma1 = -mse / s1sq + 1.0;
    }

    const size_t n_pix = sample.obstacle_gt.size();
    if (n_pix != logits.v.size()) throw NbpError("loss: obstacle label size mismatch");
    double bce = 0.0;
    for (size_t i = 0; i < n_pix; ++i) {
        const double p_raw = sigmoid(logits.v[i]);
        const double p = std::clamp(p_raw, kBceClip, 1.0 - kBceClip);
        const double y = sample.obstacle_gt[i];
        bce += -(y * std::log(p) + (1.0 - y) * std::log(1.0 - p));
        // Gradient is zero where the clip is active.
        if (p_raw > kBceClip && p_raw < 1.0 - kBceClip)
            t.g_logits.v[i] = (p_raw - y) / (s2sq * n_pix);
    }
    bce /= n_pix;
    t.result.bce = bce;
    t.g_log_sigma2 = -2.0 * bce / s2sq + 1.0;

    t.result.total = bce / s2sq + log_sigma2;
    if (n_labels > 0) t.result.total += t.result.mse / (2.0 * s1sq) + log_sigma1;
    return t;
}

}  // namespace

LossResult NbpNet::loss_and_grad(const LossSample& sample) {
    const Tensor a1 = tanh_fwd(enc1_.forward(sample.input));
    const Tensor a2 = tanh_fwd(enc2_.forward(a1));
    const Tensor a3 = tanh_fwd(enc3_.forward(a2));
    DecoderCache vc, oc;
    const Tensor value = decode(value_dec_, a1, a2, a3, &vc);
    const Tensor logits = decode(obs_dec_, a1, a2, a3, &oc);
    for (double v : value.v)
        if (!std::isfinite(v)) throw NbpError("loss: non-finite forward values");

    LossTerms t = compute_loss_terms(value, logits, sample, log_sigma1, log_sigma2);
    g_log_sigma1 += t.g_log_sigma1;
    g_log_sigma2 += t.g_log_sigma2;

    Tensor ga1(a1.c, a1.h, a1.w), ga2(a2.c, a2.h, a2.w), ga3(a3.c, a3.h, a3.w);
    decode_backward(value_dec_, vc, t.g_value, &ga1, &ga2, &ga3);
    decode_backward(obs_dec_, oc, t.g_logits, &ga1, &ga2, &ga3);
    Tensor g = tanh_bwd(a3, ga3);
    g = enc3_.backward(a2, g);
    accumulate(&ga2, g);
    g = tanh_bwd(a2, ga2);
    g = enc2_.backward(a1, g);
    accumulate(&ga1, g);
    g = tanh_bwd(a1, ga1);
    enc1_.backward(sample.input, g);
    return t.result;
}

LossResult NbpNet::loss_only(const LossSample& sample) const {
    const Forward f = forward(sample.input);
    return compute_loss_terms(f.value, f.obs_logits, sample, log_sigma1, log_sigma2).result;
}

void NbpNet::zero_grad() {
    enc1_.zero_grad();
    enc2_.zero_grad();
    enc3_.zero_grad();
    for (Decoder* d : {&value_dec_, &obs_dec_}) {
        d->c1.zero_grad();
        d->c2.zero_grad();
        d->c3.zero_grad();
        d->head.zero_grad();
    }
    g_log_sigma1 = 0.0;
    g_log_sigma2 = 0.0;
}

std::vector<ParamBlock> NbpNet::param_blocks() {
    std::vector<ParamBlock> blocks;
    auto add_conv = [&](const std::string& name, Conv3x3& conv) {
        blocks.push_back({name + ".w", conv.w.data(), conv.gw.data(), conv.w.size()});
        blocks.push_back({name + ".b", conv.b.data(), conv.gb.data(), conv.b.size()});
    };
    add_conv("enc1", enc1_);
    add_conv("enc2", enc2_);
    add_conv("enc3", enc3_);
    auto add_decoder = [&](const std::string& prefix, Decoder& d) {
        add_conv(prefix + ".c1", d.c1);
        add_conv(prefix + ".c2", d.c2);
        add_conv(prefix + ".c3", d.c3);
        add_conv(prefix + ".head", d.head);
    };
    add_decoder("value", value_dec_);
    add_decoder("obstacle", obs_dec_);
    blocks.push_back({"log_sigma1", &log_sigma1, &g_log_sigma1, 1});
    blocks.push_back({"log_sigma2", &log_sigma2, &g_log_sigma2, 1});
    return blocks;
}

Tensor NbpNet::make_input(const ExplorationEmbedding& embedding) const {
    const int hw = cfg_.input_hw;
    if (static_cast<int>(embedding.slices.size()) + 1 != cfg_.in_channels ||
        embedding.spec.grid_w != hw || embedding.spec.grid_h != hw)
        throw NbpError("make_input: embedding does not match the configured window");
    Tensor input(cfg_.in_channels, hw, hw);
    for (size_t j = 0; j < embedding.slices.size(); ++j)
        for (int z = 0; z < hw; ++z)
            for (int x = 0; x < hw; ++x)
                input.at(static_cast<int>(j), z, x) = embedding.slices[j].at(x, z) / cfg_.slice_norm;
    for (int z = 0; z < hw; ++z)
        for (int x = 0; x < hw; ++x)
            input.at(cfg_.in_channels - 1, z, x) = embedding.trajectory.at(x, z) / cfg_.trajectory_norm;
    return input;
}

Prediction NbpNet::predict(const ExplorationEmbedding& embedding) {
    const Forward f = forward(make_input(embedding));
    Prediction pred;
    pred.value_map.window = embedding.spec;
    pred.value_map.center = embedding.center;
    pred.value_map.init_zero();
    for (int yaw = 0; yaw < cfg_.value_channels; ++yaw)
        for (int z = 0; z < cfg_.input_hw; ++z)
            for (int x = 0; x < cfg_.input_hw; ++x)
                pred.value_map.at(x, z, yaw) = f.value.at(yaw, z, x);
    pred.obstacle_map.window = embedding.spec;
    pred.obstacle_map.center = embedding.center;
    pred.obstacle_map.probs = Grid2D<float>(cfg_.input_hw, cfg_.input_hw, 0.0f);
    for (int z = 0; z < cfg_.input_hw; ++z)
        for (int x = 0; x < cfg_.input_hw; ++x)
            pred.obstacle_map.probs.at(x, z) = static_cast<float>(sigmoid(f.obs_logits.at(0, z, x)));
    return pred;
}

namespace {
constexpr char kCkptMagic[8] = {'N', 'B', 'P', 'C', 'K', 'P', 'T', '1'};

template <typename T>
void w_pod(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <typename T>
T r_pod(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw NbpError("truncated checkpoint");
    return v;
}
}  // namespace

void NbpNet::save(const std::string& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw NbpError("cannot open " + path + " for writing");
    os.write(kCkptMagic, sizeof(kCkptMagic));
    w_pod<int32_t>(os, cfg_.in_channels);
    w_pod<int32_t>(os, cfg_.input_hw);
    w_pod<int32_t>(os, cfg_.c1);
    w_pod<int32_t>(os, cfg_.c2);
    w_pod<int32_t>(os, cfg_.c3);
    w_pod<int32_t>(os, cfg_.value_channels);
    w_pod(os, cfg_.slice_norm);
    w_pod(os, cfg_.trajectory_norm);
    w_pod(os, gain_scale);
    auto blocks = const_cast<NbpNet*>(this)->param_blocks();
    w_pod<int32_t>(os, static_cast<int32_t>(blocks.size()));
    for (const ParamBlock& blk : blocks) {
        w_pod<int32_t>(os, static_cast<int32_t>(blk.name.size()));
        os.write(blk.name.data(), blk.name.size());
        w_pod<int64_t>(os, static_cast<int64_t>(blk.size));
        os.write(reinterpret_cast<const char*>(blk.data), blk.size * sizeof(double));
    }
    if (!os) throw NbpError("failed writing checkpoint " + path);
}

NbpNet NbpNet::load(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw NbpError("cannot open checkpoint " + path);
    char magic[8];
    is.read(magic, sizeof(magic));
    if (!is || std::memcmp(magic, kCkptMagic, sizeof(magic)) != 0)
        throw NbpError("bad checkpoint header in " + path);
    NetConfig cfg;
    cfg.in_channels = r_pod<int32_t>(is);
    cfg.input_hw = r_pod<int32_t>(is);
    cfg.c1 = r_pod<int32_t>(is);
    cfg.c2 = r_pod<int32_t>(is);
    cfg.c3 = r_pod<int32_t>(is);
    cfg.value_channels = r_pod<int32_t>(is);
    cfg.slice_norm = r_pod<double>(is);
    cfg.trajectory_norm = r_pod<double>(is);
    NbpNet net(cfg, 0);
    net.gain_scale = r_pod<double>(is);
    auto blocks = net.param_blocks();
    const int n = r_pod<int32_t>(is);
    for (int i = 0; i < n; ++i) {
        const int name_len = r_pod<int32_t>(is);
        std::string name(name_len, '\0');
        is.read(name.data(), name_len);
        const auto size = static_cast<size_t>(r_pod<int64_t>(is));
        auto it = std::find_if(blocks.begin(), blocks.end(),
                               [&](const ParamBlock& b) { return b.name == name; });
        if (it == blocks.end() || it->size != size)
            throw NbpError("checkpoint block mismatch: " + name);
        is.read(reinterpret_cast<char*>(it->data), size * sizeof(double));
        if (!is) throw NbpError("truncated checkpoint");
    }
    return net;
}

}  // namespace nbp
