#pragma once

#include <string>
#include <vector>

#include "nbp/predictor.hpp"

namespace nbp {

/// Dense CHW tensor in double precision (training runs in double so the
/// finite-difference checks stay tight).
struct Tensor {
    int c = 0, h = 0, w = 0;
    std::vector<double> v;

    Tensor() = default;
    Tensor(int c_, int h_, int w_) : c(c_), h(h_), w(w_), v(static_cast<size_t>(c_) * h_ * w_, 0.0) {}

    double& at(int ci, int y, int x) { return v[(static_cast<size_t>(ci) * h + y) * w + x]; }
    double at(int ci, int y, int x) const { return v[(static_cast<size_t>(ci) * h + y) * w + x]; }
    size_t size() const { return v.size(); }
};

/// 3x3 convolution, padding 1, stride 1 or 2.
struct Conv3x3 {
    int in_c = 0, out_c = 0, stride = 1;
    std::vector<double> w;   // [out_c][in_c][3][3]
    std::vector<double> b;   // [out_c]
    std::vector<double> gw;  // gradient accumulators, same shapes
    std::vector<double> gb;

    void init(int in_channels, int out_channels, int stride_, Rng& rng, bool zero = false);
    int out_h(int in_h) const { return (in_h + stride - 1) / stride; }
    Tensor forward(const Tensor& x) const;
    /// Accumulates gw/gb and returns the gradient w.r.t. the input.
    Tensor backward(const Tensor& x, const Tensor& gout);
    void zero_grad();
};

struct NetConfig {
    int in_channels = 5;  // K slices + trajectory histogram
    int input_hw = 32;    // must be divisible by 8
    int c1 = 16, c2 = 32, c3 = 64;
    int value_channels = 8;  // yaw channels
    double slice_norm = 8.0;
    double trajectory_norm = 16.0;
};

struct ParamBlock {
    std::string name;
    double* data = nullptr;
    double* grad = nullptr;
    size_t size = 0;
};

/// Sparse supervision for one training sample, in the net's output layout.
struct LossSample {
    Tensor input;                                   // normalized embedding
    std::vector<std::pair<size_t, double>> value_labels;  // (flat CHW index, target)
    std::vector<uint8_t> obstacle_gt;               // HW, 0/1
};

struct LossResult {
    double total = 0.0;
    double mse = 0.0;
    double bce = 0.0;
};

/// Encoder with two skip-connected decoder heads: value map (linear output)
/// and obstacle logits (squashed at the consumer).
class NbpNet : public Predictor {
public:
    NbpNet() = default;
    NbpNet(const NetConfig& cfg, uint64_t seed);

    const NetConfig& config() const { return cfg_; }

    struct Forward {
        Tensor value;       // [value_channels, hw, hw]
        Tensor obs_logits;  // [1, hw, hw]
    };
    Forward forward(const Tensor& input) const;

    /// Eq-style multitask loss with learnable uncertainty weights; fills all
    /// parameter gradients (accumulating; call zero_grad between steps).
    LossResult loss_and_grad(const LossSample& sample);
    LossResult loss_only(const LossSample& sample) const;

    void zero_grad();
    std::vector<ParamBlock> param_blocks();

    /// Builds the normalized input tensor from a raw embedding.
    Tensor make_input(const ExplorationEmbedding& embedding) const;

    Prediction predict(const ExplorationEmbedding& embedding) override;

    double log_sigma1 = 0.0;
    double log_sigma2 = 0.0;
    double g_log_sigma1 = 0.0;
    double g_log_sigma2 = 0.0;
    double gain_scale = 0.05;  // value targets divided by this before MSE

    void save(const std::string& path) const;
    static NbpNet load(const std::string& path);

private:
    struct Decoder {
        Conv3x3 c1, c2, c3, head;
    };
    struct DecoderCache;
    Tensor decode(const Decoder& dec, const Tensor& a1, const Tensor& a2, const Tensor& a3,
                  DecoderCache* cache) const;
    void decode_backward(Decoder& dec, const DecoderCache& cache, const Tensor& gout, Tensor* ga1,
                         Tensor* ga2, Tensor* ga3);

    NetConfig cfg_;
    Conv3x3 enc1_, enc2_, enc3_;
    Decoder value_dec_, obs_dec_;
};

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace nbp
