#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "shapecx/image.hpp"
#include "shapecx/nn.hpp"
#include "shapecx/optim.hpp"
#include "shapecx/rng.hpp"

namespace shapecx {

struct TrainingMeta {
    int epochs = 0;
    uint64_t seed = 0;
    std::vector<double> loss_curve;  // per-epoch mean per-sample loss
    std::vector<double> bce_curve;   // reconstruction term of the above
};

/// Encoder/decoder pair with a fixed-width latent bottleneck. The encoder
/// spec is a trunk ending in flatten followed by exactly two linear heads
/// (mean, log-variance), each latent_dim wide.
template <typename T>
struct VaeModelT {
    int latent_dim = 0;
    std::vector<LayerSpec> encoder;
    std::vector<LayerSpec> decoder;
    std::vector<Parameter<T>> params;  // encoder walk order, then decoder
    size_t decoder_param_offset = 0;
    TrainingMeta meta;
};

using VaeModel = VaeModelT<float>;

/// 64x64 decoder output; values in (0,1), never thresholded.
struct Reconstruction {
    std::vector<float> pixels;
};

// The shipped architecture: three conv(3x3)/relu/pool(2) stages taking
// 64x64x1 down to 6x6x64, mirrored by a linear+reshape and six transposed
// convolutions back to 64x64x1 with a final sigmoid.
std::vector<LayerSpec> default_encoder_spec(int latent_dim);
std::vector<LayerSpec> default_decoder_spec(int latent_dim);

namespace detail {

template <typename T>
size_t spec_param_walk(const std::vector<LayerSpec>& specs, const std::string& prefix,
                       bool head_pair, std::vector<Parameter<T>>& out, Rng& rng) {
    const size_t first = out.size();
    for (size_t i = 0; i < specs.size(); ++i) {
        const LayerSpec& s = specs[i];
        if (!s.has_params()) continue;
        std::string base = prefix + "." + std::to_string(i);
        if (head_pair && i + 2 >= specs.size()) base = i + 2 == specs.size() ? "mu" : "logvar";
        Tensor<T> w, b;
        int fan_in = 0;
        switch (s.kind) {
            case LayerKind::conv2d:
                w = Tensor<T>({s.out_ch, s.in_ch, s.kh, s.kw});
                b = Tensor<T>({s.out_ch});
                fan_in = s.in_ch * s.kh * s.kw;
                break;
            case LayerKind::tconv2d:
                w = Tensor<T>({s.in_ch, s.out_ch, s.kh, s.kw});
                b = Tensor<T>({s.out_ch});
                fan_in = s.in_ch * s.kh * s.kw;
                break;
            case LayerKind::linear:
                w = Tensor<T>({s.in_ch, s.out_ch});
                b = Tensor<T>({s.out_ch});
                fan_in = s.in_ch;
                break;
            default: break;
        }
        init_uniform_fan_in(w, fan_in, rng);
        out.push_back(make_parameter(base + ".weight", std::move(w)));
        out.push_back(make_parameter(base + ".bias", std::move(b)));
    }
    return out.size() - first;
}

template <typename T>
NodePtr<T> run_spec(const std::vector<LayerSpec>& specs, size_t begin, size_t end,
                    const std::vector<Parameter<T>>& params, size_t& cursor, NodePtr<T> x) {
    for (size_t i = begin; i < end; ++i) {
        const LayerSpec& s = specs[i];
        switch (s.kind) {
            case LayerKind::conv2d:
                x = conv2d(x, params[cursor].node, params[cursor + 1].node, s.sh, s.sw);
                cursor += 2;
                break;
            case LayerKind::tconv2d:
                x = tconv2d(x, params[cursor].node, params[cursor + 1].node, s.sh, s.sw);
                cursor += 2;
                break;
            case LayerKind::linear:
                x = linear(x, params[cursor].node, params[cursor + 1].node);
                cursor += 2;
                break;
            case LayerKind::maxpool2d: x = maxpool2d(x, s.kh, s.kw); break;
            case LayerKind::relu: x = relu(x); break;
            case LayerKind::sigmoid: x = sigmoid(x); break;
            case LayerKind::flatten: x = flatten(x); break;
            case LayerKind::reshape: x = reshape(x, s.out_ch, s.kh, s.kw); break;
        }
    }
    return x;
}

inline void validate_heads(const std::vector<LayerSpec>& encoder, int latent_dim) {
    if (encoder.size() < 2)
        throw ContractError("encoder spec too short for mean/logvar heads");
    const LayerSpec& mu = encoder[encoder.size() - 2];
    const LayerSpec& lv = encoder[encoder.size() - 1];
    if (mu.kind != LayerKind::linear || lv.kind != LayerKind::linear ||
        mu.out_ch != latent_dim || lv.out_ch != latent_dim)
        throw ContractError("encoder spec must end with two linear heads of width " +
                            std::to_string(latent_dim));
}

} // namespace detail

template <typename T>
VaeModelT<T> make_vae_from_specs(std::vector<LayerSpec> encoder, std::vector<LayerSpec> decoder,
                                 int latent_dim, Rng& rng) {
    detail::validate_heads(encoder, latent_dim);
    VaeModelT<T> m;
    m.latent_dim = latent_dim;
    m.encoder = std::move(encoder);
    m.decoder = std::move(decoder);
    m.decoder_param_offset = detail::spec_param_walk(m.encoder, "enc", true, m.params, rng);
    detail::spec_param_walk(m.decoder, "dec", false, m.params, rng);
    return m;
}

template <typename T>
VaeModelT<T> make_vae(int latent_dim, Rng& rng) {
    return make_vae_from_specs<T>(default_encoder_spec(latent_dim),
                                  default_decoder_spec(latent_dim), latent_dim, rng);
}

/// Graph-building encoder pass; returns (mean, logvar) nodes.
template <typename T>
std::pair<NodePtr<T>, NodePtr<T>> encode_nodes(const VaeModelT<T>& m, NodePtr<T> x) {
    size_t cursor = 0;
    NodePtr<T> h = detail::run_spec(m.encoder, 0, m.encoder.size() - 2, m.params, cursor, x);
    NodePtr<T> mu = linear(h, m.params[cursor].node, m.params[cursor + 1].node);
    NodePtr<T> lv = linear(h, m.params[cursor + 2].node, m.params[cursor + 3].node);
    return {mu, lv};
}

template <typename T>
NodePtr<T> decode_nodes(const VaeModelT<T>& m, NodePtr<T> z) {
    size_t cursor = m.decoder_param_offset;
    return detail::run_spec(m.decoder, 0, m.decoder.size(), m.params, cursor, z);
}

/// Loss graph: summed pixel BCE plus beta-weighted Gaussian KL.
template <typename T>
NodePtr<T> vae_loss(const NodePtr<T>& recon, const Tensor<T>& target, const NodePtr<T>& mean,
                    const NodePtr<T>& logvar, T beta) {
    return add(bce_sum(recon, target), scale(kl_gauss_sum(mean, logvar), beta));
}

template <typename T>
Tensor<T> mask_tensor(const Mask& m) {
    Tensor<T> t({1, 1, kMaskSize, kMaskSize});
    for (int i = 0; i < kMaskPixels; ++i) t[i] = static_cast<T>(m.pixels[static_cast<size_t>(i)]);
    return t;
}

/// z = mean + exp(0.5*logvar) * eps with eps ~ N(0,1); pass rng = nullptr
/// for the deterministic scoring mode (eps = 0, so z = mean).
template <typename T>
Tensor<T> reparameterize(const Tensor<T>& mean, const Tensor<T>& logvar, Rng* rng) {
    if (!mean.same_shape(logvar)) throw DimensionError("reparameterize: shape mismatch");
    Tensor<T> z(mean.shape());
    for (int i = 0; i < z.size(); ++i) {
        const T eps = rng ? static_cast<T>(rng->normal()) : T(0);
        z[i] = mean[i] + std::exp(T(0.5) * logvar[i]) * eps;
    }
    return z;
}

// ---------------------------------------------------------------------------
// float-precision production surface
// ---------------------------------------------------------------------------

struct TrainConfig {
    int latent_dim = 64;
    int epochs = 50;
    int batch_size = 32;
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    double kl_beta = 1.0;
    uint64_t seed = 0;
};

/// Train on the dataset with per-epoch re-augmentation. Deterministic for a
/// fixed config; the returned model records the per-epoch loss curve.
VaeModel train_vae(const std::vector<Mask>& dataset, const TrainConfig& cfg);

/// (mean, logvar) for one mask.
std::pair<std::vector<float>, std::vector<float>> encode(const VaeModel& m, const Mask& mask);

/// Decode a latent vector; output values lie strictly in (0,1).
Reconstruction decode(const VaeModel& m, const std::vector<float>& z);

/// Deterministic reconstruction (z = mean).
Reconstruction reconstruct(const VaeModel& m, const Mask& mask);

/// Complexity score: sum of absolute reconstruction differences between the
/// two models, divided by the mask's white-pixel count, clipped to 1.
/// Symmetric in the two models. All-black masks are a DataError.
double vae_complexity(const VaeModel& a, const VaeModel& b, const Mask& mask);

/// Mean per-sample reconstruction BCE over a dataset, deterministic mode.
double mean_reconstruction_bce(const VaeModel& m, const std::vector<Mask>& dataset);

/// Two checkpoints ordered by bottleneck width; construction enforces
/// small.latent_dim < large.latent_dim so a checkpoint cannot be scored in
/// the wrong slot.
struct VaePair {
    VaeModel small;
    VaeModel large;
    VaePair(VaeModel s, VaeModel l);
    double complexity(const Mask& mask) const { return vae_complexity(small, large, mask); }
};

// Checkpoint format: "SCVX" magic, format version, latent width, both
// layer-spec tables, then named parameter records with raw f32 payloads;
// every integer is a little-endian u32.
void save_model(const VaeModel& m, const std::filesystem::path& path);
VaeModel load_model(const std::filesystem::path& path);

} // namespace shapecx
