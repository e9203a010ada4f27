#include "shapecx/vae.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "shapecx/error.hpp"

namespace shapecx {

std::vector<LayerSpec> default_encoder_spec(int latent_dim) {
    return {
        LayerSpec::conv(1, 16, 3, 1),  LayerSpec::act_relu(), LayerSpec::maxpool(2),
        LayerSpec::conv(16, 32, 3, 1), LayerSpec::act_relu(), LayerSpec::maxpool(2),
        LayerSpec::conv(32, 64, 3, 1), LayerSpec::act_relu(), LayerSpec::maxpool(2),
        LayerSpec::flat(),
        LayerSpec::dense(6 * 6 * 64, latent_dim),  // mean head
        LayerSpec::dense(6 * 6 * 64, latent_dim),  // logvar head
    };
}

std::vector<LayerSpec> default_decoder_spec(int latent_dim) {
    return {
        LayerSpec::dense(latent_dim, 6 * 6 * 64),
        LayerSpec::shape_to(64, 6, 6),
        LayerSpec::tconv(64, 64, 3, 2), LayerSpec::act_relu(),   // 6 -> 13
        LayerSpec::tconv(64, 32, 3, 2), LayerSpec::act_relu(),   // 13 -> 27
        LayerSpec::tconv(32, 16, 3, 2), LayerSpec::act_relu(),   // 27 -> 55
        LayerSpec::tconv(16, 16, 3, 1), LayerSpec::act_relu(),   // 55 -> 57
        LayerSpec::tconv(16, 8, 3, 1),  LayerSpec::act_relu(),   // 57 -> 59
        LayerSpec::tconv(8, 1, 6, 1),   LayerSpec::act_sigmoid(), // 59 -> 64
    };
}

// ---------------------------------------------------------------------------
// training
// ---------------------------------------------------------------------------

VaeModel train_vae(const std::vector<Mask>& dataset, const TrainConfig& cfg) {
    if (dataset.empty()) throw DataError("train_vae: empty dataset");
    if (cfg.batch_size < 1) throw DataError("train_vae: batch_size must be >= 1");
    if (cfg.epochs < 0) throw DataError("train_vae: epochs must be >= 0");

    Rng rng(cfg.seed);
    VaeModel model = make_vae<float>(cfg.latent_dim, rng);
    model.meta.seed = cfg.seed;
    model.meta.epochs = cfg.epochs;

    const AdamConfig adam{cfg.lr, cfg.beta1, cfg.beta2, cfg.adam_eps};
    const int n = static_cast<int>(dataset.size());
    std::vector<int> order(dataset.size());
    for (int i = 0; i < n; ++i) order[static_cast<size_t>(i)] = i;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (int i = n - 1; i > 0; --i)
            std::swap(order[static_cast<size_t>(i)], order[static_cast<size_t>(rng.uniform_int(i + 1))]);

        double epoch_bce = 0.0, epoch_kl = 0.0;
        for (int start = 0; start < n; start += cfg.batch_size) {
            const int bsz = std::min(cfg.batch_size, n - start);
            Tensor<float> batch({bsz, 1, kMaskSize, kMaskSize});
            for (int b = 0; b < bsz; ++b) {
                const Mask aug = augment(dataset[static_cast<size_t>(order[static_cast<size_t>(start + b)])], rng);
                std::copy(aug.pixels.begin(), aug.pixels.end(),
                          batch.data() + static_cast<size_t>(b) * kMaskPixels);
            }
            Tensor<float> eps({bsz, cfg.latent_dim});
            for (int i = 0; i < eps.size(); ++i) eps[i] = static_cast<float>(rng.normal());

            auto x = make_constant(batch);
            auto [mu, logvar] = encode_nodes(model, x);
            auto z = gauss_sample(mu, logvar, eps);
            auto recon = decode_nodes(model, z);
            auto bce = bce_sum(recon, batch);
            auto kl = kl_gauss_sum(mu, logvar);
            auto loss = scale(add(bce, scale(kl, static_cast<float>(cfg.kl_beta))),
                              1.0f / static_cast<float>(bsz));
            backward(loss);
            adam_step(model.params, adam);

            epoch_bce += static_cast<double>(bce->value[0]);
            epoch_kl += static_cast<double>(kl->value[0]);
        }
        model.meta.bce_curve.push_back(epoch_bce / n);
        model.meta.loss_curve.push_back((epoch_bce + cfg.kl_beta * epoch_kl) / n);
    }
    return model;
}

// ---------------------------------------------------------------------------
// scoring
// ---------------------------------------------------------------------------

std::pair<std::vector<float>, std::vector<float>> encode(const VaeModel& m, const Mask& mask) {
    auto x = make_constant(mask_tensor<float>(mask));
    auto [mu, lv] = encode_nodes(m, x);
    return {mu->value.vec(), lv->value.vec()};
}

Reconstruction decode(const VaeModel& m, const std::vector<float>& z) {
    if (static_cast<int>(z.size()) != m.latent_dim)
        throw DimensionError("decode: latent vector length " + std::to_string(z.size()) +
                             " does not match latent_dim " + std::to_string(m.latent_dim));
    auto zn = make_constant(Tensor<float>({1, m.latent_dim}, z));
    auto out = decode_nodes(m, zn);
    return Reconstruction{out->value.vec()};
}

Reconstruction reconstruct(const VaeModel& m, const Mask& mask) {
    auto x = make_constant(mask_tensor<float>(mask));
    auto [mu, lv] = encode_nodes(m, x);
    (void)lv;
    auto out = decode_nodes(m, mu);
    return Reconstruction{out->value.vec()};
}

double vae_complexity(const VaeModel& a, const VaeModel& b, const Mask& mask) {
    double white = 0.0;
    for (float v : mask.pixels) white += v;
    if (white <= 0.0)
        throw DataError("vae_complexity: all-black mask has no defined score");
    const Reconstruction ra = reconstruct(a, mask);
    const Reconstruction rb = reconstruct(b, mask);
    double diff = 0.0;
    for (size_t i = 0; i < ra.pixels.size(); ++i)
        diff += std::abs(static_cast<double>(ra.pixels[i]) - static_cast<double>(rb.pixels[i]));
    return std::min(1.0, diff / white);
}

double mean_reconstruction_bce(const VaeModel& m, const std::vector<Mask>& dataset) {
    if (dataset.empty()) throw DataError("mean_reconstruction_bce: empty dataset");
    double total = 0.0;
    for (const Mask& mask : dataset) {
        const Reconstruction r = reconstruct(m, mask);
        for (int i = 0; i < kMaskPixels; ++i) {
            const double p = std::clamp(static_cast<double>(r.pixels[static_cast<size_t>(i)]), 1e-7, 1.0 - 1e-7);
            const double t = mask.pixels[static_cast<size_t>(i)];
            total += -(t * std::log(p) + (1.0 - t) * std::log(1.0 - p));
        }
    }
    return total / static_cast<double>(dataset.size());
}

VaePair::VaePair(VaeModel s, VaeModel l) : small(std::move(s)), large(std::move(l)) {
    if (small.latent_dim >= large.latent_dim)
        throw ContractError("checkpoint slots out of order: small slot has latent_dim " +
                            std::to_string(small.latent_dim) + ", large slot " +
                            std::to_string(large.latent_dim));
}

// ---------------------------------------------------------------------------
// checkpoint IO
// ---------------------------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'S', 'C', 'V', 'X'};
constexpr uint32_t kVersion = 1;

void put_u32(std::vector<uint8_t>& out, uint32_t v) {
    out.push_back(static_cast<uint8_t>(v));
    out.push_back(static_cast<uint8_t>(v >> 8));
    out.push_back(static_cast<uint8_t>(v >> 16));
    out.push_back(static_cast<uint8_t>(v >> 24));
}

void put_f32(std::vector<uint8_t>& out, float f) {
    put_u32(out, std::bit_cast<uint32_t>(f));
}

struct Reader {
    const std::vector<uint8_t>& b;
    size_t pos = 0;

    void need(size_t n) const {
        if (pos + n > b.size())
            throw DecodeError("checkpoint truncated at byte " + std::to_string(b.size()));
    }
    uint32_t u32() {
        need(4);
        const uint32_t v = static_cast<uint32_t>(b[pos]) | (static_cast<uint32_t>(b[pos + 1]) << 8) |
                           (static_cast<uint32_t>(b[pos + 2]) << 16) |
                           (static_cast<uint32_t>(b[pos + 3]) << 24);
        pos += 4;
        return v;
    }
    float f32() { return std::bit_cast<float>(u32()); }
    std::string str(size_t n) {
        need(n);
        std::string s(reinterpret_cast<const char*>(b.data() + pos), n);
        pos += n;
        return s;
    }
};

void put_spec_table(std::vector<uint8_t>& out, const std::vector<LayerSpec>& specs) {
    put_u32(out, static_cast<uint32_t>(specs.size()));
    for (const LayerSpec& s : specs) {
        put_u32(out, static_cast<uint32_t>(s.kind));
        put_u32(out, static_cast<uint32_t>(s.kh));
        put_u32(out, static_cast<uint32_t>(s.kw));
        put_u32(out, static_cast<uint32_t>(s.sh));
        put_u32(out, static_cast<uint32_t>(s.sw));
        put_u32(out, static_cast<uint32_t>(s.in_ch));
        put_u32(out, static_cast<uint32_t>(s.out_ch));
    }
}

std::vector<LayerSpec> read_spec_table(Reader& r) {
    const uint32_t count = r.u32();
    if (count > 1024) throw DecodeError("checkpoint: implausible layer count at byte " +
                                        std::to_string(r.pos - 4));
    std::vector<LayerSpec> specs(count);
    for (auto& s : specs) {
        const uint32_t kind = r.u32();
        if (kind < 1 || kind > 8)
            throw DecodeError("checkpoint: unknown layer kind at byte " + std::to_string(r.pos - 4));
        s.kind = static_cast<LayerKind>(kind);
        s.kh = static_cast<int>(r.u32());
        s.kw = static_cast<int>(r.u32());
        s.sh = static_cast<int>(r.u32());
        s.sw = static_cast<int>(r.u32());
        s.in_ch = static_cast<int>(r.u32());
        s.out_ch = static_cast<int>(r.u32());
    }
    return specs;
}

} // namespace

void save_model(const VaeModel& m, const std::filesystem::path& path) {
    std::vector<uint8_t> out;
    out.insert(out.end(), kMagic, kMagic + 4);
    put_u32(out, kVersion);
    put_u32(out, static_cast<uint32_t>(m.latent_dim));
    put_spec_table(out, m.encoder);
    put_spec_table(out, m.decoder);
    put_u32(out, static_cast<uint32_t>(m.params.size()));
    for (const auto& p : m.params) {
        put_u32(out, static_cast<uint32_t>(p.name.size()));
        out.insert(out.end(), p.name.begin(), p.name.end());
        const auto& shape = p.value().shape();
        put_u32(out, static_cast<uint32_t>(shape.size()));
        for (int d : shape) put_u32(out, static_cast<uint32_t>(d));
        for (int i = 0; i < p.value().size(); ++i) put_f32(out, p.value()[i]);
    }

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw DataError("cannot write " + path.string());
    f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
    if (!f) throw DataError("short write to " + path.string());
}

VaeModel load_model(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot open " + path.string());
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());

    Reader r{bytes};
    r.need(4);
    if (std::memcmp(bytes.data(), kMagic, 4) != 0)
        throw DecodeError(path.string() + ": not a checkpoint (magic mismatch at byte 0)");
    r.pos = 4;
    const uint32_t version = r.u32();
    if (version != kVersion)
        throw DecodeError(path.string() + ": unsupported checkpoint version " +
                          std::to_string(version));
    const int latent = static_cast<int>(r.u32());

    VaeModel m;
    m.latent_dim = latent;
    m.encoder = read_spec_table(r);
    m.decoder = read_spec_table(r);
    detail::validate_heads(m.encoder, latent);

    // rebuild zeroed parameters in walk order, then fill from the records
    Rng dummy(0);
    m.decoder_param_offset = detail::spec_param_walk(m.encoder, "enc", true, m.params, dummy);
    detail::spec_param_walk(m.decoder, "dec", false, m.params, dummy);

    const uint32_t count = r.u32();
    if (count != m.params.size())
        throw DecodeError(path.string() + ": parameter count " + std::to_string(count) +
                          " does not match layer table (" + std::to_string(m.params.size()) + ")");
    for (auto& p : m.params) {
        const uint32_t name_len = r.u32();
        if (name_len > 4096)
            throw DecodeError(path.string() + ": implausible name length at byte " +
                              std::to_string(r.pos - 4));
        const std::string name = r.str(name_len);
        if (name != p.name)
            throw DecodeError(path.string() + ": parameter '" + name + "' where '" + p.name +
                              "' was expected");
        const uint32_t rank = r.u32();
        if (rank != static_cast<uint32_t>(p.value().rank()))
            throw DecodeError(path.string() + ": rank mismatch for '" + name + "'");
        for (int d = 0; d < static_cast<int>(rank); ++d)
            if (static_cast<int>(r.u32()) != p.value().dim(d))
                throw DecodeError(path.string() + ": shape mismatch for '" + name + "'");
        for (int i = 0; i < p.value().size(); ++i) p.value()[i] = r.f32();
    }
    return m;
}

} // namespace shapecx
