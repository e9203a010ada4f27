// Acceptance suite: one pass/fail line per criterion, exit code = number of
// failed criteria. Heavy shape-model training is shared between criteria and
// parallelized across seeds.

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "helpers/oracles.hpp"
#include "shapecx/deflate.hpp"
#include "shapecx/fft.hpp"
#include "shapecx/image.hpp"
#include "shapecx/measures.hpp"
#include "shapecx/ranking.hpp"
#include "shapecx/report.hpp"
#include "shapecx/shapes.hpp"
#include "shapecx/vae.hpp"

using namespace shapecx;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            if (!detail.empty()) detail += "; ";
            detail += what;
        }
    }
};

std::string fmt(double v, int prec = 4) {
    char b[64];
    std::snprintf(b, sizeof b, "%.*f", prec, v);
    return b;
}

// ---------------------------------------------------------------------------
// shared training fixture (criteria 6, 7, 8)
// ---------------------------------------------------------------------------

constexpr int kSeeds = 10;
constexpr int kCorpusSize = 200;
constexpr uint64_t kCorpusSeed = 1234;
constexpr int kEpochs = 12;
constexpr double kKlBeta = 1.0;  // pinned after the bottleneck-pressure sweep

const std::vector<Mask>& desk_corpus() {
    static const std::vector<Mask> corpus = synthetic_corpus(kCorpusSize, kCorpusSeed);
    return corpus;
}

struct TrainedPair {
    VaeModel m16, m64;
};

TrainConfig train_config(int latent, uint64_t seed) {
    TrainConfig cfg;
    cfg.latent_dim = latent;
    cfg.epochs = kEpochs;
    cfg.batch_size = 32;
    cfg.seed = seed;
    cfg.kl_beta = kKlBeta;
    return cfg;
}

const std::vector<TrainedPair>& trained_pairs() {
    static const std::vector<TrainedPair> pairs = [] {
        const auto& corpus = desk_corpus();
        std::vector<TrainedPair> out(kSeeds);
        std::atomic<int> next{0};
        auto work = [&] {
            for (;;) {
                const int s = next.fetch_add(1);
                if (s >= kSeeds) return;
                out[static_cast<size_t>(s)].m16 =
                    train_vae(corpus, train_config(16, static_cast<uint64_t>(s)));
                out[static_cast<size_t>(s)].m64 =
                    train_vae(corpus, train_config(64, static_cast<uint64_t>(s)));
            }
        };
        const unsigned workers = std::max(1u, std::thread::hardware_concurrency());
        std::vector<std::thread> ts;
        for (unsigned w = 0; w < workers; ++w) ts.emplace_back(work);
        for (auto& t : ts) t.join();
        return out;
    }();
    return pairs;
}

// ---------------------------------------------------------------------------
// criteria
// ---------------------------------------------------------------------------

Outcome criterion_numeric_core() {
    Outcome o;
    Rng rng(424242);
    auto rand_tensor = [&rng](std::vector<int> shape) {
        Tensor<double> t(std::move(shape));
        for (int i = 0; i < t.size(); ++i) t[i] = rng.uniform(-1.0, 1.0);
        return t;
    };
    auto rel = [](const Tensor<double>& a, const Tensor<double>& b) {
        double worst = 0;
        for (int i = 0; i < a.size(); ++i)
            worst = std::max(worst, std::abs(a[i] - b[i]) /
                                        std::max({std::abs(a[i]), std::abs(b[i]), 1e-30}));
        return worst;
    };

    double worst_fwd = 0;
    for (int trial = 0; trial < 25; ++trial) {
        const int C = 1 + rng.uniform_int(4), O = 1 + rng.uniform_int(4);
        const int H = 3 + rng.uniform_int(6), W = 3 + rng.uniform_int(6);
        const int k = 1 + rng.uniform_int(3), s = 1 + rng.uniform_int(2);

        auto x = make_constant(rand_tensor({2, C, H, W}));
        auto w = make_constant(rand_tensor({O, C, k, k}));
        auto b = make_constant(rand_tensor({O}));
        worst_fwd = std::max(
            worst_fwd, rel(conv2d(x, w, b, s, s)->value,
                           oracle::conv2d(x->value, w->value, b->value, s, s)));

        auto wt = make_constant(rand_tensor({C, O, k, k}));
        auto bt = make_constant(rand_tensor({O}));
        worst_fwd = std::max(
            worst_fwd, rel(tconv2d(x, wt, bt, s, s)->value,
                           oracle::tconv2d(x->value, wt->value, bt->value, s, s)));

        worst_fwd = std::max(worst_fwd, rel(maxpool2d(x, 2, 2)->value,
                                            oracle::maxpool2d(x->value, 2, 2)));

        auto xf = make_constant(rand_tensor({3, 17}));
        auto wf = make_constant(rand_tensor({17, 5}));
        auto bf = make_constant(rand_tensor({5}));
        worst_fwd = std::max(worst_fwd, rel(linear(xf, wf, bf)->value,
                                            oracle::linear(xf->value, wf->value, bf->value)));
    }
    o.require(worst_fwd < 1e-10, "layer-vs-oracle rel err " + fmt(worst_fwd, 14));

    // toy two-bottleneck model, double precision, jittered off the relu kinks
    Rng mrng(77);
    std::vector<LayerSpec> enc{LayerSpec::conv(1, 2, 3, 1),  LayerSpec::act_relu(),
                               LayerSpec::maxpool(2),        LayerSpec::conv(2, 3, 2, 1),
                               LayerSpec::act_relu(),        LayerSpec::maxpool(2),
                               LayerSpec::flat(),            LayerSpec::dense(3, 2),
                               LayerSpec::dense(3, 2)};
    std::vector<LayerSpec> dec{LayerSpec::dense(2, 4),       LayerSpec::shape_to(4, 1, 1),
                               LayerSpec::tconv(4, 3, 3, 2), LayerSpec::act_relu(),
                               LayerSpec::tconv(3, 2, 2, 2), LayerSpec::act_relu(),
                               LayerSpec::tconv(2, 1, 3, 1), LayerSpec::act_sigmoid()};
    auto model = make_vae_from_specs<double>(enc, dec, 2, mrng);
    for (auto& p : model.params)
        for (int i = 0; i < p.value().size(); ++i) p.value()[i] += mrng.uniform(0.05, 0.3);
    int params = 0;
    for (auto& p : model.params) params += p.value().size();
    o.require(params < 5000, "toy stack has " + std::to_string(params) + " params");

    Tensor<double> input({1, 1, 8, 8});
    for (int i = 0; i < input.size(); ++i) input[i] = mrng.bernoulli(0.4) ? 1.0 : 0.0;
    Tensor<double> eps({1, 2});
    eps[0] = 0.4;
    eps[1] = -0.6;
    auto forward_loss = [&] {
        auto x = make_constant(input);
        auto [mu, lv] = encode_nodes(model, x);
        auto z = gauss_sample(mu, lv, eps);
        return vae_loss(decode_nodes(model, z), input, mu, lv, 1.0);
    };
    const double gerr = oracle::gradient_check<double>(
        model.params, [&] { return forward_loss()->value[0]; },
        [&] { backward(forward_loss()); }, 1e-5);
    o.require(gerr < 1e-4, "gradient check rel err " + fmt(gerr, 8));
    if (o.pass) o.detail = "fwd rel " + fmt(worst_fwd, 14) + ", grad rel " + fmt(gerr, 8);
    return o;
}

Outcome criterion_architecture() {
    Outcome o;
    Rng rng(1);
    const auto model = make_vae<float>(64, rng);
    auto x = make_constant(mask_tensor<float>(make_disc(32, 32, 20, "d")));

    size_t cursor = 0;
    // trunk output right before flatten: run everything but flatten+heads
    NodePtr<float> h = x;
    for (size_t i = 0; i + 3 < model.encoder.size(); ++i)
        h = detail::run_spec(model.encoder, i, i + 1, model.params, cursor, h);
    o.require(h->value.shape() == std::vector<int>{1, 64, 6, 6},
              "encoder trunk output " + shape_str(h->value.shape()));

    auto [mu, lv] = encode_nodes(model, x);
    o.require(mu->value.shape() == std::vector<int>{1, 64}, "mean head shape");
    auto recon = decode_nodes(model, mu);
    o.require(recon->value.shape() == std::vector<int>{1, 1, 64, 64},
              "decoder output " + shape_str(recon->value.shape()));
    (void)lv;
    if (o.pass) o.detail = "64x64x1 -> 6x6x64 -> 64x64x1";
    return o;
}

Outcome criterion_fft() {
    Outcome o;
    Mask black("b");
    o.require(fft_complexity(black) == 0.0, "constant image must score 0");
    Mask white("w");
    for (auto& v : white.pixels) v = 1.0f;
    o.require(fft_complexity(white) == 0.0, "constant white must score 0");

    Mask check("c");
    for (int y = 0; y < 64; ++y)
        for (int x = 0; x < 64; ++x) check.at(x, y) = static_cast<float>((x + y) % 2);
    const double cb = fft_complexity(check);
    o.require(std::abs(cb - 1.0) <= 1e-9, "checkerboard " + fmt(cb, 12));

    Mask stripes("s");
    for (int y = 0; y < 64; ++y)
        for (int x = 0; x < 64; ++x) stripes.at(x, y) = static_cast<float>(x % 2);
    const double st = fft_complexity(stripes);
    o.require(std::abs(st - 0.70710678) <= 1e-6, "stripes " + fmt(st, 9));

    Rng rng(31);
    double worst = 0;
    for (int trial = 0; trial < 100; ++trial) {
        Mask m("m");
        const double p = rng.uniform(0.1, 0.9);
        for (auto& v : m.pixels) v = rng.bernoulli(p) ? 1.0f : 0.0f;
        const auto fast = fft2d(m);
        const auto slow = oracle::dft2d(std::vector<double>(m.pixels.begin(), m.pixels.end()), 64);
        for (size_t i = 0; i < fast.size(); ++i)
            worst = std::max(worst, std::abs(fast[i] - slow[i]));
    }
    o.require(worst < 1e-6, "fft-vs-DFT abs err " + fmt(worst, 10));
    if (o.pass)
        o.detail = "checkerboard " + fmt(cb, 10) + ", stripes " + fmt(st, 7) + ", oracle abs " +
                   fmt(worst, 10);
    return o;
}

Outcome criterion_compression() {
    Outcome o;
    Mask white("w");
    for (auto& v : white.pixels) v = 1.0f;
    o.require(compression_complexity(white) == 0.0, "all-white must be exactly 0");

    Mask black("b");
    const double cb = compression_complexity(black);
    o.require(cb <= 0.01, "all-black " + fmt(cb, 5));

    Rng rng(32);
    bool roundtrip = true;
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<uint8_t> bytes(kMaskPixels);
        const double p = rng.uniform(0.0, 1.0);
        for (auto& b : bytes) b = rng.bernoulli(p) ? 0xff : 0x00;
        roundtrip = roundtrip && inflate(deflate(bytes)) == bytes;
    }
    o.require(roundtrip, "codec round-trip failed");

    Rng nrng(33);
    const double noise = compression_complexity(make_noise(0.5, nrng, "n"));
    const double disc = compression_complexity(make_disc(32, 32, 20, "d"));
    o.require(noise > disc, "noise " + fmt(noise) + " !> disc " + fmt(disc));
    if (o.pass)
        o.detail = "black " + fmt(cb, 5) + ", noise " + fmt(noise) + " > disc " + fmt(disc);
    return o;
}

Outcome criterion_spearman() {
    Outcome o;
    const Ranking f4 = rank({{"a", 1}, {"b", 2}, {"c", 3}, {"d", 4}});
    const Ranking g4 = rank({{"a", 1}, {"b", 2}, {"c", 4}, {"d", 3}});
    o.require(std::abs(spearman(f4, g4) - 0.8) < 1e-12, "closed-formula fixture 0.8");
    o.require(std::abs(spearman(f4, f4) - 1.0) < 1e-12, "identical must be +1");
    const Ranking r4 = rank({{"a", 4}, {"b", 3}, {"c", 2}, {"d", 1}});
    o.require(std::abs(spearman(f4, r4) + 1.0) < 1e-12, "reversed must be -1");

    Rng rng(34);
    double worst = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const int n = 2 + rng.uniform_int(29);
        std::vector<std::pair<std::string, double>> s1, s2;
        std::vector<double> v1, v2;
        for (int i = 0; i < n; ++i) {
            const double a = rng.uniform_int(10) / 9.0;  // ties likely
            const double b = rng.uniform_int(10) / 9.0;
            s1.emplace_back("s" + std::to_string(i), a);
            s2.emplace_back("s" + std::to_string(i), b);
            v1.push_back(a);
            v2.push_back(b);
        }
        worst = std::max(worst,
                         std::abs(spearman(rank(s1), rank(s2)) - oracle::spearman(v1, v2)));
    }
    o.require(worst < 1e-12, "oracle deviation " + fmt(worst, 15));
    if (o.pass) o.detail = "1000-case oracle deviation " + fmt(worst, 15);
    return o;
}

Outcome criterion_training_premise() {
    Outcome o;
    const auto& pairs = trained_pairs();
    int wins = 0;
    std::string per_seed;
    for (int s = 0; s < kSeeds; ++s) {
        const double b16 = mean_reconstruction_bce(pairs[static_cast<size_t>(s)].m16, desk_corpus());
        const double b64 = mean_reconstruction_bce(pairs[static_cast<size_t>(s)].m64, desk_corpus());
        if (b64 < b16) ++wins;
        per_seed += (s ? " " : "") + fmt(b16, 0) + "/" + fmt(b64, 0);
    }
    o.require(wins >= 9, "large bottleneck won only " + std::to_string(wins) + "/10 seeds [" +
                             per_seed + "]");
    if (o.pass) o.detail = "BCE(64) < BCE(16) in " + std::to_string(wins) + "/10 seeds";
    return o;
}

Outcome criterion_ordering() {
    Outcome o;
    const Mask disc = make_disc(32, 32, 20, "disc");
    const Mask star = make_star(7, 0.4, 32, 32, 22, 0, "star");
    Rng nrng(99);
    const Mask noise = make_noise(0.5, nrng, "noise");

    const double cd = compression_complexity(disc), cs = compression_complexity(star),
                 cn = compression_complexity(noise);
    o.require(cd < cs && cs < cn,
              "compression ordering " + fmt(cd) + " " + fmt(cs) + " " + fmt(cn));
    const double fd = fft_complexity(disc), fst = fft_complexity(star), fn = fft_complexity(noise);
    o.require(fd < fst && fst < fn, "fft ordering " + fmt(fd) + " " + fmt(fst) + " " + fmt(fn));

    const auto& pairs = trained_pairs();
    int ok = 0;
    std::string detail;
    for (int s = 0; s < kSeeds; ++s) {
        const auto& p = pairs[static_cast<size_t>(s)];
        const double vd = vae_complexity(p.m16, p.m64, disc);
        const double vs = vae_complexity(p.m16, p.m64, star);
        const double vn = vae_complexity(p.m16, p.m64, noise);
        if (vd < vs && vs < vn) ++ok;
        detail += (s ? " " : "") + fmt(vd, 2) + "<" + fmt(vs, 2) + "<" + fmt(vn, 2);
    }
    o.require(ok >= 9, "CS ordering held in " + std::to_string(ok) + "/10 seeds [" + detail + "]");
    if (o.pass)
        o.detail = "CS ordering in " + std::to_string(ok) + "/10 seeds; deterministic for "
                   "compression and fft";
    return o;
}

Outcome criterion_correlation_pattern() {
    Outcome o;
    const auto& corpus = desk_corpus();
    const auto& pair = trained_pairs()[0];

    std::vector<std::string> ids;
    std::vector<double> v_vae, v_comp, v_fft, v_comb;
    for (const Mask& m : corpus) {
        ScoreVector s;
        s.shape_id = m.id;
        s.fill = fill_ratio(m);
        s.compression = compression_complexity(m);
        s.fft = fft_complexity(m);
        s.vae = vae_complexity(pair.m16, pair.m64, m);
        ids.push_back(m.id);
        v_vae.push_back(*s.vae);
        v_comp.push_back(s.compression);
        v_fft.push_back(s.fft);
        v_comb.push_back(combine(s, {Component::compression, Component::fft, Component::vae}));
    }

    const SubsetResult res = subset_experiment(
        ids, {{"vae", v_vae}, {"compression", v_comp}, {"fft", v_fft}, {"combined", v_comb}}, 9,
        2000, 7);

    std::string matrix;
    for (size_t i = 0; i < res.measures.size(); ++i)
        for (size_t j = i + 1; j < res.measures.size(); ++j) {
            matrix += res.measures[i].substr(0, 4) + "-" + res.measures[j].substr(0, 4) + "=" +
                      fmt(res.mean_rho[i][j], 3) + " ";
            o.require(res.mean_rho[i][j] > 0.0,
                      res.measures[i] + "-" + res.measures[j] + " not positive: " +
                          fmt(res.mean_rho[i][j], 3));
        }

    // every single measure must track the combined measure more strongly
    // than any other single measure (indices: 0 vae, 1 compression, 2 fft, 3 combined)
    for (size_t i = 0; i < 3; ++i)
        for (size_t j = 0; j < 3; ++j) {
            if (i == j) continue;
            o.require(res.mean_rho[i][3] > res.mean_rho[i][j],
                      res.measures[i] + ": combined " + fmt(res.mean_rho[i][3], 3) +
                          " !> " + res.measures[j] + " " + fmt(res.mean_rho[i][j], 3));
        }
    if (o.pass) o.detail = matrix;
    else o.detail = matrix + "| " + o.detail;
    return o;
}

Outcome criterion_determinism() {
    Outcome o;
#ifdef SHAPECX_BIN
    const fs::path dir = fs::temp_directory_path() / "shapecx_acceptance";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const std::string bin = SHAPECX_BIN;
    auto sh = [&](const std::string& args) {
        const std::string cmd = bin + " " + args + " >/dev/null 2>/dev/null";
        return WEXITSTATUS(std::system(cmd.c_str()));
    };
    auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    };
    const std::string d = dir.string();
    o.require(sh("gen --out " + d + "/raw --count 24 --seed 3") == 0, "gen failed");
    o.require(sh("preprocess --in " + d + "/raw --out " + d + "/masks") == 0, "preprocess failed");
    o.require(sh("train --data " + d + "/masks --out " + d + "/a.ckpt --latent 16 --epochs 1 "
                 "--batch 8 --seed 9") == 0,
              "train 1 failed");
    o.require(sh("train --data " + d + "/masks --out " + d + "/b.ckpt --latent 16 --epochs 1 "
                 "--batch 8 --seed 9") == 0,
              "train 2 failed");
    o.require(!slurp(d + "/a.ckpt").empty() && slurp(d + "/a.ckpt") == slurp(d + "/b.ckpt"),
              "checkpoints differ across reruns");

    o.require(sh("train --data " + d + "/masks --out " + d + "/a64.ckpt --latent 64 --epochs 1 "
                 "--batch 8 --seed 9") == 0,
              "train 64 failed");
    o.require(sh("score --data " + d + "/masks --out " + d + "/s1.csv --measures "
                 "fill,compression,fft,vae --vae16 " + d + "/a.ckpt --vae64 " + d +
                 "/a64.ckpt --jobs 2") == 0,
              "score 1 failed");
    o.require(sh("score --data " + d + "/masks --out " + d + "/s2.csv --measures "
                 "fill,compression,fft,vae --vae16 " + d + "/a.ckpt --vae64 " + d +
                 "/a64.ckpt --jobs 1") == 0,
              "score 2 failed");
    o.require(!slurp(d + "/s1.csv").empty() && slurp(d + "/s1.csv") == slurp(d + "/s2.csv"),
              "score CSVs differ across reruns");

    o.require(sh("rank --scores " + d + "/s1.csv --by combined --out " + d + "/r1.txt "
                 "--montage " + d + "/m1.png --data " + d + "/masks") == 0,
              "rank 1 failed");
    o.require(sh("rank --scores " + d + "/s1.csv --by combined --out " + d + "/r2.txt "
                 "--montage " + d + "/m2.png --data " + d + "/masks") == 0,
              "rank 2 failed");
    o.require(!slurp(d + "/m1.png").empty() && slurp(d + "/m1.png") == slurp(d + "/m2.png"),
              "montage bytes differ across reruns");

    o.require(sh("rank --scores " + d + "/s1.csv --by fill --out " + d + "/ref.txt") == 0,
              "rank ref failed");
    o.require(sh("eval --scores " + d + "/s1.csv --reference " + d + "/ref.txt --scatter " + d +
                 "/g1.svg --out " + d + "/e1.csv") == 0,
              "eval 1 failed");
    o.require(sh("eval --scores " + d + "/s1.csv --reference " + d + "/ref.txt --scatter " + d +
                 "/g2.svg --out " + d + "/e2.csv") == 0,
              "eval 2 failed");
    o.require(!slurp(d + "/g1.svg").empty() && slurp(d + "/g1.svg") == slurp(d + "/g2.svg"),
              "scatter bytes differ across reruns");
    if (o.pass) o.detail = "checkpoints, CSVs, montage and scatter byte-identical on rerun";
#else
    o.pass = false;
    o.detail = "binary path not compiled in";
#endif
    return o;
}

Outcome criterion_range_fuzz() {
    Outcome o;
    Rng seed_rng(4096);
    Rng init16(101), init64(102);
    const VaeModel m16 = make_vae<float>(16, init16);
    const VaeModel m64 = make_vae<float>(64, init64);

    constexpr int kCount = 10000;
    std::vector<Mask> masks;
    masks.reserve(kCount);
    int blanks = 0;
    for (int i = 0; i < kCount; ++i) {
        Mask m("f" + std::to_string(i));
        switch (i % 8) {
            case 0: m = make_noise(seed_rng.uniform(), seed_rng, m.id); break;
            case 1: m = make_disc(seed_rng.uniform(8, 56), seed_rng.uniform(8, 56),
                                  seed_rng.uniform(1, 30), m.id); break;
            case 2: m = make_rectangle(seed_rng.uniform(8, 56), seed_rng.uniform(8, 56),
                                       seed_rng.uniform(1, 60), seed_rng.uniform(1, 60), m.id); break;
            case 3: m = make_star(2 + seed_rng.uniform_int(9), seed_rng.uniform(0.05, 0.95),
                                  seed_rng.uniform(8, 56), seed_rng.uniform(8, 56),
                                  seed_rng.uniform(2, 30), seed_rng.uniform(0, 360), m.id); break;
            case 4: m = make_regular_polygon(3 + seed_rng.uniform_int(9),
                                             seed_rng.uniform(0, 64), seed_rng.uniform(0, 64),
                                             seed_rng.uniform(2, 40), seed_rng.uniform(0, 360), m.id); break;
            case 5: {  // all-black and all-white edge cases
                if (i % 16 == 5)
                    for (auto& v : m.pixels) v = 1.0f;
                break;
            }
            default: {
                const double p = seed_rng.uniform();
                for (auto& v : m.pixels) v = seed_rng.bernoulli(p) ? 1.0f : 0.0f;
                break;
            }
        }
        masks.push_back(std::move(m));
    }

    std::atomic<int> bad{0}, blank_rejections{0}, unexpected_errors{0};
    std::atomic<size_t> next{0};
    auto work = [&] {
        for (;;) {
            const size_t i = next.fetch_add(1);
            if (i >= masks.size()) return;
            const Mask& m = masks[i];
            const double fr = fill_ratio(m);
            const double c = compression_complexity(m);
            const double f = fft_complexity(m);
            if (!(fr >= 0 && fr <= 1 && c >= 0 && c <= 1 && f >= 0 && f <= 1)) ++bad;
            try {
                const double v = vae_complexity(m16, m64, m);
                if (!(v >= 0 && v <= 1)) ++bad;
            } catch (const DataError&) {
                if (fr == 0.0) ++blank_rejections;   // documented rejection
                else ++unexpected_errors;
            } catch (...) {
                ++unexpected_errors;
            }
        }
    };
    std::vector<std::thread> ts;
    for (unsigned w = 0; w < std::max(1u, std::thread::hardware_concurrency()); ++w)
        ts.emplace_back(work);
    for (auto& t : ts) t.join();
    (void)blanks;

    o.require(bad == 0, std::to_string(bad.load()) + " out-of-range values");
    o.require(unexpected_errors == 0,
              std::to_string(unexpected_errors.load()) + " unexpected errors");
    o.require(blank_rejections > 0, "no all-black mask exercised the documented rejection");
    if (o.pass)
        o.detail = "10000 masks in range; " + std::to_string(blank_rejections.load()) +
                   " documented all-black rejections";
    return o;
}

} // namespace

int main(int argc, char** argv) {
    struct Entry {
        int number;
        const char* name;
        std::function<Outcome()> fn;
    };
    const std::vector<Entry> entries = {
        {1, "numeric-core oracle suite", criterion_numeric_core},
        {2, "architecture shape check", criterion_architecture},
        {3, "analytic FFT fixtures", criterion_fft},
        {4, "compression fixtures", criterion_compression},
        {5, "Spearman correctness", criterion_spearman},
        {6, "training premise (bottleneck capacity)", criterion_training_premise},
        {7, "complexity ordering disc < star < noise", criterion_ordering},
        {8, "correlation pattern on the desk corpus", criterion_correlation_pattern},
        {9, "end-to-end determinism", criterion_determinism},
        {10, "measure range fuzz", criterion_range_fuzz},
    };

    int only = 0;
    if (argc > 1) only = std::atoi(argv[1]);

    int failed = 0;
    for (const auto& e : entries) {
        if (only && e.number != only) continue;
        const auto t0 = Clock::now();
        Outcome o;
        try {
            o = e.fn();
        } catch (const std::exception& ex) {
            o.pass = false;
            o.detail = std::string("exception: ") + ex.what();
        }
        const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
        std::printf("%s  %2d  %-45s %7.1fs  %s\n", o.pass ? "PASS" : "FAIL", e.number, e.name,
                    secs, o.detail.c_str());
        std::fflush(stdout);
        if (!o.pass) ++failed;
    }
    return failed;
}
