#include "shapecx/measures.hpp"

#include <cmath>

#include "shapecx/deflate.hpp"
#include "shapecx/error.hpp"
#include "shapecx/fft.hpp"

namespace shapecx {

const char* component_name(Component c) {
    switch (c) {
        case Component::fill: return "fill";
        case Component::compression: return "compression";
        case Component::fft: return "fft";
        case Component::vae: return "vae";
    }
    return "?";
}

std::optional<Component> component_from_name(const std::string& name) {
    if (name == "fill") return Component::fill;
    if (name == "compression") return Component::compression;
    if (name == "fft") return Component::fft;
    if (name == "vae") return Component::vae;
    return std::nullopt;
}

double compression_complexity(const Mask& m) {
    std::vector<uint8_t> bytes(kMaskPixels);
    for (int i = 0; i < kMaskPixels; ++i)
        bytes[static_cast<size_t>(i)] = m.pixels[static_cast<size_t>(i)] >= 0.5f ? 0xff : 0x00;
    const double ratio =
        static_cast<double>(deflate(bytes).size()) / static_cast<double>(kMaskPixels);
    return std::min(1.0, ratio) * (1.0 - fill_ratio(m));
}

double fft_complexity(const Mask& m) {
    // The mean is removed first: the DC bin is excluded anyway, and a
    // zero-mean input makes the measure exactly invariant under contrast
    // inversion (the transform of the negated signal is the negated
    // spectrum, bit for bit).
    double mean = 0.0;
    for (float v : m.pixels) mean += v;
    mean /= kMaskPixels;
    std::vector<double> centered(kMaskPixels);
    for (int i = 0; i < kMaskPixels; ++i) centered[static_cast<size_t>(i)] = m.pixels[static_cast<size_t>(i)] - mean;

    const std::vector<Complex> spec = fft2d_real(centered, kMaskSize);

    double total = 0.0, wx = 0.0, wy = 0.0;
    for (int v = 0; v < kMaskSize; ++v) {
        const int sv = v < kMaskSize / 2 ? v : v - kMaskSize;  // signed frequency [-32, 31]
        const double fy = std::abs(sv) / static_cast<double>(kMaskSize);
        for (int u = 0; u < kMaskSize; ++u) {
            if (u == 0 && v == 0) continue;
            const int su = u < kMaskSize / 2 ? u : u - kMaskSize;
            const double fx = std::abs(su) / static_cast<double>(kMaskSize);
            const double p = std::norm(spec[static_cast<size_t>(v) * kMaskSize + u]);
            total += p;
            wx += p * fx;
            wy += p * fy;
        }
    }
    if (total <= 0.0) return 0.0;
    const double mx = wx / total, my = wy / total;
    return std::sqrt(mx * mx + my * my) / std::sqrt(0.5);
}

namespace {

double component_value(const ScoreVector& s, Component c) {
    switch (c) {
        case Component::fill: return s.fill;
        case Component::compression: return s.compression;
        case Component::fft: return s.fft;
        case Component::vae:
            if (!s.vae)
                throw DataError("shape '" + s.shape_id + "' has no vae score");
            return *s.vae;
    }
    throw DataError("unknown component");
}

} // namespace

double combine(const ScoreVector& scores, const std::vector<Component>& components) {
    if (components.empty()) throw DataError("combine: no components chosen");
    double sq = 0.0;
    for (Component c : components) {
        const double v = component_value(scores, c);
        sq += v * v;
    }
    return std::sqrt(sq) / std::sqrt(static_cast<double>(components.size()));
}

std::vector<double> combine_equalized(const std::vector<ScoreVector>& scores,
                                      const std::vector<Component>& components) {
    if (scores.size() < 2)
        throw DataError("combine_equalized: needs at least two shapes (batch-only rescaling)");
    if (components.empty()) throw DataError("combine_equalized: no components chosen");

    std::vector<double> lo(components.size()), hi(components.size());
    for (size_t c = 0; c < components.size(); ++c) {
        lo[c] = component_value(scores[0], components[c]);
        hi[c] = lo[c];
        for (const auto& s : scores) {
            const double v = component_value(s, components[c]);
            lo[c] = std::min(lo[c], v);
            hi[c] = std::max(hi[c], v);
        }
    }
    std::vector<double> out;
    out.reserve(scores.size());
    for (const auto& s : scores) {
        double sq = 0.0;
        for (size_t c = 0; c < components.size(); ++c) {
            const double range = hi[c] - lo[c];
            if (range <= 0.0) continue;  // constant component contributes nothing
            const double v = (component_value(s, components[c]) - lo[c]) / range;
            sq += v * v;
        }
        out.push_back(std::sqrt(sq) / std::sqrt(static_cast<double>(components.size())));
    }
    return out;
}

} // namespace shapecx
