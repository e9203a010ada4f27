#include "shapecx/shapes.hpp"

#include <cmath>
#include <cstdio>
#include <functional>

#include "shapecx/error.hpp"

namespace shapecx {
namespace {

constexpr double kPi = 3.14159265358979323846;

Mask render_inside(std::string id, const std::function<bool(double, double)>& inside) {
    Mask m(std::move(id));
    for (int y = 0; y < kMaskSize; ++y)
        for (int x = 0; x < kMaskSize; ++x)
            if (inside(x + 0.5, y + 0.5)) m.at(x, y) = 1.0f;
    return m;
}

// even-odd crossing test
bool point_in_polygon(const std::vector<std::pair<double, double>>& v, double px, double py) {
    bool in = false;
    for (size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
        const auto [xi, yi] = v[i];
        const auto [xj, yj] = v[j];
        if ((yi > py) != (yj > py) && px < (xj - xi) * (py - yi) / (yj - yi) + xi) in = !in;
    }
    return in;
}

std::vector<std::pair<double, double>> star_vertices(int points, double inner_ratio, double cx,
                                                     double cy, double outer_r, double rot_deg) {
    std::vector<std::pair<double, double>> v;
    const double rot = rot_deg * kPi / 180.0;
    for (int i = 0; i < 2 * points; ++i) {
        const double r = (i % 2 == 0) ? outer_r : outer_r * inner_ratio;
        const double a = rot - kPi / 2 + kPi * i / points;
        v.emplace_back(cx + r * std::cos(a), cy + r * std::sin(a));
    }
    return v;
}

} // namespace

Mask make_disc(double cx, double cy, double radius, std::string id) {
    if (radius <= 0) throw DataError("disc: radius must be positive");
    const double r2 = radius * radius;
    return render_inside(std::move(id), [=](double px, double py) {
        const double dx = px - cx, dy = py - cy;
        return dx * dx + dy * dy <= r2;
    });
}

Mask make_rectangle(double cx, double cy, double w, double h, std::string id) {
    if (w <= 0 || h <= 0) throw DataError("rectangle: sides must be positive");
    return render_inside(std::move(id), [=](double px, double py) {
        return std::abs(px - cx) <= w / 2 && std::abs(py - cy) <= h / 2;
    });
}

Mask make_regular_polygon(int k, double cx, double cy, double radius, double rot_deg,
                          std::string id) {
    if (k < 3) throw DataError("polygon: needs at least 3 vertices");
    if (radius <= 0) throw DataError("polygon: radius must be positive");
    std::vector<std::pair<double, double>> v;
    const double rot = rot_deg * kPi / 180.0;
    for (int i = 0; i < k; ++i) {
        const double a = rot - kPi / 2 + 2 * kPi * i / k;
        v.emplace_back(cx + radius * std::cos(a), cy + radius * std::sin(a));
    }
    return render_inside(std::move(id),
                         [v](double px, double py) { return point_in_polygon(v, px, py); });
}

Mask make_star(int points, double inner_ratio, double cx, double cy, double outer_radius,
               double rot_deg, std::string id) {
    if (points < 2) throw DataError("star: needs at least 2 points");
    if (outer_radius <= 0) throw DataError("star: radius must be positive");
    if (inner_ratio <= 0 || inner_ratio >= 1)
        throw DataError("star: inner_ratio must be in (0,1)");
    const auto v = star_vertices(points, inner_ratio, cx, cy, outer_radius, rot_deg);
    return render_inside(std::move(id),
                         [v](double px, double py) { return point_in_polygon(v, px, py); });
}

Mask make_noise(double p, Rng& rng, std::string id) {
    if (p < 0 || p > 1) throw DataError("noise: probability must be in [0,1]");
    Mask m(std::move(id));
    for (auto& px : m.pixels) px = rng.bernoulli(p) ? 1.0f : 0.0f;
    return m;
}

std::vector<Mask> synthetic_corpus(int count, uint64_t seed) {
    Rng rng(seed);
    std::vector<Mask> out;
    out.reserve(static_cast<size_t>(count));
    char buf[64];
    for (int i = 0; i < count; ++i) {
        const double cx = 32.0 + rng.uniform(-6.0, 6.0);
        const double cy = 32.0 + rng.uniform(-6.0, 6.0);
        switch (i % 5) {
            case 0: {
                std::snprintf(buf, sizeof buf, "%04d_disc", i);
                out.push_back(make_disc(cx, cy, rng.uniform(10.0, 24.0), buf));
                break;
            }
            case 1: {
                std::snprintf(buf, sizeof buf, "%04d_rect", i);
                out.push_back(
                    make_rectangle(cx, cy, rng.uniform(12.0, 44.0), rng.uniform(12.0, 44.0), buf));
                break;
            }
            case 2: {
                std::snprintf(buf, sizeof buf, "%04d_poly", i);
                out.push_back(make_regular_polygon(3 + rng.uniform_int(6), cx, cy,
                                                   rng.uniform(12.0, 26.0),
                                                   rng.uniform(0.0, 360.0), buf));
                break;
            }
            case 3: {
                std::snprintf(buf, sizeof buf, "%04d_star", i);
                out.push_back(make_star(4 + rng.uniform_int(6), rng.uniform(0.3, 0.7), cx, cy,
                                        rng.uniform(14.0, 27.0), rng.uniform(0.0, 360.0), buf));
                break;
            }
            case 4: {
                std::snprintf(buf, sizeof buf, "%04d_noise", i);
                out.push_back(make_noise(rng.uniform(0.05, 0.6), rng, buf));
                break;
            }
        }
    }
    return out;
}

} // namespace shapecx
