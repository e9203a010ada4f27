#pragma once

#include <string>
#include <vector>

#include "shapecx/image.hpp"
#include "shapecx/rng.hpp"

namespace shapecx {

// Synthetic 64x64 binary shapes, rendered by an analytic inside-test at
// pixel centers. Deterministic given the arguments (and seed, for noise).
// Degenerate parameters (non-positive sizes, ratios outside range) throw
// DataError.

Mask make_disc(double cx, double cy, double radius, std::string id = {});
Mask make_rectangle(double cx, double cy, double w, double h, std::string id = {});
/// k >= 3 vertices, circumradius `radius`, rotated by rot_deg.
Mask make_regular_polygon(int k, double cx, double cy, double radius, double rot_deg,
                          std::string id = {});
/// Star polygon with `points` spikes; inner vertices at inner_ratio * outer_radius.
Mask make_star(int points, double inner_ratio, double cx, double cy, double outer_radius,
               double rot_deg, std::string id = {});
/// Each pixel white independently with probability p.
Mask make_noise(double p, Rng& rng, std::string id = {});

/// Mixed corpus of the kinds above with randomized parameters; ids are
/// zero-padded and carry the kind name, so lexicographic order is stable.
std::vector<Mask> synthetic_corpus(int count, uint64_t seed);

} // namespace shapecx
