#pragma once

#include <optional>
#include <string>
#include <vector>

#include "shapecx/image.hpp"

namespace shapecx {

/// Per-shape measure values; every present component lies in [0,1].
struct ScoreVector {
    std::string shape_id;
    double fill = 0.0;
    double compression = 0.0;
    double fft = 0.0;
    std::optional<double> vae;
};

enum class Component { fill, compression, fft, vae };

const char* component_name(Component c);
std::optional<Component> component_from_name(const std::string& name);

/// DEFLATE-ratio measure: the mask serialized as 4096 bytes (0x00/0xff,
/// row-major) is compressed; the size ratio, clipped to 1, is scaled by
/// (1 - fill_ratio) for size invariance. Higher means more complex.
double compression_complexity(const Mask& m);

/// Spectral measure: power-weighted mean absolute frequency per axis
/// (DC excluded), combined by the Euclidean norm and normalized by the
/// Nyquist norm sqrt(0.5^2 + 0.5^2). Constant images score 0.
double fft_complexity(const Mask& m);

/// Euclidean magnitude of the chosen components, divided by sqrt(n) so the
/// result stays in [0,1]. A requested-but-absent component is a DataError.
double combine(const ScoreVector& scores, const std::vector<Component>& components);

/// Batch variant: each component is min/max-rescaled over the set before
/// the magnitude, equalizing the contributions. Components with no spread
/// contribute zero for every shape. Needs at least two shapes.
std::vector<double> combine_equalized(const std::vector<ScoreVector>& scores,
                                      const std::vector<Component>& components);

} // namespace shapecx
