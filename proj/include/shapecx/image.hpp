#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "shapecx/rng.hpp"

namespace shapecx {

constexpr int kMaskSize = 64;
constexpr int kMaskPixels = kMaskSize * kMaskSize;

/// Grayscale image as decoded from disk, any dimensions.
struct RawImage {
    int width = 0;
    int height = 0;
    std::vector<uint8_t> pixels;  // row-major, width*height

    uint8_t at(int x, int y) const { return pixels[static_cast<size_t>(y) * width + x]; }
};

/// The scoring unit: a 64x64 image with values in [0,1]; binary ({0,1})
/// after preprocessing.
struct Mask {
    std::string id;
    std::vector<float> pixels;  // row-major, 64*64

    Mask() : pixels(kMaskPixels, 0.0f) {}
    explicit Mask(std::string id_) : id(std::move(id_)), pixels(kMaskPixels, 0.0f) {}

    float at(int x, int y) const { return pixels[static_cast<size_t>(y) * kMaskSize + x]; }
    float& at(int x, int y) { return pixels[static_cast<size_t>(y) * kMaskSize + x]; }
};

// ---------------------------------------------------------------------------
// file IO: PGM (P2/P5) and PNG (8-bit gray/RGB; RGB converted by luma)
// ---------------------------------------------------------------------------

RawImage load_image(const std::filesystem::path& path);
RawImage decode_image(const std::vector<uint8_t>& bytes, const std::string& name);

void save_pgm(const RawImage& img, const std::filesystem::path& path);
void save_png_gray(const RawImage& img, const std::filesystem::path& path);
std::vector<uint8_t> encode_png_gray(const RawImage& img);
std::vector<uint8_t> encode_png_rgb(int width, int height, const std::vector<uint8_t>& rgb);

/// Write a binary mask as a P5 PGM (0 -> 0x00, 1 -> 0xff).
void save_mask_pgm(const Mask& m, const std::filesystem::path& path);

/// Load a 64x64 image as a mask, binarizing at the threshold.
/// Non-64x64 inputs are a DataError (run preprocessing first).
Mask load_mask(const std::filesystem::path& path, uint8_t threshold = 128);

/// Image files of a dataset directory in lexicographic filename order.
std::vector<std::filesystem::path> list_dataset(const std::filesystem::path& dir);

// ---------------------------------------------------------------------------
// preprocessing / augmentation
// ---------------------------------------------------------------------------

/// Binarize (>= threshold is foreground), crop to the minimum centered
/// square around the foreground bounding box (background-padded where the
/// square leaves the image), area-average down to 64x64 and re-binarize
/// at 0.5. Throws DataError when no pixel clears the threshold.
Mask preprocess(const RawImage& img, uint8_t threshold = 128, std::string id = {});

/// Training-time augmentation: horizontal flip (p=0.5), vertical flip
/// (p=0.5), rotation by a uniform angle in [-85, +85] degrees (p=0.5) about
/// the image center with bilinear resampling, zero fill, re-binarized at 0.5.
Mask augment(const Mask& m, Rng& rng);

Mask hflip(const Mask& m);
Mask vflip(const Mask& m);
Mask rotate(const Mask& m, double degrees);

/// Fraction of white pixels.
double fill_ratio(const Mask& m);

} // namespace shapecx
