#include "shapecx/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "shapecx/deflate.hpp"
#include "shapecx/error.hpp"

namespace shapecx {
namespace {

std::vector<uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                               std::istreambuf_iterator<char>());
    return bytes;
}

void write_file(const std::filesystem::path& path, const std::vector<uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("short write to " + path.string());
}

// ---- PGM ------------------------------------------------------------------

// Whitespace/comment-skipping integer scanner over the PGM header.
struct PgmScanner {
    const std::vector<uint8_t>& b;
    size_t pos;

    void skip_space() {
        while (pos < b.size()) {
            if (std::isspace(b[pos])) {
                ++pos;
            } else if (b[pos] == '#') {
                while (pos < b.size() && b[pos] != '\n') ++pos;
            } else {
                break;
            }
        }
    }

    int next_int(const char* what) {
        skip_space();
        if (pos >= b.size() || !std::isdigit(b[pos]))
            throw DecodeError(std::string("pgm: expected ") + what + " at byte " +
                              std::to_string(pos));
        long v = 0;
        while (pos < b.size() && std::isdigit(b[pos])) {
            v = v * 10 + (b[pos] - '0');
            if (v > 1 << 30) throw DecodeError("pgm: numeric overflow at byte " + std::to_string(pos));
            ++pos;
        }
        return static_cast<int>(v);
    }
};

RawImage decode_pgm(const std::vector<uint8_t>& bytes) {
    const bool ascii = bytes[1] == '2';
    PgmScanner sc{bytes, 2};
    RawImage img;
    img.width = sc.next_int("width");
    img.height = sc.next_int("height");
    const int maxval = sc.next_int("maxval");
    if (img.width <= 0 || img.height <= 0)
        throw DecodeError("pgm: bad dimensions at byte " + std::to_string(sc.pos));
    if (maxval <= 0 || maxval > 255)
        throw DecodeError("pgm: only 8-bit maxval supported, got " + std::to_string(maxval) +
                          " at byte " + std::to_string(sc.pos));
    const size_t n = static_cast<size_t>(img.width) * img.height;
    img.pixels.resize(n);
    if (ascii) {
        for (size_t i = 0; i < n; ++i) {
            const int v = sc.next_int("pixel");
            if (v > maxval)
                throw DecodeError("pgm: pixel exceeds maxval at byte " + std::to_string(sc.pos));
            img.pixels[i] = static_cast<uint8_t>(v);
        }
    } else {
        // single whitespace byte after maxval, then raw data
        if (sc.pos >= bytes.size() || !std::isspace(bytes[sc.pos]))
            throw DecodeError("pgm: missing separator at byte " + std::to_string(sc.pos));
        ++sc.pos;
        if (bytes.size() - sc.pos < n)
            throw DecodeError("pgm: truncated pixel data at byte " + std::to_string(bytes.size()));
        std::memcpy(img.pixels.data(), bytes.data() + sc.pos, n);
    }
    return img;
}

// ---- PNG ------------------------------------------------------------------

const uint8_t kPngSig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};

uint32_t be32(const uint8_t* p) {
    return (static_cast<uint32_t>(p[0]) << 24) | (static_cast<uint32_t>(p[1]) << 16) |
           (static_cast<uint32_t>(p[2]) << 8) | static_cast<uint32_t>(p[3]);
}

void put_be32(std::vector<uint8_t>& out, uint32_t v) {
    out.push_back(static_cast<uint8_t>(v >> 24));
    out.push_back(static_cast<uint8_t>(v >> 16));
    out.push_back(static_cast<uint8_t>(v >> 8));
    out.push_back(static_cast<uint8_t>(v));
}

uint8_t paeth(int a, int b, int c) {
    const int p = a + b - c;
    const int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
    if (pa <= pb && pa <= pc) return static_cast<uint8_t>(a);
    if (pb <= pc) return static_cast<uint8_t>(b);
    return static_cast<uint8_t>(c);
}

RawImage decode_png(const std::vector<uint8_t>& bytes) {
    size_t pos = 8;
    int width = 0, height = 0, bit_depth = 0, color_type = 0;
    bool seen_ihdr = false, seen_iend = false;
    std::vector<uint8_t> idat;

    while (pos < bytes.size()) {
        if (bytes.size() - pos < 12)
            throw DecodeError("png: truncated chunk header at byte " + std::to_string(pos));
        const uint32_t len = be32(&bytes[pos]);
        if (bytes.size() - pos < 12 + static_cast<size_t>(len))
            throw DecodeError("png: truncated chunk data at byte " + std::to_string(bytes.size()));
        const char* type = reinterpret_cast<const char*>(&bytes[pos + 4]);
        const uint8_t* data = &bytes[pos + 8];
        const uint32_t want_crc = be32(&bytes[pos + 8 + len]);
        if (crc32(&bytes[pos + 4], 4 + len) != want_crc)
            throw DecodeError("png: chunk crc mismatch at byte " + std::to_string(pos + 8 + len));

        if (std::memcmp(type, "IHDR", 4) == 0) {
            if (len != 13) throw DecodeError("png: bad IHDR length at byte " + std::to_string(pos));
            width = static_cast<int>(be32(data));
            height = static_cast<int>(be32(data + 4));
            bit_depth = data[8];
            color_type = data[9];
            if (width <= 0 || height <= 0)
                throw DecodeError("png: bad dimensions at byte " + std::to_string(pos + 8));
            if (bit_depth != 8)
                throw DecodeError("png: only 8-bit depth supported at byte " +
                                  std::to_string(pos + 16));
            if (color_type != 0 && color_type != 2 && color_type != 4 && color_type != 6)
                throw DecodeError("png: unsupported color type " + std::to_string(color_type) +
                                  " (palette images need conversion) at byte " +
                                  std::to_string(pos + 17));
            if (data[10] != 0 || data[11] != 0)
                throw DecodeError("png: nonstandard compression/filter at byte " +
                                  std::to_string(pos + 18));
            if (data[12] != 0)
                throw DecodeError("png: interlaced images unsupported at byte " +
                                  std::to_string(pos + 20));
            seen_ihdr = true;
        } else if (std::memcmp(type, "IDAT", 4) == 0) {
            idat.insert(idat.end(), data, data + len);
        } else if (std::memcmp(type, "IEND", 4) == 0) {
            seen_iend = true;
            break;
        }
        // ancillary chunks ignored
        pos += 12 + len;
    }
    if (!seen_ihdr) throw DecodeError("png: missing IHDR at byte 8");
    if (!seen_iend) throw DecodeError("png: missing IEND at byte " + std::to_string(bytes.size()));

    const int channels = color_type == 0 ? 1 : color_type == 2 ? 3 : color_type == 4 ? 2 : 4;
    const std::vector<uint8_t> raw = zlib_decompress(idat.data(), idat.size());
    const size_t stride = static_cast<size_t>(width) * channels;
    if (raw.size() != (stride + 1) * static_cast<size_t>(height))
        throw DecodeError("png: decompressed size mismatch, got " + std::to_string(raw.size()) +
                          " bytes");

    std::vector<uint8_t> scan(stride, 0), prior(stride, 0);
    RawImage img;
    img.width = width;
    img.height = height;
    img.pixels.resize(static_cast<size_t>(width) * height);
    const int bpp = channels;
    for (int y = 0; y < height; ++y) {
        const uint8_t* row = raw.data() + static_cast<size_t>(y) * (stride + 1);
        const uint8_t filter = row[0];
        const uint8_t* src = row + 1;
        for (size_t i = 0; i < stride; ++i) {
            const int a = i >= static_cast<size_t>(bpp) ? scan[i - bpp] : 0;
            const int b = prior[i];
            const int c = i >= static_cast<size_t>(bpp) ? prior[i - bpp] : 0;
            int v = src[i];
            switch (filter) {
                case 0: break;
                case 1: v += a; break;
                case 2: v += b; break;
                case 3: v += (a + b) / 2; break;
                case 4: v += paeth(a, b, c); break;
                default:
                    throw DecodeError("png: unknown filter " + std::to_string(filter) + " in row " +
                                      std::to_string(y));
            }
            scan[i] = static_cast<uint8_t>(v);
        }
        for (int x = 0; x < width; ++x) {
            uint8_t g;
            const uint8_t* px = scan.data() + static_cast<size_t>(x) * channels;
            if (channels == 1 || channels == 2) {
                g = px[0];
            } else {
                // Rec.601 luma
                g = static_cast<uint8_t>(
                    std::lround(0.299 * px[0] + 0.587 * px[1] + 0.114 * px[2]));
            }
            img.pixels[static_cast<size_t>(y) * width + x] = g;
        }
        std::swap(scan, prior);
    }
    return img;
}

std::vector<uint8_t> encode_png(int width, int height, int channels,
                                const std::vector<uint8_t>& data) {
    std::vector<uint8_t> out(kPngSig, kPngSig + 8);

    auto chunk = [&out](const char* type, const std::vector<uint8_t>& payload) {
        put_be32(out, static_cast<uint32_t>(payload.size()));
        const size_t start = out.size();
        out.insert(out.end(), type, type + 4);
        out.insert(out.end(), payload.begin(), payload.end());
        put_be32(out, crc32(out.data() + start, out.size() - start));
    };

    std::vector<uint8_t> ihdr;
    put_be32(ihdr, static_cast<uint32_t>(width));
    put_be32(ihdr, static_cast<uint32_t>(height));
    ihdr.push_back(8);
    ihdr.push_back(channels == 1 ? 0 : 2);
    ihdr.push_back(0);
    ihdr.push_back(0);
    ihdr.push_back(0);
    chunk("IHDR", ihdr);

    const size_t stride = static_cast<size_t>(width) * channels;
    std::vector<uint8_t> raw;
    raw.reserve((stride + 1) * static_cast<size_t>(height));
    for (int y = 0; y < height; ++y) {
        raw.push_back(0);  // filter: none
        raw.insert(raw.end(), data.begin() + static_cast<long>(y * stride),
                   data.begin() + static_cast<long>((y + 1) * stride));
    }
    chunk("IDAT", zlib_compress(raw.data(), raw.size()));
    chunk("IEND", {});
    return out;
}

} // namespace

RawImage decode_image(const std::vector<uint8_t>& bytes, const std::string& name) {
    if (bytes.size() >= 6 &&
        (std::memcmp(bytes.data(), "GIF87a", 6) == 0 || std::memcmp(bytes.data(), "GIF89a", 6) == 0))
        throw DecodeError(name + ": GIF is unsupported, convert to PGM or PNG first");
    if (bytes.size() >= 8 && std::memcmp(bytes.data(), kPngSig, 8) == 0) return decode_png(bytes);
    if (bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '2' || bytes[1] == '5'))
        return decode_pgm(bytes);
    throw DecodeError(name + ": unrecognized image format at byte 0 (PGM P2/P5 or PNG expected)");
}

RawImage load_image(const std::filesystem::path& path) {
    try {
        return decode_image(read_file(path), path.filename().string());
    } catch (const DecodeError& e) {
        throw DecodeError(path.string() + ": " + e.what());
    }
}

void save_pgm(const RawImage& img, const std::filesystem::path& path) {
    std::vector<uint8_t> out;
    const std::string header =
        "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
    out.insert(out.end(), header.begin(), header.end());
    out.insert(out.end(), img.pixels.begin(), img.pixels.end());
    write_file(path, out);
}

std::vector<uint8_t> encode_png_gray(const RawImage& img) {
    return encode_png(img.width, img.height, 1, img.pixels);
}

std::vector<uint8_t> encode_png_rgb(int width, int height, const std::vector<uint8_t>& rgb) {
    return encode_png(width, height, 3, rgb);
}

void save_png_gray(const RawImage& img, const std::filesystem::path& path) {
    write_file(path, encode_png_gray(img));
}

void save_mask_pgm(const Mask& m, const std::filesystem::path& path) {
    RawImage img;
    img.width = img.height = kMaskSize;
    img.pixels.resize(kMaskPixels);
    for (int i = 0; i < kMaskPixels; ++i)
        img.pixels[static_cast<size_t>(i)] = m.pixels[static_cast<size_t>(i)] >= 0.5f ? 255 : 0;
    save_pgm(img, path);
}

Mask load_mask(const std::filesystem::path& path, uint8_t threshold) {
    const RawImage img = load_image(path);
    if (img.width != kMaskSize || img.height != kMaskSize)
        throw DataError(path.string() + ": expected a 64x64 mask, got " +
                        std::to_string(img.width) + "x" + std::to_string(img.height) +
                        " (preprocess the dataset first)");
    Mask m(path.stem().string());
    for (int i = 0; i < kMaskPixels; ++i)
        m.pixels[static_cast<size_t>(i)] = img.pixels[static_cast<size_t>(i)] >= threshold ? 1.0f : 0.0f;
    return m;
}

std::vector<std::filesystem::path> list_dataset(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir))
        throw DataError(dir.string() + " is not a directory");
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(dir)) {
        if (!e.is_regular_file()) continue;
        const auto ext = e.path().extension().string();
        if (ext == ".pgm" || ext == ".png" || ext == ".PGM" || ext == ".PNG")
            files.push_back(e.path());
    }
    std::sort(files.begin(), files.end(),
              [](const auto& a, const auto& b) { return a.filename() < b.filename(); });
    return files;
}

// ---------------------------------------------------------------------------

Mask preprocess(const RawImage& img, uint8_t threshold, std::string id) {
    int x0 = img.width, x1 = -1, y0 = img.height, y1 = -1;
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            if (img.at(x, y) >= threshold) {
                x0 = std::min(x0, x);
                x1 = std::max(x1, x);
                y0 = std::min(y0, y);
                y1 = std::max(y1, y);
            }
    if (x1 < 0) throw DataError("empty shape: no pixel reaches threshold " + std::to_string(threshold));

    // minimum centered square around the bounding box, in continuous coords
    const double side = std::max(x1 - x0 + 1, y1 - y0 + 1);
    const double cx = (x0 + x1 + 1) / 2.0;
    const double cy = (y0 + y1 + 1) / 2.0;
    const double left = cx - side / 2.0;
    const double top = cy - side / 2.0;

    // area-average each destination cell over its source rectangle;
    // regions outside the image count as background
    Mask m(std::move(id));
    const double step = side / kMaskSize;
    for (int oy = 0; oy < kMaskSize; ++oy) {
        const double sy0 = top + oy * step, sy1 = sy0 + step;
        for (int ox = 0; ox < kMaskSize; ++ox) {
            const double sx0 = left + ox * step, sx1 = sx0 + step;
            double acc = 0.0;
            const int iy0 = std::max(0, static_cast<int>(std::floor(sy0)));
            const int iy1 = std::min(img.height - 1, static_cast<int>(std::ceil(sy1)) - 1);
            const int ix0 = std::max(0, static_cast<int>(std::floor(sx0)));
            const int ix1 = std::min(img.width - 1, static_cast<int>(std::ceil(sx1)) - 1);
            for (int iy = iy0; iy <= iy1; ++iy) {
                const double hy = std::min(sy1, iy + 1.0) - std::max(sy0, static_cast<double>(iy));
                if (hy <= 0) continue;
                for (int ix = ix0; ix <= ix1; ++ix) {
                    if (img.at(ix, iy) < threshold) continue;
                    const double hx =
                        std::min(sx1, ix + 1.0) - std::max(sx0, static_cast<double>(ix));
                    if (hx > 0) acc += hx * hy;
                }
            }
            m.at(ox, oy) = acc / (step * step) >= 0.5 ? 1.0f : 0.0f;
        }
    }
    return m;
}

Mask hflip(const Mask& m) {
    Mask out(m.id);
    for (int y = 0; y < kMaskSize; ++y)
        for (int x = 0; x < kMaskSize; ++x) out.at(x, y) = m.at(kMaskSize - 1 - x, y);
    return out;
}

Mask vflip(const Mask& m) {
    Mask out(m.id);
    for (int y = 0; y < kMaskSize; ++y)
        for (int x = 0; x < kMaskSize; ++x) out.at(x, y) = m.at(x, kMaskSize - 1 - y);
    return out;
}

Mask rotate(const Mask& m, double degrees) {
    const double rad = degrees * 3.14159265358979323846 / 180.0;
    const double c = std::cos(rad), s = std::sin(rad);
    const double ctr = kMaskSize / 2.0;
    Mask out(m.id);
    for (int y = 0; y < kMaskSize; ++y)
        for (int x = 0; x < kMaskSize; ++x) {
            // inverse-map the destination pixel center into the source
            const double dx = x + 0.5 - ctr, dy = y + 0.5 - ctr;
            const double sx = c * dx + s * dy + ctr - 0.5;
            const double sy = -s * dx + c * dy + ctr - 0.5;
            const int x0 = static_cast<int>(std::floor(sx)), y0 = static_cast<int>(std::floor(sy));
            const double fx = sx - x0, fy = sy - y0;
            double v = 0.0;
            for (int j = 0; j <= 1; ++j)
                for (int i = 0; i <= 1; ++i) {
                    const int xi = x0 + i, yj = y0 + j;
                    if (xi < 0 || xi >= kMaskSize || yj < 0 || yj >= kMaskSize) continue;
                    const double w = (i ? fx : 1.0 - fx) * (j ? fy : 1.0 - fy);
                    v += w * m.at(xi, yj);
                }
            out.at(x, y) = v >= 0.5 ? 1.0f : 0.0f;
        }
    return out;
}

Mask augment(const Mask& m, Rng& rng) {
    Mask out = m;
    if (rng.bernoulli(0.5)) out = hflip(out);
    if (rng.bernoulli(0.5)) out = vflip(out);
    if (rng.bernoulli(0.5)) out = rotate(out, rng.uniform(-85.0, 85.0));
    return out;
}

double fill_ratio(const Mask& m) {
    double s = 0.0;
    for (float v : m.pixels) s += v;
    return s / kMaskPixels;
}

} // namespace shapecx
