#include "shapecx/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "shapecx/error.hpp"

namespace shapecx {
namespace {

std::string fmt6(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw DataError("short write to " + path.string());
}

// ---- 5x7 bitmap font (digits plus '.', '-'); bit 4 = leftmost column ----

struct Glyph {
    char ch;
    uint8_t rows[7];
};

const Glyph kFont[] = {
    {'0', {0x0e, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0e}},
    {'1', {0x04, 0x0c, 0x04, 0x04, 0x04, 0x04, 0x0e}},
    {'2', {0x0e, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1f}},
    {'3', {0x1f, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0e}},
    {'4', {0x02, 0x06, 0x0a, 0x12, 0x1f, 0x02, 0x02}},
    {'5', {0x1f, 0x10, 0x1e, 0x01, 0x01, 0x11, 0x0e}},
    {'6', {0x06, 0x08, 0x10, 0x1e, 0x11, 0x11, 0x0e}},
    {'7', {0x1f, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08}},
    {'8', {0x0e, 0x11, 0x11, 0x0e, 0x11, 0x11, 0x0e}},
    {'9', {0x0e, 0x11, 0x11, 0x0f, 0x01, 0x02, 0x0c}},
    {'.', {0x00, 0x00, 0x00, 0x00, 0x00, 0x0c, 0x0c}},
    {'-', {0x00, 0x00, 0x00, 0x1f, 0x00, 0x00, 0x00}},
};

const uint8_t* glyph_rows(char c) {
    for (const auto& g : kFont)
        if (g.ch == c) return g.rows;
    return nullptr;  // unknown characters render as a space
}

} // namespace

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

void write_scores_csv(const std::vector<ScoreRow>& rows, const std::filesystem::path& path) {
    std::string out = "id,fill,compression,fft,vae,combined,combined_eq\n";
    for (const auto& r : rows) {
        if (r.scores.shape_id.find(',') != std::string::npos)
            throw DataError("shape id '" + r.scores.shape_id + "' contains a comma");
        out += r.scores.shape_id;
        out += ',' + fmt6(r.scores.fill);
        out += ',' + fmt6(r.scores.compression);
        out += ',' + fmt6(r.scores.fft);
        out += ',';
        if (r.scores.vae) out += fmt6(*r.scores.vae);
        out += ',';
        if (r.combined) out += fmt6(*r.combined);
        out += ',';
        if (r.combined_eq) out += fmt6(*r.combined_eq);
        out += '\n';
    }
    write_text(path, out);
}

std::vector<ScoreRow> read_scores_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open scores file " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw DataError(path.string() + ": empty scores file");
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
    if (line != "id,fill,compression,fft,vae,combined,combined_eq")
        throw DataError(path.string() + ": unexpected scores header '" + line + "'");

    std::vector<ScoreRow> rows;
    size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (line.back() == ',') fields.push_back("");
        if (fields.size() != 7)
            throw DataError(path.string() + ":" + std::to_string(lineno) + ": expected 7 fields");
        auto num = [&](const std::string& s) -> std::optional<double> {
            if (s.empty()) return std::nullopt;
            size_t used = 0;
            const double v = std::stod(s, &used);
            if (used != s.size())
                throw DataError(path.string() + ":" + std::to_string(lineno) +
                                ": bad number '" + s + "'");
            return v;
        };
        ScoreRow r;
        r.scores.shape_id = fields[0];
        const auto fill = num(fields[1]), comp = num(fields[2]), fft = num(fields[3]);
        if (!fill || !comp || !fft)
            throw DataError(path.string() + ":" + std::to_string(lineno) +
                            ": fill/compression/fft must be present");
        r.scores.fill = *fill;
        r.scores.compression = *comp;
        r.scores.fft = *fft;
        r.scores.vae = num(fields[4]);
        r.combined = num(fields[5]);
        r.combined_eq = num(fields[6]);
        rows.push_back(std::move(r));
    }
    return rows;
}

// ---------------------------------------------------------------------------
// montage
// ---------------------------------------------------------------------------

std::vector<uint8_t> render_montage_png(const Ranking& ranking,
                                        const std::map<std::string, Mask>& masks,
                                        const std::map<std::string, std::vector<std::string>>& labels) {
    if (ranking.order.empty()) throw DataError("montage: empty ranking");
    int max_lines = 1;
    for (const auto& id : ranking.order) {
        if (!masks.count(id)) throw DataError("montage: no mask for id '" + id + "'");
        const auto it = labels.find(id);
        if (it == labels.end() || it->second.empty())
            throw DataError("montage: no labels for id '" + id + "'");
        if (it->second.size() > 3)
            throw DataError("montage: more than 3 label lines for id '" + id + "'");
        max_lines = std::max(max_lines, static_cast<int>(it->second.size()));
    }

    const int n = static_cast<int>(ranking.order.size());
    const int width = kMontagePad + n * (kMontageCell + kMontagePad);
    const int height = kMontagePad + kMontageCell + 2 + max_lines * kMontageLineHeight + kMontagePad;
    std::vector<uint8_t> rgb(static_cast<size_t>(width) * height * 3, 0);

    auto put = [&](int x, int y, uint8_t r, uint8_t g, uint8_t b) {
        const size_t o = (static_cast<size_t>(y) * width + x) * 3;
        rgb[o] = r;
        rgb[o + 1] = g;
        rgb[o + 2] = b;
    };

    for (int c = 0; c < n; ++c) {
        const Mask& m = masks.at(ranking.order[static_cast<size_t>(c)]);
        const int ox = kMontagePad + c * (kMontageCell + kMontagePad);
        const int oy = kMontagePad;
        for (int y = 0; y < kMontageCell; ++y)
            for (int x = 0; x < kMontageCell; ++x) {
                const uint8_t v = m.at(x / 2, y / 2) >= 0.5f ? 255 : 0;
                put(ox + x, oy + y, v, v, v);
            }
        const auto& lines = labels.at(ranking.order[static_cast<size_t>(c)]);
        for (size_t l = 0; l < lines.size(); ++l) {
            const int ty = oy + kMontageCell + 2 + static_cast<int>(l) * kMontageLineHeight;
            int tx = ox;
            for (char ch : lines[l]) {
                const uint8_t* rows = glyph_rows(ch);
                if (rows)
                    for (int gy = 0; gy < 7; ++gy)
                        for (int gx = 0; gx < 5; ++gx)
                            if (rows[gy] & (0x10 >> gx)) {
                                const int px = tx + gx, py = ty + gy;
                                if (px < width && py < height) put(px, py, 255, 165, 0);
                            }
                tx += 6;
                if (tx >= ox + kMontageCell) break;  // clip to the cell
            }
        }
    }
    return encode_png_rgb(width, height, rgb);
}

void render_montage(const Ranking& ranking, const std::map<std::string, Mask>& masks,
                    const std::map<std::string, std::vector<std::string>>& labels,
                    const std::filesystem::path& path) {
    const std::vector<uint8_t> png = render_montage_png(ranking, masks, labels);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(png.data()), static_cast<std::streamsize>(png.size()));
    if (!out) throw DataError("short write to " + path.string());
}

// ---------------------------------------------------------------------------
// scatter SVG
// ---------------------------------------------------------------------------

std::string render_scatter_svg(const std::vector<ScatterSeries>& series) {
    if (series.empty()) throw DataError("scatter: no series");
    double max_rank = 1.0;
    for (const auto& s : series) {
        if (s.points.empty()) throw DataError("scatter: series '" + s.name + "' is empty");
        for (const auto& [x, y] : s.points) max_rank = std::max({max_rank, x, y});
    }

    const int w = 640, h = 480, ml = 56, mr = 150, mt = 24, mb = 44;
    const double px = (w - ml - mr) / std::max(1.0, max_rank - 1.0);
    const double py = (h - mt - mb) / std::max(1.0, max_rank - 1.0);
    auto X = [&](double v) { return ml + (v - 1.0) * px; };
    auto Y = [&](double v) { return h - mb - (v - 1.0) * py; };
    auto f2 = [](double v) {
        char b[32];
        std::snprintf(b, sizeof b, "%.2f", v);
        return std::string(b);
    };

    static const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                     "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};
    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" +
           std::to_string(w) + "\" height=\"" + std::to_string(h) + "\">\n";
    for (size_t i = 0; i < series.size(); ++i)
        svg += "<!-- series " + series[i].name + " trendline slope=" + fmt6(series[i].slope) +
               " intercept=" + fmt6(series[i].intercept) + " -->\n";
    svg += "<rect width=\"" + std::to_string(w) + "\" height=\"" + std::to_string(h) +
           "\" fill=\"white\"/>\n";
    // axes
    svg += "<line x1=\"" + f2(X(1)) + "\" y1=\"" + f2(Y(1)) + "\" x2=\"" + f2(X(max_rank)) +
           "\" y2=\"" + f2(Y(1)) + "\" stroke=\"black\"/>\n";
    svg += "<line x1=\"" + f2(X(1)) + "\" y1=\"" + f2(Y(1)) + "\" x2=\"" + f2(X(1)) + "\" y2=\"" +
           f2(Y(max_rank)) + "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + f2((X(1) + X(max_rank)) / 2) + "\" y=\"" + std::to_string(h - 10) +
           "\" font-size=\"13\" text-anchor=\"middle\">reference rank</text>\n";
    svg += "<text x=\"14\" y=\"" + f2((Y(1) + Y(max_rank)) / 2) +
           "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 14 " +
           f2((Y(1) + Y(max_rank)) / 2) + ")\">measure rank</text>\n";
    for (double v : {1.0, max_rank}) {
        svg += "<text x=\"" + f2(X(v)) + "\" y=\"" + f2(Y(1) + 16) +
               "\" font-size=\"11\" text-anchor=\"middle\">" + std::to_string(static_cast<int>(v)) +
               "</text>\n";
        svg += "<text x=\"" + f2(X(1) - 8) + "\" y=\"" + f2(Y(v) + 4) +
               "\" font-size=\"11\" text-anchor=\"end\">" + std::to_string(static_cast<int>(v)) +
               "</text>\n";
    }

    for (size_t i = 0; i < series.size(); ++i) {
        const auto& s = series[i];
        const char* color = kPalette[i % (sizeof kPalette / sizeof *kPalette)];
        for (const auto& [x, y] : s.points)
            svg += "<circle cx=\"" + f2(X(x)) + "\" cy=\"" + f2(Y(y)) +
                   "\" r=\"3\" fill=\"" + color + "\" fill-opacity=\"0.7\"/>\n";
        const double y0 = s.intercept + s.slope * 1.0;
        const double y1 = s.intercept + s.slope * max_rank;
        svg += "<line x1=\"" + f2(X(1)) + "\" y1=\"" + f2(Y(y0)) + "\" x2=\"" + f2(X(max_rank)) +
               "\" y2=\"" + f2(Y(y1)) + "\" stroke=\"" + color +
               "\" stroke-width=\"1.5\" stroke-dasharray=\"5,3\"/>\n";
        // legend entry
        const int ly = mt + 8 + static_cast<int>(i) * 18;
        svg += "<rect x=\"" + std::to_string(w - mr + 12) + "\" y=\"" + std::to_string(ly) +
               "\" width=\"12\" height=\"12\" fill=\"" + std::string(color) + "\"/>\n";
        svg += "<text x=\"" + std::to_string(w - mr + 30) + "\" y=\"" + std::to_string(ly + 10) +
               "\" font-size=\"12\">" + s.name + "</text>\n";
    }
    svg += "</svg>\n";
    return svg;
}

void render_scatter(const std::vector<ScatterSeries>& series, const std::filesystem::path& path) {
    write_text(path, render_scatter_svg(series));
}

} // namespace shapecx
