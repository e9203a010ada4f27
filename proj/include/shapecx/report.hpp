#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "shapecx/image.hpp"
#include "shapecx/measures.hpp"
#include "shapecx/ranking.hpp"

namespace shapecx {

// All renderers are pure functions of their inputs: fixed built-in font,
// fixed palette, no timestamps, so equal inputs give byte-identical files.

/// One row per scored shape; absent values become empty CSV fields.
struct ScoreRow {
    ScoreVector scores;
    std::optional<double> combined;
    std::optional<double> combined_eq;
};

/// Header: id,fill,compression,fft,vae,combined,combined_eq
/// 6-decimal fixed point, LF line endings.
void write_scores_csv(const std::vector<ScoreRow>& rows, const std::filesystem::path& path);
std::vector<ScoreRow> read_scores_csv(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// montage
// ---------------------------------------------------------------------------

// Layout: one row of cells in ranking order. Each cell is the 64x64 mask
// scaled x2 (128 px) with up to three label lines below it, drawn in orange
// with the built-in 5x7 digit font. With n cells, L label lines and padding
// p = 4: width = p + n*(128+p), height = p + 128 + 2 + L*9 + p.
constexpr int kMontagePad = 4;
constexpr int kMontageCell = 2 * kMaskSize;
constexpr int kMontageLineHeight = 9;

/// Labels are score strings (digits, '.', '-'); 1 to 3 lines per cell.
/// Every ranked id must resolve to a mask and a label entry.
std::vector<uint8_t> render_montage_png(const Ranking& ranking,
                                        const std::map<std::string, Mask>& masks,
                                        const std::map<std::string, std::vector<std::string>>& labels);

void render_montage(const Ranking& ranking, const std::map<std::string, Mask>& masks,
                    const std::map<std::string, std::vector<std::string>>& labels,
                    const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// rank scatter (SVG)
// ---------------------------------------------------------------------------

struct ScatterSeries {
    std::string name;
    std::vector<std::pair<double, double>> points;  // (reference rank, measure rank)
    double slope = 0.0;
    double intercept = 0.0;
};

/// SVG 1.1 document: one circle set and one OLS trendline per series plus a
/// legend. Each series' slope/intercept is recorded in a metadata comment.
/// An empty series list or an empty series is a DataError.
std::string render_scatter_svg(const std::vector<ScatterSeries>& series);

void render_scatter(const std::vector<ScatterSeries>& series, const std::filesystem::path& path);

} // namespace shapecx
