// End-to-end checks of the command-line surface: runs the built binary as a
// subprocess and inspects exit codes and produced files.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "shapecx/image.hpp"
#include "shapecx/report.hpp"
#include "shapecx/shapes.hpp"

using namespace shapecx;
namespace fs = std::filesystem;

namespace {

const std::string kBin = SHAPECX_BIN;

struct RunResult {
    int code;
};

RunResult run(const std::string& args) {
    const std::string cmd = kBin + " " + args + " >/dev/null 2>>cli_test_stderr.log";
    const int st = std::system(cmd.c_str());
    return {WEXITSTATUS(st)};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// one shared sandbox, populated once: corpus, masks, two checkpoints and a
// fully scored CSV, so the test cases stay order-independent
struct Sandbox {
    fs::path root;

    Sandbox() {
        root = fs::temp_directory_path() / "shapecx_cli_tests";
        fs::remove_all(root);
        fs::create_directories(root);
        fs::current_path(root);
        REQUIRE(run("gen --out raw --count 30 --seed 11").code == 0);
        REQUIRE(run("preprocess --in raw --out masks").code == 0);
        REQUIRE(run("train --data masks --out a16.ckpt --latent 16 --epochs 1 --batch 16 --seed 5")
                    .code == 0);
        REQUIRE(run("train --data masks --out a64.ckpt --latent 64 --epochs 1 --batch 16 --seed 5")
                    .code == 0);
        REQUIRE(run("score --data masks --out sv.csv --measures fill,compression,fft,vae "
                    "--vae16 a16.ckpt --vae64 a64.ckpt --jobs 2")
                    .code == 0);
    }
};

Sandbox& sandbox() {
    static Sandbox s;
    return s;
}

} // namespace

TEST_SUITE_BEGIN("cli");

TEST_CASE("preprocess writes 64x64 binary pgm masks") {
    sandbox();
    const auto files = list_dataset("masks");
    CHECK(files.size() == 30);
    const RawImage img = load_image(files[0]);
    CHECK(img.width == 64);
    CHECK(img.height == 64);
    for (uint8_t v : img.pixels) CHECK((v == 0 || v == 255));
}

TEST_CASE("preprocess of an empty directory exits 2 with a message") {
    sandbox();
    fs::create_directories("empty");
    CHECK(run("preprocess --in empty --out should_not_exist").code == 2);
    const std::string log = slurp("cli_test_stderr.log");
    CHECK(log.find("no images found") != std::string::npos);
}

TEST_CASE("preprocess converts mixed PNG/PGM inputs and is idempotent on its output") {
    sandbox();
    // mixed-format copy of two masks
    fs::create_directories("mixed");
    const RawImage a = load_image("masks/0000_disc.pgm");
    save_png_gray(a, "mixed/a.png");
    save_pgm(a, "mixed/b.pgm");
    REQUIRE(run("preprocess --in mixed --out mixed_out").code == 0);
    CHECK(list_dataset("mixed_out").size() == 2);

    // full-frame masks rerun byte-identically
    fs::create_directories("full");
    RawImage white;
    white.width = white.height = 64;
    white.pixels.assign(4096, 255);
    save_pgm(white, "full/w.pgm");
    REQUIRE(run("preprocess --in full --out full1").code == 0);
    REQUIRE(run("preprocess --in full1 --out full2").code == 0);
    CHECK(slurp("full1/w.pgm") == slurp("full2/w.pgm"));
}

TEST_CASE("train writes latent-tagged deterministic checkpoints") {
    sandbox();
    REQUIRE(run("train --data masks --out b16.ckpt --latent 16 --epochs 1 --batch 16 --seed 5")
                .code == 0);
    CHECK(slurp("a16.ckpt") == slurp("b16.ckpt"));  // same seed, same bytes
    CHECK(fs::exists("a16.ckpt.loss.csv"));
    CHECK(slurp("a16.ckpt").substr(8, 4) != slurp("a64.ckpt").substr(8, 4));  // latent field
}

TEST_CASE("epochs 0 still writes a checkpoint and warns") {
    sandbox();
    REQUIRE(run("train --data masks --out zero.ckpt --latent 16 --epochs 0 --seed 1").code == 0);
    CHECK(fs::exists("zero.ckpt"));
    CHECK(slurp("cli_test_stderr.log").find("initial weights") != std::string::npos);
}

TEST_CASE("score without checkpoints succeeds unless vae is requested") {
    sandbox();
    REQUIRE(run("score --data masks --out s.csv --measures compression,fft").code == 0);
    const auto rows = read_scores_csv("s.csv");
    CHECK(rows.size() == 30);
    for (const auto& r : rows) CHECK_FALSE(r.scores.vae.has_value());

    CHECK(run("score --data masks --out s2.csv --measures compression,fft,vae").code == 2);
}

TEST_CASE("score with checkpoints fills the vae column and is deterministic") {
    sandbox();
    const auto rows = read_scores_csv("sv.csv");
    REQUIRE(rows.size() == 30);
    for (const auto& r : rows) {
        CHECK(r.scores.vae.has_value());
        CHECK(r.combined.has_value());
        CHECK(r.combined_eq.has_value());
    }
    REQUIRE(run("score --data masks --out sv2.csv --measures fill,compression,fft,vae "
                "--vae16 a16.ckpt --vae64 a64.ckpt --jobs 1")
                .code == 0);
    CHECK(slurp("sv.csv") == slurp("sv2.csv"));  // job count cannot change bytes
}

TEST_CASE("a small checkpoint in the large slot exits 2") {
    sandbox();
    CHECK(run("score --data masks --out bad.csv --measures vae --vae16 a64.ckpt --vae64 a16.ckpt")
              .code == 2);
}

TEST_CASE("rank orders by the chosen column and renders a montage on demand") {
    sandbox();
    REQUIRE(run("rank --scores sv.csv --by fill --out by_fill.txt").code == 0);
    const auto rows = read_scores_csv("sv.csv");
    std::vector<std::string> ids;
    {
        std::ifstream in("by_fill.txt");
        std::string line;
        while (std::getline(in, line))
            if (!line.empty()) ids.push_back(line);
    }
    REQUIRE(ids.size() == rows.size());
    // file order must be ascending in fill
    auto fill_of = [&](const std::string& id) {
        for (const auto& r : rows)
            if (r.scores.shape_id == id) return r.scores.fill;
        FAIL("unknown id ", id);
        return 0.0;
    };
    for (size_t i = 1; i < ids.size(); ++i) CHECK(fill_of(ids[i - 1]) <= fill_of(ids[i]));

    CHECK_FALSE(fs::exists("mont.png"));
    REQUIRE(run("rank --scores sv.csv --by combined --montage mont.png --data masks").code == 0);
    CHECK(fs::exists("mont.png"));
    const RawImage img = load_image("mont.png");
    CHECK(img.width == kMontagePad + 30 * (kMontageCell + kMontagePad));

    // montage without --data is a usage error
    CHECK(run("rank --scores sv.csv --by combined --montage m2.png").code == 2);
}

TEST_CASE("rank by combined_eq needs at least two shapes") {
    sandbox();
    std::vector<ScoreRow> one(1);
    one[0].scores = {"solo", 0.5, 0.5, 0.5, std::nullopt};
    write_scores_csv(one, "one.csv");
    CHECK(run("rank --scores one.csv --by combined_eq").code == 2);
}

TEST_CASE("eval against a reference produces correlations and a scatter") {
    sandbox();
    // self-reference: the fill ranking itself
    REQUIRE(run("rank --scores sv.csv --by fill --out ref.txt").code == 0);
    REQUIRE(run("eval --scores sv.csv --reference ref.txt --scatter sc.svg --out rep.csv").code ==
            0);
    const std::string rep = slurp("rep.csv");
    CHECK(rep.find("measure,spearman,trend_slope,trend_intercept") == 0);
    CHECK(rep.find("fill,1.000000,1.000000") != std::string::npos);  // rho 1, slope 1
    const std::string svg = slurp("sc.svg");
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("trendline slope=") != std::string::npos);

    // unknown id in the reference names the culprit and exits 2
    std::ofstream("badref.txt") << "not_a_shape\n";
    CHECK(run("eval --scores sv.csv --reference badref.txt --out r2.csv").code == 2);
    CHECK(slurp("cli_test_stderr.log").find("not_a_shape") != std::string::npos);
}

TEST_CASE("subset eval writes a symmetric measure matrix") {
    sandbox();
    REQUIRE(run("eval --scores sv.csv --subset-trials 50 --subset-k 9 --seed 3 --out mat.csv")
                .code == 0);
    const std::string mat = slurp("mat.csv");
    CHECK(mat.find("measure,vae,compression,fft,combined") == 0);
    CHECK(mat.find("vae,1.000000") != std::string::npos);

    CHECK(run("eval --scores sv.csv --subset-trials 10 --subset-k 500 --out m2.csv").code == 2);
}

TEST_CASE("config files supply defaults, flags win") {
    sandbox();
    std::ofstream("gen.cfg") << "count=5\nseed=77\n";
    fs::remove_all("cfg_out");
    REQUIRE(run("gen --out cfg_out --config gen.cfg").code == 0);
    CHECK(list_dataset("cfg_out").size() == 5);
    fs::remove_all("cfg_out2");
    REQUIRE(run("gen --out cfg_out2 --config gen.cfg --count 7").code == 0);
    CHECK(list_dataset("cfg_out2").size() == 7);
}

TEST_CASE("unknown flags are usage errors, help exits 0") {
    sandbox();
    CHECK(run("score --no-such-flag").code == 2);
    CHECK(run("--help").code == 0);
    CHECK(run("rank --scores nope.csv --by fill").code == 2);  // missing file
}

TEST_SUITE_END();
