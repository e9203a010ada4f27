// shapecx: estimate the visual complexity of 2D binary shape masks and
// evaluate the resulting rankings.
//
// Pipeline: gen (optional synthetic data) -> preprocess -> train (two
// bottleneck widths) -> score -> rank / eval.

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "shapecx/error.hpp"
#include "shapecx/image.hpp"
#include "shapecx/measures.hpp"
#include "shapecx/ranking.hpp"
#include "shapecx/report.hpp"
#include "shapecx/shapes.hpp"
#include "shapecx/vae.hpp"

namespace fs = std::filesystem;
using namespace shapecx;

namespace {

void log_config(const std::string& cmd, const std::vector<std::pair<std::string, std::string>>& kv) {
    std::ostringstream os;
    os << "[shapecx] " << cmd;
    for (const auto& [k, v] : kv) os << " " << k << "=" << v;
    std::cerr << os.str() << "\n";
}

// Expand `--config FILE` into ordinary `--key=value` tokens for every key
// the command line does not already set, so explicit flags take precedence.
// The file holds one key=value per line; '#' starts a comment.
std::vector<std::string> expand_config(int argc, char** argv) {
    std::vector<std::string> tokens(argv + 1, argv + argc);
    std::string config_path;
    for (size_t i = 0; i < tokens.size(); ++i) {
        if (tokens[i] == "--config") {
            if (i + 1 >= tokens.size()) throw DataError("--config needs a file path");
            config_path = tokens[i + 1];
            tokens.erase(tokens.begin() + static_cast<long>(i), tokens.begin() + static_cast<long>(i) + 2);
            break;
        }
        if (tokens[i].rfind("--config=", 0) == 0) {
            config_path = tokens[i].substr(9);
            tokens.erase(tokens.begin() + static_cast<long>(i));
            break;
        }
    }
    if (config_path.empty()) return tokens;

    std::set<std::string> given;
    for (const auto& t : tokens)
        if (t.rfind("--", 0) == 0) given.insert(t.substr(0, t.find('=')));

    std::ifstream f(config_path);
    if (!f) throw DataError("cannot open config file " + config_path);
    std::string line;
    size_t lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) line.pop_back();
        size_t start = 0;
        while (start < line.size() && std::isspace(static_cast<unsigned char>(line[start]))) ++start;
        line.erase(0, start);
        if (line.empty()) continue;
        const size_t eq = line.find('=');
        if (eq == std::string::npos || eq == 0)
            throw DataError(config_path + ":" + std::to_string(lineno) + ": expected key=value");
        const std::string key = "--" + line.substr(0, eq);
        if (!given.count(key)) tokens.push_back(key + "=" + line.substr(eq + 1));
    }
    return tokens;
}

std::vector<Mask> load_mask_dir(const fs::path& dir, uint8_t threshold) {
    std::vector<Mask> masks;
    for (const auto& p : list_dataset(dir)) masks.push_back(load_mask(p, threshold));
    if (masks.empty()) throw DataError("no images found in " + dir.string());
    return masks;
}

std::vector<Component> parse_measures(const std::string& csv) {
    std::vector<Component> out;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        const auto c = component_from_name(tok);
        if (!c) throw DataError("unknown measure '" + tok + "' (fill, compression, fft, vae)");
        if (std::find(out.begin(), out.end(), *c) == out.end()) out.push_back(*c);
    }
    if (out.empty()) throw DataError("no measures requested");
    return out;
}

// ---------------------------------------------------------------------------

int cmd_gen(const fs::path& out_dir, int count, uint64_t seed) {
    log_config("gen", {{"out", out_dir.string()}, {"count", std::to_string(count)},
                       {"seed", std::to_string(seed)}});
    fs::create_directories(out_dir);
    for (const Mask& m : synthetic_corpus(count, seed))
        save_mask_pgm(m, out_dir / (m.id + ".pgm"));
    std::cerr << "[shapecx] wrote " << count << " masks\n";
    return 0;
}

int cmd_preprocess(const fs::path& in_dir, const fs::path& out_dir, int threshold) {
    log_config("preprocess", {{"in", in_dir.string()}, {"out", out_dir.string()},
                              {"threshold", std::to_string(threshold)}});
    const auto files = list_dataset(in_dir);
    if (files.empty()) throw DataError("no images found in " + in_dir.string());
    fs::create_directories(out_dir);
    int written = 0, skipped = 0;
    for (const auto& f : files) {
        try {
            const Mask m = preprocess(load_image(f), static_cast<uint8_t>(threshold),
                                      f.stem().string());
            save_mask_pgm(m, out_dir / (f.stem().string() + ".pgm"));
            ++written;
        } catch (const Error& e) {
            std::cerr << "[shapecx] skipping " << f.filename().string() << ": " << e.what() << "\n";
            ++skipped;
        }
    }
    std::cerr << "[shapecx] preprocessed " << written << " images, skipped " << skipped << "\n";
    if (written == 0) throw DataError("no image could be preprocessed");
    return 0;
}

int cmd_train(const fs::path& data_dir, const fs::path& out_ckpt, const TrainConfig& cfg,
              int threshold) {
    log_config("train", {{"data", data_dir.string()},
                         {"out", out_ckpt.string()},
                         {"latent", std::to_string(cfg.latent_dim)},
                         {"epochs", std::to_string(cfg.epochs)},
                         {"batch", std::to_string(cfg.batch_size)},
                         {"lr", std::to_string(cfg.lr)},
                         {"kl-beta", std::to_string(cfg.kl_beta)},
                         {"seed", std::to_string(cfg.seed)}});
    const auto masks = load_mask_dir(data_dir, static_cast<uint8_t>(threshold));
    if (cfg.epochs == 0)
        std::cerr << "[shapecx] warning: --epochs 0 writes a checkpoint of initial weights\n";
    const VaeModel model = train_vae(masks, cfg);
    for (size_t e = 0; e < model.meta.loss_curve.size(); ++e)
        std::cerr << "[shapecx] epoch " << e + 1 << " loss " << model.meta.loss_curve[e] << "\n";
    if (out_ckpt.has_parent_path()) fs::create_directories(out_ckpt.parent_path());
    save_model(model, out_ckpt);

    // loss curve sidecar
    const fs::path curve = out_ckpt.string() + ".loss.csv";
    std::ofstream f(curve, std::ios::binary | std::ios::trunc);
    f << "# seed=" << cfg.seed << " latent=" << cfg.latent_dim << " epochs=" << cfg.epochs
      << " batch=" << cfg.batch_size << " lr=" << cfg.lr << " kl_beta=" << cfg.kl_beta << "\n";
    f << "epoch,loss,bce\n";
    char buf[80];
    for (size_t e = 0; e < model.meta.loss_curve.size(); ++e) {
        std::snprintf(buf, sizeof buf, "%zu,%.6f,%.6f\n", e + 1, model.meta.loss_curve[e],
                      model.meta.bce_curve[e]);
        f << buf;
    }
    return 0;
}

int cmd_score(const fs::path& data_dir, const fs::path& out_csv, const std::string& measures_csv,
              const std::string& vae_small, const std::string& vae_large, int threshold,
              int jobs) {
    log_config("score", {{"data", data_dir.string()},
                         {"out", out_csv.string()},
                         {"measures", measures_csv},
                         {"vae16", vae_small.empty() ? "-" : vae_small},
                         {"vae64", vae_large.empty() ? "-" : vae_large},
                         {"jobs", std::to_string(jobs)}});
    const std::vector<Component> requested = parse_measures(measures_csv);
    const bool want_vae =
        std::find(requested.begin(), requested.end(), Component::vae) != requested.end();
    if (want_vae && (vae_small.empty() || vae_large.empty()))
        throw DataError("the vae measure needs both --vae16 and --vae64 checkpoints");

    std::optional<VaePair> pair;
    if (want_vae) pair.emplace(load_model(vae_small), load_model(vae_large));

    const auto masks = load_mask_dir(data_dir, static_cast<uint8_t>(threshold));

    std::vector<ScoreRow> rows(masks.size());
    std::atomic<size_t> next{0};
    const int workers = std::max(1, jobs);
    auto work = [&] {
        for (;;) {
            const size_t i = next.fetch_add(1);
            if (i >= masks.size()) return;
            const Mask& m = masks[i];
            ScoreRow& r = rows[i];
            r.scores.shape_id = m.id;
            r.scores.fill = fill_ratio(m);
            r.scores.compression = compression_complexity(m);
            r.scores.fft = fft_complexity(m);
            if (pair) r.scores.vae = pair->complexity(m);
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> ts;
        for (int w = 0; w < workers; ++w) ts.emplace_back(work);
        for (auto& t : ts) t.join();
    }

    // combined over the requested non-fill components
    std::vector<Component> comb;
    for (Component c : {Component::compression, Component::fft, Component::vae})
        if (std::find(requested.begin(), requested.end(), c) != requested.end()) comb.push_back(c);
    if (!comb.empty()) {
        for (auto& r : rows) r.combined = combine(r.scores, comb);
        if (rows.size() >= 2) {
            std::vector<ScoreVector> all;
            all.reserve(rows.size());
            for (const auto& r : rows) all.push_back(r.scores);
            const auto eq = combine_equalized(all, comb);
            for (size_t i = 0; i < rows.size(); ++i) rows[i].combined_eq = eq[i];
        }
    }

    if (out_csv.has_parent_path()) fs::create_directories(out_csv.parent_path());
    write_scores_csv(rows, out_csv);
    std::cerr << "[shapecx] scored " << rows.size() << " masks\n";
    return 0;
}

double row_value(const ScoreRow& r, const std::string& by) {
    std::optional<double> v;
    if (by == "fill") v = r.scores.fill;
    else if (by == "compression") v = r.scores.compression;
    else if (by == "fft") v = r.scores.fft;
    else if (by == "vae") v = r.scores.vae;
    else if (by == "combined") v = r.combined;
    else if (by == "combined_eq") v = r.combined_eq;
    else throw DataError("unknown ranking column '" + by + "'");
    if (!v)
        throw DataError("column '" + by + "' is empty for shape '" + r.scores.shape_id + "'");
    return *v;
}

int cmd_rank(const fs::path& scores_csv, const std::string& by, const fs::path& out,
             const std::string& montage, const std::string& data_dir, int threshold) {
    log_config("rank", {{"scores", scores_csv.string()},
                        {"by", by},
                        {"out", out.empty() ? "-" : out.string()},
                        {"montage", montage.empty() ? "-" : montage}});
    const auto rows = read_scores_csv(scores_csv);
    if (rows.empty()) throw DataError(scores_csv.string() + " holds no scores");
    if (by == "combined_eq" && rows.size() < 2)
        throw DataError("combined_eq needs at least two shapes (batch-only rescaling)");

    std::vector<std::pair<std::string, double>> scored;
    for (const auto& r : rows) scored.emplace_back(r.scores.shape_id, row_value(r, by));
    const Ranking ranking = rank(std::move(scored));

    std::ostringstream body;
    for (const auto& id : ranking.order) body << id << "\n";
    if (out.empty()) {
        std::cout << body.str();
    } else {
        std::ofstream f(out, std::ios::binary | std::ios::trunc);
        if (!f) throw DataError("cannot write " + out.string());
        f << body.str();
    }

    if (!montage.empty()) {
        if (data_dir.empty()) throw DataError("--montage needs --data to locate the mask images");
        std::map<std::string, Mask> masks;
        for (const Mask& m : load_mask_dir(data_dir, static_cast<uint8_t>(threshold)))
            masks[m.id] = m;

        // combined montages stack fft, compression and vae values per cell
        char buf[40];
        auto fmt = [&buf](double v) {
            std::snprintf(buf, sizeof buf, "%.6f", v);
            return std::string(buf);
        };
        std::map<std::string, std::vector<std::string>> labels;
        for (const auto& r : rows) {
            std::vector<std::string>& l = labels[r.scores.shape_id];
            if (by == "combined" || by == "combined_eq") {
                l.push_back(fmt(r.scores.fft));
                l.push_back(fmt(r.scores.compression));
                if (r.scores.vae) l.push_back(fmt(*r.scores.vae));
            } else {
                l.push_back(fmt(row_value(r, by)));
            }
        }
        render_montage(ranking, masks, labels, montage);
        std::cerr << "[shapecx] montage written to " << montage << "\n";
    }
    return 0;
}

std::vector<MeasureColumn> present_columns(const std::vector<ScoreRow>& rows,
                                           const std::vector<std::string>& wanted) {
    std::vector<MeasureColumn> cols;
    for (const auto& name : wanted) {
        MeasureColumn col;
        col.name = name;
        bool complete = true;
        for (const auto& r : rows) {
            std::optional<double> v;
            if (name == "fill") v = r.scores.fill;
            else if (name == "compression") v = r.scores.compression;
            else if (name == "fft") v = r.scores.fft;
            else if (name == "vae") v = r.scores.vae;
            else if (name == "combined") v = r.combined;
            if (!v) {
                complete = false;
                break;
            }
            col.values.push_back(*v);
        }
        if (complete) cols.push_back(std::move(col));
    }
    return cols;
}

int cmd_eval(const fs::path& scores_csv, const std::string& reference, const std::string& scatter,
             int subset_trials, int subset_k, uint64_t seed, const fs::path& out) {
    log_config("eval", {{"scores", scores_csv.string()},
                        {"reference", reference.empty() ? "-" : reference},
                        {"subset-trials", std::to_string(subset_trials)},
                        {"subset-k", std::to_string(subset_k)},
                        {"seed", std::to_string(seed)},
                        {"out", out.string()}});
    const auto rows = read_scores_csv(scores_csv);
    if (rows.empty()) throw DataError(scores_csv.string() + " holds no scores");
    std::vector<std::string> ids;
    for (const auto& r : rows) ids.push_back(r.scores.shape_id);

    std::ostringstream body;
    if (!reference.empty()) {
        const auto cols = present_columns(rows, {"fill", "compression", "fft", "vae", "combined"});
        const auto cmp = compare_to_reference(ids, cols, load_reference(reference));
        body << "measure,spearman,trend_slope,trend_intercept\n";
        char buf[120];
        std::vector<ScatterSeries> series;
        for (const auto& c : cmp) {
            std::snprintf(buf, sizeof buf, "%s,%.6f,%.6f,%.6f\n", c.measure.c_str(), c.rho,
                          c.slope, c.intercept);
            body << buf;
            series.push_back({c.measure, c.pairs, c.slope, c.intercept});
        }
        if (!scatter.empty()) {
            render_scatter(series, scatter);
            std::cerr << "[shapecx] scatter written to " << scatter << "\n";
        }
    } else {
        const auto cols = present_columns(rows, {"vae", "compression", "fft", "combined"});
        if (cols.size() < 2) throw DataError("subset evaluation needs at least two measures");
        const SubsetResult res = subset_experiment(ids, cols, subset_k, subset_trials, seed);
        body << "measure";
        for (const auto& name : res.measures) body << "," << name;
        body << "\n";
        char buf[40];
        for (size_t i = 0; i < res.measures.size(); ++i) {
            body << res.measures[i];
            for (size_t j = 0; j < res.measures.size(); ++j) {
                std::snprintf(buf, sizeof buf, ",%.6f", res.mean_rho[i][j]);
                body << buf;
            }
            body << "\n";
        }
    }

    if (out.empty()) {
        std::cout << body.str();
    } else {
        if (out.has_parent_path()) fs::create_directories(out.parent_path());
        std::ofstream f(out, std::ios::binary | std::ios::trunc);
        if (!f) throw DataError("cannot write " + out.string());
        f << body.str();
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"shape complexity estimation toolkit"};
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "write a synthetic shape corpus");
    std::string gen_out;
    int gen_count = 200;
    uint64_t gen_seed = 0;
    gen->add_option("--out", gen_out, "output directory")->required();
    gen->add_option("--count", gen_count, "number of shapes");
    gen->add_option("--seed", gen_seed, "generator seed");

    // preprocess
    auto* pre = app.add_subcommand("preprocess", "binarize, square-crop and resize to 64x64");
    std::string pre_in, pre_out;
    int pre_threshold = 128;
    pre->add_option("--in", pre_in, "input image directory")->required();
    pre->add_option("--out", pre_out, "output mask directory")->required();
    pre->add_option("--threshold", pre_threshold, "foreground threshold (0-255)")
        ->check(CLI::Range(0, 255));

    // train
    auto* train = app.add_subcommand("train", "train one bottlenecked model");
    std::string train_data, train_out;
    TrainConfig tcfg;
    int train_threshold = 128;
    train->add_option("--data", train_data, "preprocessed mask directory")->required();
    train->add_option("--out", train_out, "checkpoint path")->required();
    train->add_option("--latent", tcfg.latent_dim, "bottleneck width");
    train->add_option("--epochs", tcfg.epochs, "training epochs");
    train->add_option("--batch", tcfg.batch_size, "batch size");
    train->add_option("--lr", tcfg.lr, "Adam learning rate");
    train->add_option("--kl-beta", tcfg.kl_beta, "KL weight in the loss");
    train->add_option("--seed", tcfg.seed, "training seed");
    train->add_option("--threshold", train_threshold, "mask binarization threshold");

    // score
    auto* score = app.add_subcommand("score", "compute per-shape complexity scores");
    std::string score_data, score_out, score_measures = "fill,compression,fft";
    std::string score_v16, score_v64;
    int score_threshold = 128, score_jobs = 1;
    score->add_option("--data", score_data, "preprocessed mask directory")->required();
    score->add_option("--out", score_out, "output scores CSV")->required();
    score->add_option("--measures", score_measures, "comma list: fill,compression,fft,vae");
    score->add_option("--vae16", score_v16, "small-bottleneck checkpoint");
    score->add_option("--vae64", score_v64, "large-bottleneck checkpoint");
    score->add_option("--threshold", score_threshold, "mask binarization threshold");
    score->add_option("--jobs", score_jobs, "parallel scoring threads")->check(CLI::Range(1, 256));

    // rank
    auto* rnk = app.add_subcommand("rank", "order shapes by a score column");
    std::string rank_scores, rank_by = "combined", rank_out, rank_montage, rank_data;
    int rank_threshold = 128;
    rnk->add_option("--scores", rank_scores, "scores CSV from 'score'")->required();
    rnk->add_option("--by", rank_by, "fill|compression|fft|vae|combined|combined_eq");
    rnk->add_option("--out", rank_out, "ranking file (default stdout), one id per line");
    rnk->add_option("--montage", rank_montage, "render the sorted shapes to this PNG");
    rnk->add_option("--data", rank_data, "mask directory (needed with --montage)");
    rnk->add_option("--threshold", rank_threshold, "mask binarization threshold");

    // eval
    auto* eval = app.add_subcommand("eval", "correlate rankings");
    std::string eval_scores, eval_reference, eval_scatter, eval_out;
    int eval_trials = 2000, eval_k = 9;
    uint64_t eval_seed = 0;
    eval->add_option("--scores", eval_scores, "scores CSV from 'score'")->required();
    eval->add_option("--reference", eval_reference, "reference ranking file, least complex first");
    eval->add_option("--scatter", eval_scatter, "rank scatter SVG (reference mode)");
    eval->add_option("--subset-trials", eval_trials, "random subset trials");
    eval->add_option("--subset-k", eval_k, "shapes per subset");
    eval->add_option("--seed", eval_seed, "subset sampling seed");
    eval->add_option("--out", eval_out, "report CSV (default stdout)");

    // documented in help; the value is consumed by expand_config up front
    std::string config_dummy;
    for (auto* sub : {gen, pre, train, score, rnk, eval})
        sub->add_option("--config", config_dummy, "key=value defaults file; explicit flags win");

    try {
        std::vector<std::string> args = expand_config(argc, argv);
        std::reverse(args.begin(), args.end());  // CLI11 wants reversed tokens
        app.parse(std::move(args));
        if (*gen) return cmd_gen(gen_out, gen_count, gen_seed);
        if (*pre) return cmd_preprocess(pre_in, pre_out, pre_threshold);
        if (*train) return cmd_train(train_data, train_out, tcfg, train_threshold);
        if (*score)
            return cmd_score(score_data, score_out, score_measures, score_v16, score_v64,
                             score_threshold, score_jobs);
        if (*rnk)
            return cmd_rank(rank_scores, rank_by, rank_out, rank_montage, rank_data,
                            rank_threshold);
        if (*eval)
            return cmd_eval(eval_scores, eval_reference, eval_scatter, eval_trials, eval_k,
                            eval_seed, eval_out);
        return 2;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const Error& e) {
        // bad input data or files: decode failures, contract violations,
        // dimension mismatches all trace back to what the user supplied
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
}
