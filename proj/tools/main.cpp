// detkit command-line front end: dataset synthesis, the augmentation
// pipeline, anchor clustering, detection evaluation, gradient checking and
// block micro-benchmarks.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "detkit/anchors.hpp"
#include "detkit/augment.hpp"
#include "detkit/blocks.hpp"
#include "detkit/config.hpp"
#include "detkit/eval.hpp"
#include "detkit/gradcheck.hpp"
#include "detkit/labels.hpp"
#include "detkit/rng.hpp"
#include "png_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;

struct NamedImage {
    std::string stem;
    detkit::LabeledImage img;
};

std::vector<fs::path> list_files(const fs::path& dir, const std::string& ext) {
    if (!fs::is_directory(dir)) throw detkit::IoError("directory not found: " + dir.string());
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ext) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    return files;
}

std::string read_text(const fs::path& p) {
    std::ifstream in(p);
    if (!in) throw detkit::IoError("cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw detkit::IoError("cannot write " + p.string());
    out << text;
}

// Loads DIR/images/*.png with their DIR/labels/<stem>.txt companions.
std::vector<NamedImage> load_dataset(const fs::path& dir) {
    const fs::path img_dir = dir / "images", lbl_dir = dir / "labels";
    std::vector<NamedImage> out;
    for (const fs::path& ip : list_files(img_dir, ".png")) {
        NamedImage ni;
        ni.stem = ip.stem().string();
        ni.img.image = detkit::read_png(ip.string());
        const fs::path lp = lbl_dir / (ni.stem + ".txt");
        if (!fs::is_regular_file(lp))
            throw detkit::LabelParseError("image " + ip.string() + " has no label file " + lp.string());
        const auto recs = detkit::parse_label_file(read_text(lp), ni.img.width(), ni.img.height(),
                                                   /*expect_scores=*/false);
        for (const auto& r : recs) {
            ni.img.boxes.push_back(r.box);
            ni.img.classes.push_back(r.class_id);
            ni.img.weights.push_back(1.0);
        }
        out.push_back(std::move(ni));
    }
    if (out.empty()) throw detkit::IoError("no PNG images under " + img_dir.string());
    return out;
}

// --------------------------------------------------------------------------
// synth: deterministic mini-dataset of rectangle "signs" on gradient scenes
// --------------------------------------------------------------------------

int cmd_synth(const fs::path& out_dir, int count, int classes, std::uint64_t seed) {
    fs::create_directories(out_dir / "images");
    fs::create_directories(out_dir / "labels");
    fs::create_directories(out_dir / "preds");

    const float palette[6][3] = {{0.85f, 0.10f, 0.10f}, {0.10f, 0.35f, 0.85f},
                                 {0.95f, 0.80f, 0.10f}, {0.10f, 0.70f, 0.30f},
                                 {0.80f, 0.40f, 0.05f}, {0.55f, 0.10f, 0.70f}};
    for (int i = 0; i < count; ++i) {
        detkit::Rng rng(detkit::Rng::split(seed, 1000 + i));
        const int w = 320 + 32 * rng.below(11);
        const int h = 320 + 32 * rng.below(11);
        detkit::Tensor<float> img({h, w, 3});
        const float base = static_cast<float>(rng.uniform(0.25, 0.55));
        for (int y = 0; y < h; ++y) {
            const float shade = base + 0.25f * static_cast<float>(y) / h;
            for (int x = 0; x < w; ++x) {
                img.at3(y, x, 0) = shade * 0.9f;
                img.at3(y, x, 1) = shade;
                img.at3(y, x, 2) = shade * 1.05f > 1.0f ? 1.0f : shade * 1.05f;
            }
        }
        std::vector<detkit::LabelRecord> recs;
        const int n_boxes = 2 + rng.below(5);
        for (int b = 0; b < n_boxes; ++b) {
            const int bw = 24 + rng.below(std::max(8, w / 5));
            const int bh = 24 + rng.below(std::max(8, h / 5));
            const int x1 = rng.below(std::max(1, w - bw));
            const int y1 = rng.below(std::max(1, h - bh));
            const int cls = rng.below(classes);
            for (int y = y1; y < y1 + bh; ++y)
                for (int x = x1; x < x1 + bw; ++x) {
                    const bool border = y - y1 < 3 || y1 + bh - 1 - y < 3 || x - x1 < 3 ||
                                        x1 + bw - 1 - x < 3;
                    for (int c = 0; c < 3; ++c)
                        img.at3(y, x, c) = border ? 0.95f : palette[cls % 6][c];
                }
            detkit::LabelRecord r;
            r.class_id = cls;
            r.box = {static_cast<double>(x1), static_cast<double>(y1),
                     static_cast<double>(x1 + bw), static_cast<double>(y1 + bh)};
            recs.push_back(r);
        }
        char name[32];
        std::snprintf(name, sizeof name, "img_%05d", i);
        detkit::write_png((out_dir / "images" / (std::string(name) + ".png")).string(), img);
        write_text(out_dir / "labels" / (std::string(name) + ".txt"),
                   detkit::serialize_label_file(recs, w, h));
        for (auto& r : recs) r.score = 1.0;  // perfect-predictor baseline
        write_text(out_dir / "preds" / (std::string(name) + ".txt"),
                   detkit::serialize_label_file(recs, w, h));
    }
    std::cout << "synth: wrote " << count << " images under " << out_dir.string() << "\n";
    return kExitOk;
}

// --------------------------------------------------------------------------
// augment
// --------------------------------------------------------------------------

int cmd_augment(const detkit::RunConfig& cfg) {
    const fs::path in_dir = cfg.input_dir, out_dir = cfg.output_dir;
    const std::vector<NamedImage> dataset = load_dataset(in_dir);
    std::vector<detkit::LabeledImage> pool;
    std::vector<std::string> input_names;
    for (const NamedImage& ni : dataset) {
        pool.push_back(ni.img);
        input_names.push_back(ni.stem);
    }

    fs::create_directories(out_dir / "images");
    fs::create_directories(out_dir / "labels");
    const detkit::AugmentConfig acfg = cfg.augment();

    std::vector<std::string> output_names;
    for (std::size_t i = 0; i < pool.size(); ++i) {
        const detkit::LabeledImage aug = detkit::augment_one(pool, i, acfg);
        char name[32];
        std::snprintf(name, sizeof name, "aug_%05d", static_cast<int>(i));
        output_names.push_back(name);
        detkit::write_png((out_dir / "images" / (std::string(name) + ".png")).string(), aug.image);

        std::vector<detkit::LabelRecord> recs;
        for (std::size_t b = 0; b < aug.boxes.size(); ++b)
            recs.push_back({aug.classes[b], aug.boxes[b], -1.0});
        write_text(out_dir / "labels" / (std::string(name) + ".txt"),
                   detkit::serialize_label_file(recs, aug.width(), aug.height()));
    }

    // the recorded config and its hash cover the reproducibility-relevant
    // parameters; concrete paths stay out so reruns elsewhere compare equal
    detkit::RunConfig recorded = cfg;
    recorded.input_dir.clear();
    recorded.output_dir.clear();
    json manifest{{"seed", cfg.seed},
                  {"config_hash", detkit::config_hash(recorded)},
                  {"config", detkit::to_json(recorded)},
                  {"inputs", input_names},
                  {"outputs", output_names}};
    write_text(out_dir / "manifest.json", manifest.dump(2) + "\n");
    std::cout << "augment: wrote " << output_names.size() << " images to " << out_dir.string()
              << " (seed " << cfg.seed << ", config " << detkit::config_hash(recorded) << ")\n";
    return kExitOk;
}

// --------------------------------------------------------------------------
// anchors
// --------------------------------------------------------------------------

int cmd_anchors(const fs::path& label_dir, const fs::path& out_file, const detkit::RunConfig& cfg) {
    std::vector<std::pair<double, double>> boxes;
    for (const auto& [stem, recs] : detkit::load_label_dir(label_dir, false)) {
        (void)stem;
        for (const auto& r : recs)
            boxes.emplace_back(r.box.width() * cfg.anchor_image_size,
                               r.box.height() * cfg.anchor_image_size);
    }
    const detkit::AnchorSet set =
        detkit::kmeans_anchors(boxes, cfg.anchor_k, cfg.seed, cfg.anchor_max_iter);

    char header[128];
    std::snprintf(header, sizeof header, "# k=%d seed=%llu mean_best_iou=%.6f\n", cfg.anchor_k,
                  static_cast<unsigned long long>(cfg.seed), set.mean_best_iou);
    std::string text = header;
    char line[64];
    for (const auto& [w, h] : set.anchors) {
        std::snprintf(line, sizeof line, "%.6f %.6f\n", w, h);
        text += line;
    }
    write_text(out_file, text);
    std::cout << "anchors: k=" << cfg.anchor_k << " over " << boxes.size()
              << " boxes, mean_best_iou=" << set.mean_best_iou << " -> " << out_file.string()
              << "\n";
    return kExitOk;
}

// --------------------------------------------------------------------------
// eval
// --------------------------------------------------------------------------

int cmd_eval(const fs::path& gt_dir, const fs::path& pred_dir, const fs::path& out_file,
             const detkit::RunConfig& cfg) {
    std::vector<detkit::GroundTruth> gts;
    for (const auto& [stem, recs] : detkit::load_label_dir(gt_dir, false))
        for (const auto& r : recs) gts.push_back({r.box, r.class_id, stem});
    std::vector<detkit::Detection> dets;
    for (const auto& [stem, recs] : detkit::load_label_dir(pred_dir, true))
        for (const auto& r : recs) dets.push_back({r.box, r.class_id, r.score, stem});

    const detkit::EvalReport rep =
        detkit::evaluate(dets, gts, cfg.eval_iou_thresh, cfg.eval_conf_thresh);

    json per_class;
    for (const auto& [cls, ap] : rep.per_class_ap) per_class[std::to_string(cls)] = ap;
    const json out{{"map50", rep.map50},   {"precision", rep.precision},
                   {"recall", rep.recall}, {"tp", rep.tp},
                   {"fp", rep.fp},         {"fn", rep.fn},
                   {"per_class_ap", per_class}, {"iou_thresh", rep.iou_thresh},
                   {"conf_thresh", rep.conf_thresh}};
    if (out_file.empty()) std::cout << out.dump(2) << "\n";
    else write_text(out_file, out.dump(2) + "\n");
    std::printf("eval: map50=%.4f precision=%.4f recall=%.4f (tp=%ld fp=%ld fn=%ld @conf=%.2f)\n",
                rep.map50, rep.precision, rep.recall, rep.tp, rep.fp, rep.fn, cfg.eval_conf_thresh);
    return kExitOk;
}

// --------------------------------------------------------------------------
// gradcheck
// --------------------------------------------------------------------------

int cmd_gradcheck(int trials, std::uint64_t seed) {
    const auto results = detkit::run_gradchecks(trials, seed);
    bool all_pass = true;
    for (const auto& r : results) {
        std::printf("%-22s trials=%-4d max_rel_err=%.3e  %s\n", r.name.c_str(), r.trials,
                    r.max_rel_err, r.pass ? "ok" : "FAIL");
        all_pass &= r.pass;
    }
    if (!all_pass) {
        std::cerr << "gradcheck: FAILED\n";
        return kExitValidation;
    }
    std::cout << "gradcheck: all gradients match finite differences\n";
    return kExitOk;
}

// --------------------------------------------------------------------------
// bench
// --------------------------------------------------------------------------

int cmd_bench(int iters, int warmup) {
    using detkit::Tensor;
    const int sizes[4] = {20, 40, 80, 160};
    const int c = 8;
    detkit::Rng rng(7);
    auto rand_tensor = [&](std::vector<int> shape) {
        Tensor<float> t(std::move(shape));
        for (float& v : t.data) v = static_cast<float>(rng.uniform(-1.0, 1.0));
        return t;
    };

    detkit::CaParams<float> ca;
    ca.ratio = 4;
    ca.reduce.kernel = rand_tensor({c / 4, c, 1, 1});
    ca.expand_h.kernel = rand_tensor({c, c / 4, 1, 1});
    ca.expand_w.kernel = rand_tensor({c, c / 4, 1, 1});
    ca.bn = detkit::BnParams<float>::identity(c / 4);

    detkit::BifpnNodeParams<float> fuse;
    fuse.weights = {1.0f, 1.5f};
    fuse.post_conv = detkit::identity_conv1x1<float>(c);

    detkit::OdconvParams<float> od;
    for (int k = 0; k < 4; ++k) od.kernels.push_back(rand_tensor({c, c, 3, 3}));
    od.pad_h = od.pad_w = 1;
    od.attn_weight = rand_tensor({4, c});
    od.attn_bias = {0.1f, -0.1f, 0.2f, 0.0f};

    auto taps = [&](int len) {
        std::vector<float> v(c * len);
        for (float& x : v) x = static_cast<float>(rng.uniform(-0.3, 0.3));
        return v;
    };
    detkit::LskaParams<float> lk;
    lk.dw_h = detkit::make_depthwise_1d<float>(c, 7, true, 1, taps(7));
    lk.dw_v = detkit::make_depthwise_1d<float>(c, 7, false, 1, taps(7));
    lk.dwd_h = detkit::make_depthwise_1d<float>(c, 7, true, 3, taps(7));
    lk.dwd_v = detkit::make_depthwise_1d<float>(c, 7, false, 3, taps(7));

    std::printf("%-22s %-10s %10s %10s %10s %10s\n", "block", "shape", "fps", "mean_ms", "min_ms",
                "max_ms");
    for (int s : sizes) {
        const Tensor<float> x = rand_tensor({1, c, s, s});
        const Tensor<float> x_half = rand_tensor({1, c, s / 2, s / 2});
        const std::vector<std::pair<std::string, std::function<void()>>> workloads{
            {"coordinate_attention", [&] { detkit::coordinate_attention(x, ca); }},
            {"bifpn_fuse", [&] { detkit::bifpn_fuse<float>({x, x_half}, fuse); }},
            {"odconv", [&] { detkit::odconv(x, od); }},
            {"lska", [&] { detkit::lska(x, lk); }}};
        for (const auto& [name, fn] : workloads) {
            const detkit::BenchResult r = detkit::fps_bench(fn, warmup, iters);
            std::printf("%-22s %dx%-7d %10.2f %10.3f %10.3f %10.3f\n", name.c_str(), s, s, r.fps,
                        r.mean_ms, r.min_ms, r.max_ms);
        }
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"detection toolkit: augmentation, anchors, evaluation, gradient checks"};
    app.require_subcommand(1);

    std::string config_path;
    std::uint64_t seed = 0;
    bool seed_set = false;
    app.add_option("--config", config_path, "JSON config file (flat snake_case keys)");
    app.add_option("--seed", seed, "master RNG seed")->each([&](const std::string&) {
        seed_set = true;
    });

    auto* synth = app.add_subcommand("synth", "generate a synthetic mini-dataset");
    std::string synth_out = "dataset";
    int synth_count = 20, synth_classes = 4;
    synth->add_option("--out", synth_out, "output directory")->required();
    synth->add_option("--count", synth_count, "number of images");
    synth->add_option("--classes", synth_classes, "number of classes");

    auto* augment = app.add_subcommand("augment", "run the augmentation pipeline over a dataset");
    std::string aug_in, aug_out;
    augment->add_option("--in", aug_in, "input dataset dir (images/ + labels/)")->required();
    augment->add_option("--out", aug_out, "output dir")->required();

    auto* anchors = app.add_subcommand("anchors", "k-means anchors from a label directory");
    std::string anchors_labels, anchors_out = "anchors.txt";
    int anchors_k = -1;
    anchors->add_option("--labels", anchors_labels, "label directory")->required();
    anchors->add_option("--k", anchors_k, "number of anchors");
    anchors->add_option("--out", anchors_out, "output anchor file");

    auto* eval = app.add_subcommand("eval", "compare prediction and ground-truth label dirs");
    std::string eval_gt, eval_pred, eval_out;
    double eval_iou = -1.0, eval_conf = -1.0;
    eval->add_option("--gt", eval_gt, "ground-truth label dir")->required();
    eval->add_option("--pred", eval_pred, "prediction label dir (with scores)")->required();
    eval->add_option("--iou", eval_iou, "IoU threshold");
    eval->add_option("--conf", eval_conf, "confidence threshold for precision/recall");
    eval->add_option("--out", eval_out, "report JSON path (stdout if omitted)");

    auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient suite");
    int gc_trials = 100;
    gradcheck->add_option("--trials", gc_trials, "random trials per check");

    auto* bench = app.add_subcommand("bench", "FPS micro-benchmark of the detection blocks");
    int bench_iters = 5, bench_warmup = 1;
    bench->add_option("--iters", bench_iters, "timed iterations");
    bench->add_option("--warmup", bench_warmup, "untimed warmup iterations");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);  // prints message/help
        return code == 0 ? kExitOk : kExitValidation;
    }

    try {
        detkit::RunConfig cfg;
        if (!config_path.empty()) cfg = detkit::load_config_file(config_path);
        if (seed_set) cfg.seed = seed;

        if (synth->parsed()) {
            if (synth_count < 1 || synth_classes < 1)
                throw std::invalid_argument("synth: count and classes must be positive");
            return cmd_synth(synth_out, synth_count, synth_classes, cfg.seed);
        }
        if (augment->parsed()) {
            cfg.input_dir = aug_in;
            cfg.output_dir = aug_out;
            return cmd_augment(cfg);
        }
        if (anchors->parsed()) {
            if (anchors_k > 0) cfg.anchor_k = anchors_k;
            return cmd_anchors(anchors_labels, anchors_out, cfg);
        }
        if (eval->parsed()) {
            if (eval_iou > 0.0) cfg.eval_iou_thresh = eval_iou;
            if (eval_conf >= 0.0) cfg.eval_conf_thresh = eval_conf;
            return cmd_eval(eval_gt, eval_pred, eval_out, cfg);
        }
        if (gradcheck->parsed()) return cmd_gradcheck(gc_trials, cfg.seed + 20240401);
        if (bench->parsed()) return cmd_bench(bench_iters, bench_warmup);
    } catch (const detkit::IoError& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return kExitIo;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    return kExitValidation;
}
