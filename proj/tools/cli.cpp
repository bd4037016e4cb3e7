#include "cli.hpp"

#include "run_config.hpp"

#include <accdor/errors.hpp>
#include <accdor/image_io.hpp>
#include <accdor/parallel.hpp>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

namespace accdor::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Flags shared by the subcommands. Unset optionals leave the file/default value alone.
struct CommonFlags {
    std::string config;
    std::optional<std::string> out;
    std::optional<int> jobs;
    std::optional<std::string> backend;
    std::optional<std::string> adapter_cmd;
    std::optional<std::int64_t> adapter_timeout_ms;
    std::optional<std::uint64_t> train_seed;
    std::optional<std::uint64_t> split_seed;
    std::optional<int> max_epochs;
    std::optional<int> patience;
    std::optional<std::uint64_t> phantom_seed;
    std::optional<int> count;
    std::optional<double> split_prob;
    std::optional<std::string> format;
};

void add_config_flags(CLI::App* sub, CommonFlags& f) {
    sub->add_option("--config", f.config, "JSON run configuration; flags override its values")
        ->check(CLI::ExistingFile);
    sub->add_option("--out", f.out, "Output directory");
    sub->add_option("--jobs", f.jobs, "Worker threads")->check(CLI::PositiveNumber);
}

void add_backend_flags(CLI::App* sub, CommonFlags& f) {
    sub->add_option("--backend", f.backend, "Chamber segmenter")
        ->check(CLI::IsMember({"oracle", "external"}));
    sub->add_option("--adapter-cmd", f.adapter_cmd,
                    "Adapter command line for the external backend (default: $ACCDOR_ADAPTER_CMD)");
    sub->add_option("--adapter-timeout-ms", f.adapter_timeout_ms, "Per-request adapter timeout")
        ->check(CLI::PositiveNumber);
}

void add_training_flags(CLI::App* sub, CommonFlags& f) {
    sub->add_option("--train-seed", f.train_seed, "Classifier seed");
    sub->add_option("--split-seed", f.split_seed, "Split shuffle seed");
    sub->add_option("--max-epochs", f.max_epochs, "Training epoch cap")->check(CLI::PositiveNumber);
    sub->add_option("--patience", f.patience, "Early-stopping patience")->check(CLI::PositiveNumber);
}

RunConfig resolve(const CommonFlags& f) {
    RunConfig c = f.config.empty() ? RunConfig{} : load_run_config(f.config);
    if (c.adapter_cmd.empty()) {
        if (const char* env = std::getenv("ACCDOR_ADAPTER_CMD")) c.adapter_cmd = env;
    }
    if (f.out) c.out = *f.out;
    if (f.jobs) c.jobs = *f.jobs;
    if (f.backend) c.backend = *f.backend == "oracle" ? Backend::Oracle : Backend::External;
    if (f.adapter_cmd) c.adapter_cmd = *f.adapter_cmd;
    if (f.adapter_timeout_ms) c.adapter_timeout_ms = *f.adapter_timeout_ms;
    if (f.train_seed) c.train.seed = *f.train_seed;
    if (f.split_seed) c.split.seed = *f.split_seed;
    if (f.max_epochs) c.train.max_epochs = *f.max_epochs;
    if (f.patience) c.train.patience = *f.patience;
    if (f.phantom_seed) c.phantom_seed = *f.phantom_seed;
    if (f.count) c.phantom_count = *f.count;
    if (f.split_prob) c.phantom.split_segment_probability = *f.split_prob;
    if (f.format) c.image_format = *f.format;
    if (c.out.empty()) {
        throw Error(ErrorCode::InvalidConfig, "no output directory given (--out)");
    }
    c.validate();
    return c;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    os << text;
    if (!os) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

void write_json(const fs::path& path, const json& j) {
    write_text(path, j.dump(2) + "\n");
}

json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::IoError, path.string() + " is not JSON: " + e.what());
    }
}

fs::path prepare_out(const RunConfig& c) {
    const fs::path out(c.out);
    fs::create_directories(out);
    return out;
}

void write_run_json(const fs::path& out, const std::string& command, const std::vector<std::string>& args,
                    const RunConfig& c, json inputs) {
    write_json(out / "run.json", json{{"command", command},
                                      {"args", args},
                                      {"config", to_json(c)},
                                      {"inputs", std::move(inputs)}});
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::vector<LabeledImage> images_of(const fs::path& manifest_path) {
    return load_images(load_manifest(manifest_path));
}

std::vector<ChamberMask> obtain_chambers(std::span<const LabeledImage> images, const RunConfig& c,
                                         const std::string& chambers_dir) {
    if (chambers_dir.empty()) {
        return segment_all(images, make_segmenter_factory(c), c.hpg, c.jobs);
    }
    std::vector<ChamberMask> out;
    for (const auto& li : images) {
        BinaryMask m = read_mask(fs::path(chambers_dir) / (li.id + ".pgm"));
        if (m.height() != li.image.height() || m.width() != li.image.width()) {
            throw Error(ErrorCode::ShapeError, "chamber mask for " + li.id + " does not match its image");
        }
        out.push_back({std::move(m), {}});
    }
    return out;
}

std::vector<std::size_t> subset_of(std::size_t n, const RunConfig& c, const std::string& subset, int repeat) {
    if (subset == "all") {
        std::vector<std::size_t> all(n);
        for (std::size_t i = 0; i < n; ++i) all[i] = i;
        return all;
    }
    const SplitIndices s = split_indices(n, c.split, repeat);
    if (subset == "train") return s.train;
    if (subset == "val") return s.val;
    return s.test;
}

json box_to_json(const CandidateBox& b) {
    return json{{"row", b.center.row}, {"col", b.center.col}, {"h", b.height}, {"w", b.width}, {"score", b.score}};
}

struct DetectionRecord {
    std::string image;
    std::vector<CandidateBox> boxes;
};

std::vector<DetectionRecord> read_detections(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    std::vector<DetectionRecord> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const json j = json::parse(line);
            DetectionRecord r{j.at("image").get<std::string>(), {}};
            for (const auto& b : j.at("boxes")) {
                CandidateBox box;
                box.center = {b.at("row").get<int>(), b.at("col").get<int>()};
                box.height = b.value("h", 20);
                box.width = b.value("w", 20);
                box.score = b.value("score", 1.0);
                r.boxes.push_back(box);
            }
            out.push_back(std::move(r));
        } catch (const json::exception& e) {
            throw Error(ErrorCode::IoError,
                        path.string() + ":" + std::to_string(lineno) + ": bad detection line: " + e.what());
        }
    }
    return out;
}

// --- subcommands -----------------------------------------------------------

void cmd_phantom_gen(const RunConfig& c, const std::vector<std::string>& args, std::ostream& out) {
    const fs::path dir = prepare_out(c);
    write_run_json(dir, "phantom-gen", args, c, json::object());
    fs::create_directories(dir / "images");
    fs::create_directories(dir / "masks");

    const std::string ext = "." + c.image_format;
    const auto count = static_cast<std::size_t>(c.phantom_count);
    std::vector<ManifestEntry> entries(count);
    std::vector<char> split_flags(count, 0);
    parallel_for(count, c.jobs, [&](std::size_t, std::size_t i) {
        char id[32];
        std::snprintf(id, sizeof id, "phantom_%04zu", i);
        const Phantom p = generate_phantom(c.phantom, derive_seed(c.phantom_seed, i));
        const std::string image_rel = std::string("images/") + id + ext;
        const std::string mask_rel = std::string("masks/") + id + "_chamber" + ext;
        write_gray(dir / image_rel, p.image);
        write_mask(dir / mask_rel, p.truth.chamber_mask);
        entries[i] = {id, image_rel, mask_rel, p.truth.cell_points};
        split_flags[i] = p.split_segment ? 1 : 0;
    });

    DatasetManifest manifest;
    manifest.entries = std::move(entries);
    json split_ids = json::array();
    for (std::size_t i = 0; i < count; ++i) {
        if (split_flags[i]) split_ids.push_back(manifest.entries[i].id);
    }
    const json phantom_json = c.phantom;
    manifest.metadata = {{"generator", "phantom"},
                         {"seed", c.phantom_seed},
                         {"count", c.phantom_count},
                         {"phantom", phantom_json},
                         {"config_hash", hex64(fnv1a64(phantom_json.dump()))},
                         {"split_segment", std::move(split_ids)}};
    save_manifest(dir / "manifest.json", manifest);
    out << "wrote " << count << " phantoms to " << dir.string() << "\n";
}

void cmd_segment(const RunConfig& c, const std::vector<std::string>& args, const std::string& manifest_path,
                 std::ostream& out) {
    const fs::path dir = prepare_out(c);
    write_run_json(dir, "segment", args, c, {{"manifest", manifest_path}});
    const auto images = images_of(manifest_path);
    const auto chambers = segment_all(images, make_segmenter_factory(c), c.hpg, c.jobs);

    fs::create_directories(dir / "chambers");
    json rows = json::array();
    std::vector<double> ious;
    std::vector<double> dices;
    for (std::size_t i = 0; i < images.size(); ++i) {
        const auto& li = images[i];
        const auto& ch = chambers[i];
        write_mask(dir / "chambers" / (li.id + ".pgm"), ch.mask);
        json prompts = json::array();
        for (const Point& p : ch.prompts_used.points) prompts.push_back({p.row, p.col});
        json row{{"image", li.id},
                 {"prompts", std::move(prompts)},
                 {"centroid", {ch.prompts_used.source_centroid.row, ch.prompts_used.source_centroid.col}},
                 {"area", ch.mask.count()}};
        if (li.chamber_truth) {
            const double v_iou = iou(ch.mask, *li.chamber_truth);
            const double v_dice = dice(ch.mask, *li.chamber_truth);
            row["iou"] = v_iou;
            row["dice"] = v_dice;
            ious.push_back(v_iou);
            dices.push_back(v_dice);
        }
        rows.push_back(std::move(row));
    }
    json report{{"images", std::move(rows)}};
    if (!ious.empty()) {
        report["mean_iou"] = mean_std(ious).mean;
        report["mean_dice"] = mean_std(dices).mean;
    }
    write_json(dir / "segmentation.json", report);
    out << "segmented " << images.size() << " images";
    if (!ious.empty()) out << ", mean IoU " << mean_std(ious).mean << ", mean Dice " << mean_std(dices).mean;
    out << "\n";
}

void cmd_alpha_search(const RunConfig& c, const std::vector<std::string>& args,
                      const std::string& manifest_path, const std::string& chambers_dir, int repeat,
                      std::ostream& out) {
    const fs::path dir = prepare_out(c);
    const std::uint64_t seed = derive_seed(c.train.seed, static_cast<std::uint64_t>(repeat));
    write_run_json(dir, "alpha-search", args, c,
                   {{"manifest", manifest_path}, {"chambers", chambers_dir}, {"repeat", repeat},
                    {"effective_train_seed", seed}});
    const auto images = images_of(manifest_path);
    const auto chambers = obtain_chambers(images, c, chambers_dir);
    const SplitIndices s = split_indices(images.size(), c.split, repeat);

    auto samples = [&](const std::vector<std::size_t>& which) {
        std::vector<DetectionSample> v;
        for (const std::size_t i : which) v.push_back({&images[i].image, &chambers[i].mask, images[i].cells});
        return v;
    };
    auto ids = [&](const std::vector<std::size_t>& which) {
        json a = json::array();
        for (const std::size_t i : which) a.push_back(images[i].id);
        return a;
    };
    TrainConfig tc = c.train;
    tc.seed = seed;
    const AlphaSearchResult result = search_alpha(samples(s.train), samples(s.val), c.cdm, tc, c.jobs);

    json report = alpha_report_to_json(result.report);
    report["repeat"] = repeat;
    report["train_images"] = ids(s.train);
    report["val_images"] = ids(s.val);
    write_json(dir / "alpha_report.json", report);
    save_params(dir / "classifier.bin", result.classifier);
    out << "best alpha " << result.report.best_alpha << "\n";
}

struct DetectArgs {
    std::string manifest;
    std::string classifier;
    std::optional<double> alpha;
    std::string alpha_report;
    std::string chambers;
    std::string subset = "all";
    int repeat = 0;
    bool no_filter = false;
};

void cmd_detect(const RunConfig& c, const std::vector<std::string>& args, const DetectArgs& a,
                std::ostream& out) {
    const fs::path dir = prepare_out(c);
    double alpha = 0.0;
    if (a.alpha) {
        alpha = *a.alpha;
    } else if (!a.alpha_report.empty()) {
        alpha = read_json(a.alpha_report).at("best_alpha").get<double>();
    } else {
        throw Error(ErrorCode::InvalidArgument, "detect needs --alpha or --alpha-report");
    }
    if (!a.no_filter && a.classifier.empty()) {
        throw Error(ErrorCode::InvalidArgument, "detect needs --classifier unless --no-filter is given");
    }
    write_run_json(dir, "detect", args, c,
                   {{"manifest", a.manifest}, {"classifier", a.classifier}, {"alpha", alpha},
                    {"chambers", a.chambers}, {"subset", a.subset}, {"repeat", a.repeat},
                    {"filter", !a.no_filter}});

    const MlpParams classifier = a.no_filter ? MlpParams{} : load_params(a.classifier);
    const auto images = images_of(a.manifest);
    const auto which = subset_of(images.size(), c, a.subset, a.repeat);
    std::vector<LabeledImage> chosen;
    for (const std::size_t i : which) chosen.push_back(images[i]);
    const auto chambers = obtain_chambers(chosen, c, a.chambers);

    std::vector<std::vector<CandidateBox>> boxes(chosen.size());
    parallel_for(chosen.size(), c.jobs, [&](std::size_t, std::size_t i) {
        auto candidates = detect_candidates(chosen[i].image, chambers[i].mask, alpha, c.cdm);
        boxes[i] = a.no_filter ? std::move(candidates) : filter_boxes(chosen[i].image, candidates, classifier);
    });

    std::ostringstream lines;
    std::size_t total = 0;
    for (std::size_t i = 0; i < chosen.size(); ++i) {
        json arr = json::array();
        for (const auto& b : boxes[i]) arr.push_back(box_to_json(b));
        total += boxes[i].size();
        lines << json{{"image", chosen[i].id}, {"boxes", std::move(arr)}}.dump() << "\n";
    }
    write_text(dir / "detections.jsonl", lines.str());
    out << total << " boxes on " << chosen.size() << " images (alpha " << alpha << ")\n";
}

void print_method(std::ostream& out, const std::string& name, const MethodResult& m) {
    out << name << ": box P " << m.box.precision << " R " << m.box.recall << " F1 " << m.box.f1
        << " | image P " << m.image.precision << " R " << m.image.recall << " F1 " << m.image.f1 << "\n";
}

void cmd_eval_detections(const RunConfig& c, const std::vector<std::string>& args,
                         const std::string& manifest_path, const std::string& detections,
                         std::ostream& out) {
    const fs::path dir = prepare_out(c);
    write_run_json(dir, "eval", args, c, {{"manifest", manifest_path}, {"detections", detections}});
    const DatasetManifest manifest = load_manifest(manifest_path);
    std::map<std::string, const ManifestEntry*> by_id;
    for (const auto& e : manifest.entries) by_id[e.id] = &e;

    const auto records = read_detections(detections);
    std::vector<std::vector<CandidateBox>> preds;
    std::vector<std::vector<Point>> truths;
    std::vector<std::string> ids;
    for (const auto& r : records) {
        const auto it = by_id.find(r.image);
        if (it == by_id.end()) {
            throw Error(ErrorCode::InvalidArgument, "detections mention unknown image " + r.image);
        }
        preds.push_back(r.boxes);
        truths.push_back(it->second->cells);
        ids.push_back(r.image);
    }
    if (records.empty()) {
        throw Error(ErrorCode::EmptyDataset, "detections file lists no images");
    }
    const MethodResult m = score_method(preds, truths);
    json metrics = method_to_json(m, ids);
    metrics["images"] = records.size();
    write_json(dir / "metrics.json", metrics);
    print_method(out, "detections", m);
}

void cmd_eval_protocol(const RunConfig& c, const std::vector<std::string>& args,
                       const std::string& manifest_path, const std::string& chambers_dir, int repeats,
                       std::ostream& out) {
    const fs::path dir = prepare_out(c);
    write_run_json(dir, "eval", args, c,
                   {{"manifest", manifest_path}, {"chambers", chambers_dir}, {"repeats", repeats}});
    const auto images = images_of(manifest_path);
    const auto chambers = obtain_chambers(images, c, chambers_dir);
    const ProtocolReport report = run_protocol(images, chambers, c.protocol(), repeats);
    const json metrics = report_to_json(report);
    write_json(dir / "metrics.json", metrics);

    const json& s = metrics.at("summary");
    for (const char* method : {"thres", "cdm_without_filter", "cdm"}) {
        const std::string p = std::string(method) + "/box_level/";
        out << method << ": box P " << s.at(p + "precision").at("mean").get<double>() << " R "
            << s.at(p + "recall").at("mean").get<double>() << " F1 " << s.at(p + "f1").at("mean").get<double>()
            << "\n";
    }
    out << "best alpha " << s.at("best_alpha").at("mean").get<double>() << "\n";
}

struct OverlayArgs {
    std::string manifest;
    std::string id;
    std::string image;
    std::string detections;
};

inline constexpr std::uint8_t kBoxGray = 255;
inline constexpr std::uint8_t kTruthGray = 128;
inline constexpr int kCrossArm = 3;

void draw(GrayImage& img, int r, int c, std::uint8_t v) {
    if (img.contains({r, c})) img.set(r, c, v);
}

void draw_box(GrayImage& img, const CandidateBox& b) {
    const int r0 = b.center.row - b.height / 2;
    const int r1 = b.center.row + b.height / 2;
    const int c0 = b.center.col - b.width / 2;
    const int c1 = b.center.col + b.width / 2;
    for (int c = c0; c <= c1; ++c) {
        draw(img, r0, c, kBoxGray);
        draw(img, r1, c, kBoxGray);
    }
    for (int r = r0; r <= r1; ++r) {
        draw(img, r, c0, kBoxGray);
        draw(img, r, c1, kBoxGray);
    }
}

void draw_cross(GrayImage& img, Point p) {
    for (int d = -kCrossArm; d <= kCrossArm; ++d) {
        draw(img, p.row + d, p.col, kTruthGray);
        draw(img, p.row, p.col + d, kTruthGray);
    }
}

void cmd_overlay(const RunConfig& c, const std::vector<std::string>& args, const OverlayArgs& a,
                 std::ostream& out) {
    const fs::path dir = prepare_out(c);
    write_run_json(dir, "overlay", args, c,
                   {{"manifest", a.manifest}, {"id", a.id}, {"image", a.image}, {"detections", a.detections}});

    std::optional<GrayImage> loaded;
    std::string id = a.id;
    std::vector<Point> truth;
    if (!a.manifest.empty()) {
        if (id.empty()) throw Error(ErrorCode::InvalidArgument, "overlay with --manifest needs --id");
        const DatasetManifest m = load_manifest(a.manifest);
        const ManifestEntry* entry = nullptr;
        for (const auto& e : m.entries) {
            if (e.id == id) entry = &e;
        }
        if (!entry) throw Error(ErrorCode::InvalidArgument, "no image " + id + " in manifest");
        loaded = read_gray(m.resolve(entry->image));
        truth = entry->cells;
    } else if (!a.image.empty()) {
        loaded = read_gray(a.image);
        if (id.empty()) id = fs::path(a.image).stem().string();
    } else {
        throw Error(ErrorCode::InvalidArgument, "overlay needs --image or --manifest with --id");
    }

    GrayImage& image = *loaded;
    std::size_t drawn = 0;
    if (!a.detections.empty()) {
        for (const auto& r : read_detections(a.detections)) {
            if (r.image != id) continue;
            for (const auto& b : r.boxes) draw_box(image, b);
            drawn += r.boxes.size();
        }
    }
    for (const Point& p : truth) draw_cross(image, p);

    const fs::path target = dir / (id + "_overlay." + c.image_format);
    write_gray(target, image);
    out << "wrote " << target.string() << " (" << drawn << " boxes, " << truth.size() << " points)\n";
}

} // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Anterior chamber cell detection pipeline", "accdor"};
    app.require_subcommand(1);

    CommonFlags f;
    std::string manifest;
    std::string chambers;
    int repeat = 0;
    std::optional<int> repeats;
    std::string detections;
    DetectArgs det;
    OverlayArgs ov;

    auto* gen = app.add_subcommand("phantom-gen", "Generate synthetic phantoms and a manifest");
    add_config_flags(gen, f);
    gen->add_option("--count", f.count, "Number of phantoms")->check(CLI::PositiveNumber);
    gen->add_option("--seed", f.phantom_seed, "Generator seed");
    gen->add_option("--split-prob", f.split_prob, "Probability of a split ring")->check(CLI::Range(0.0, 1.0));
    gen->add_option("--format", f.format, "Image format")->check(CLI::IsMember({"pgm", "png"}));

    auto* seg = app.add_subcommand("segment", "Segment the anterior chamber of every manifest image");
    add_config_flags(seg, f);
    add_backend_flags(seg, f);
    seg->add_option("--manifest", manifest, "Dataset manifest")->required()->check(CLI::ExistingFile);

    auto* search = app.add_subcommand("alpha-search", "Select the threshold factor and train the crop classifier");
    add_config_flags(search, f);
    add_backend_flags(search, f);
    add_training_flags(search, f);
    search->add_option("--manifest", manifest, "Dataset manifest")->required()->check(CLI::ExistingFile);
    search->add_option("--chambers", chambers, "Directory of precomputed chamber masks")
        ->check(CLI::ExistingDirectory);
    search->add_option("--repeat", repeat, "Split repeat index")->check(CLI::NonNegativeNumber);

    auto* detect = app.add_subcommand("detect", "Detect cells and write detections.jsonl");
    add_config_flags(detect, f);
    add_backend_flags(detect, f);
    detect->add_option("--manifest", det.manifest, "Dataset manifest")->required()->check(CLI::ExistingFile);
    detect->add_option("--classifier", det.classifier, "Classifier file")->check(CLI::ExistingFile);
    detect->add_option("--alpha", det.alpha, "Threshold factor")->check(CLI::Range(0.0, 1.0));
    detect->add_option("--alpha-report", det.alpha_report, "Take best_alpha from this report")
        ->check(CLI::ExistingFile);
    detect->add_option("--chambers", det.chambers, "Directory of precomputed chamber masks")
        ->check(CLI::ExistingDirectory);
    detect->add_option("--subset", det.subset, "Images to process")
        ->check(CLI::IsMember({"all", "train", "val", "test"}));
    detect->add_option("--repeat", det.repeat, "Split repeat index for --subset")->check(CLI::NonNegativeNumber);
    detect->add_flag("--no-filter", det.no_filter, "Keep every candidate");

    auto* eval = app.add_subcommand("eval", "Score detections, or run the repeated-split protocol");
    add_config_flags(eval, f);
    add_backend_flags(eval, f);
    add_training_flags(eval, f);
    eval->add_option("--manifest", manifest, "Dataset manifest")->required()->check(CLI::ExistingFile);
    auto* det_opt = eval->add_option("--detections", detections, "detections.jsonl to score")
                        ->check(CLI::ExistingFile);
    auto* rep_opt = eval->add_option("--repeats", repeats, "Run this many protocol repeats")
                        ->check(CLI::PositiveNumber);
    det_opt->excludes(rep_opt);
    eval->add_option("--chambers", chambers, "Directory of precomputed chamber masks")
        ->check(CLI::ExistingDirectory);

    auto* overlay = app.add_subcommand("overlay", "Draw detections and annotated cells on an image");
    add_config_flags(overlay, f);
    overlay->add_option("--manifest", ov.manifest, "Dataset manifest")->check(CLI::ExistingFile);
    overlay->add_option("--id", ov.id, "Image id");
    overlay->add_option("--image", ov.image, "Image file")->check(CLI::ExistingFile);
    overlay->add_option("--detections", ov.detections, "detections.jsonl")->check(CLI::ExistingFile);
    overlay->add_option("--format", f.format, "Output format")->check(CLI::IsMember({"pgm", "png"}));

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "accdor: " << e.what() << "\n";
        const auto subs = app.get_subcommands();
        err << (subs.empty() ? app.help() : subs.front()->help());
        return kExitUsage;
    }

    try {
        const RunConfig c = resolve(f);
        if (gen->parsed()) {
            cmd_phantom_gen(c, args, out);
        } else if (seg->parsed()) {
            cmd_segment(c, args, manifest, out);
        } else if (search->parsed()) {
            cmd_alpha_search(c, args, manifest, chambers, repeat, out);
        } else if (detect->parsed()) {
            cmd_detect(c, args, det, out);
        } else if (eval->parsed()) {
            if (repeats) {
                cmd_eval_protocol(c, args, manifest, chambers, *repeats, out);
            } else if (!detections.empty()) {
                cmd_eval_detections(c, args, manifest, detections, out);
            } else {
                throw Error(ErrorCode::InvalidArgument, "eval needs --detections or --repeats");
            }
        } else if (overlay->parsed()) {
            cmd_overlay(c, args, ov, out);
        }
    } catch (const Error& e) {
        err << "accdor: error: " << e.what() << "\n";
        return kExitError;
    } catch (const std::exception& e) {
        err << "accdor: error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitOk;
}

int run_command(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run_command(args, out, err);
}

} // namespace accdor::cli
