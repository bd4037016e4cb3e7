#include "support/builders.hpp"

#include <cli.hpp>

#include <accdor/dataset.hpp>
#include <accdor/image_io.hpp>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <fstream>
#include <sstream>

using namespace accdor;
using namespace accdor::testing;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliRun {
    int code;
    std::string out;
    std::string err;
};

CliRun run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run_command(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

json load(const fs::path& p) {
    return json::parse(slurp(p));
}

// A small-phantom configuration so CLI tests stay quick.
fs::path fast_config(const TempDir& dir) {
    const json cfg{
        {"phantom", {{"height", 160}, {"width", 150}, {"cell_count_range", {3, 5}}, {"artifact_count_range", {1, 3}},
                     {"outside_artifact_count_range", {0, 1}}}},
        {"cdm", {{"alpha_min", 0.85}, {"alpha_max", 0.95}, {"alpha_step", 0.05}}},
        {"train", {{"hidden", {16}}, {"max_epochs", 10}}},
        {"split", {{"repeats", 2}}},
    };
    const fs::path p = dir / "fast.json";
    std::ofstream(p) << cfg.dump(2);
    return p;
}

void generate(const TempDir& dir, const std::string& sub, int count = 6) {
    const CliRun r = run({"phantom-gen", "--config", fast_config(dir).string(), "--count", std::to_string(count),
                       "--seed", "1", "--out", (dir / sub).string()});
    ASSERT_EQ(r.code, 0) << r.err;
}

} // namespace

TEST(Cli, UsageErrorsExitTwo) {
    EXPECT_EQ(run({}).code, 2);
    EXPECT_EQ(run({"frobnicate"}).code, 2);
    EXPECT_EQ(run({"phantom-gen", "--no-such-flag"}).code, 2);
    EXPECT_EQ(run({"segment"}).code, 2);
    EXPECT_EQ(run({"segment", "--manifest", "/does/not/exist.json", "--out", "x"}).code, 2);
    EXPECT_EQ(run({"segment", "--backend", "magic"}).code, 2);
    const CliRun bad = run({"eval", "--bogus"});
    EXPECT_EQ(bad.code, 2);
    EXPECT_NE(bad.err.find("Usage"), std::string::npos);
}

TEST(Cli, HelpExitsZero) {
    const CliRun r = run({"--help"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("phantom-gen"), std::string::npos);
}

TEST(Cli, PhantomGenIsBitwiseReproducible) {
    TempDir dir;
    generate(dir, "a");
    generate(dir, "b");
    EXPECT_EQ(slurp(dir / "a/manifest.json"), slurp(dir / "b/manifest.json"));
    const DatasetManifest m = load_manifest(dir / "a/manifest.json");
    ASSERT_EQ(m.entries.size(), 6u);
    for (const auto& e : m.entries) {
        EXPECT_EQ(slurp(dir / "a" / e.image), slurp(dir / "b" / e.image));
        EXPECT_EQ(slurp(dir / "a" / e.chamber_mask), slurp(dir / "b" / e.chamber_mask));
    }
    const json run_json = load(dir / "a/run.json");
    EXPECT_EQ(run_json.at("command"), "phantom-gen");
    EXPECT_EQ(run_json.at("config").at("generation").at("seed"), 1);
    EXPECT_EQ(run_json.at("config").at("phantom").at("height"), 160);
}

TEST(Cli, EvalOnGroundTruthScoresOne) {
    TempDir dir;
    generate(dir, "d");
    const DatasetManifest m = load_manifest(dir / "d/manifest.json");
    {
        std::ofstream out(dir / "perfect.jsonl");
        for (const auto& e : m.entries) {
            json boxes = json::array();
            for (const Point& p : e.cells) boxes.push_back({{"row", p.row}, {"col", p.col}, {"h", 20}, {"w", 20}, {"score", 1.0}});
            out << json{{"image", e.id}, {"boxes", boxes}}.dump() << "\n";
        }
    }
    const CliRun r = run({"eval", "--manifest", (dir / "d/manifest.json").string(), "--detections",
                       (dir / "perfect.jsonl").string(), "--out", (dir / "ev").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const json metrics = load(dir / "ev/metrics.json");
    for (const char* level : {"image_level", "box_level"}) {
        for (const char* k : {"precision", "recall", "f1"}) EXPECT_EQ(metrics.at(level).at(k), 1.0) << level << k;
    }
    EXPECT_TRUE(fs::exists(dir / "ev/run.json"));
}

TEST(Cli, EvalRejectsUnknownImages) {
    TempDir dir;
    generate(dir, "d", 2);
    std::ofstream(dir / "bad.jsonl") << R"({"image": "nobody", "boxes": []})" << "\n";
    const CliRun r = run({"eval", "--manifest", (dir / "d/manifest.json").string(), "--detections",
                       (dir / "bad.jsonl").string(), "--out", (dir / "ev").string()});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("error"), std::string::npos);
}

TEST(Cli, FlagsOverrideConfigFile) {
    TempDir dir;
    const json cfg{{"jobs", 3}, {"split", {{"seed", 5}}}, {"phantom", {{"height", 160}, {"width", 150}}}};
    std::ofstream(dir / "c.json") << cfg.dump();
    const CliRun r = run({"phantom-gen", "--config", (dir / "c.json").string(), "--count", "1", "--jobs", "2",
                       "--out", (dir / "o").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const json resolved = load(dir / "o/run.json").at("config");
    EXPECT_EQ(resolved.at("jobs"), 2);
    EXPECT_EQ(resolved.at("split").at("seed"), 5);
    EXPECT_EQ(resolved.at("phantom").at("width"), 150);
    EXPECT_EQ(resolved.at("phantom").at("noise_sigma"), 5.0);
}

TEST(Cli, BadConfigIsAModuleError) {
    TempDir dir;
    std::ofstream(dir / "c.json") << R"({"phantom": {"height": 10}})";
    const CliRun r = run({"phantom-gen", "--config", (dir / "c.json").string(), "--out", (dir / "o").string()});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("InvalidConfig"), std::string::npos);
}

TEST(Cli, ExternalBackendNeedsCommand) {
    TempDir dir;
    generate(dir, "d", 1);
    ::unsetenv("ACCDOR_ADAPTER_CMD");
    const CliRun r = run({"segment", "--manifest", (dir / "d/manifest.json").string(), "--backend", "external",
                       "--out", (dir / "s").string()});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("adapter"), std::string::npos);
}

TEST(Cli, ExternalBackendMatchesOracle) {
    TempDir dir;
    generate(dir, "d", 3);
    const std::string manifest = (dir / "d/manifest.json").string();
    ASSERT_EQ(run({"segment", "--manifest", manifest, "--out", (dir / "oracle").string()}).code, 0);
    ::setenv("ACCDOR_ADAPTER_CMD", FAKE_ADAPTER_PATH, 1);
    const CliRun r = run({"segment", "--manifest", manifest, "--backend", "external", "--jobs", "2", "--out",
                       (dir / "ext").string()});
    ::unsetenv("ACCDOR_ADAPTER_CMD");
    ASSERT_EQ(r.code, 0) << r.err;
    for (const auto& e : load_manifest(manifest).entries) {
        EXPECT_EQ(slurp(dir / "oracle/chambers" / (e.id + ".pgm")), slurp(dir / "ext/chambers" / (e.id + ".pgm")));
    }
    EXPECT_EQ(load(dir / "ext/run.json").at("config").at("adapter_cmd"), FAKE_ADAPTER_PATH);
    const json seg = load(dir / "oracle/segmentation.json");
    EXPECT_GE(seg.at("mean_iou").get<double>(), 0.95);
}

TEST(Cli, SearchDetectEvalOverlay) {
    TempDir dir;
    generate(dir, "d", 10);
    const std::string cfg = fast_config(dir).string();
    const std::string manifest = (dir / "d/manifest.json").string();
    ASSERT_EQ(run({"segment", "--manifest", manifest, "--out", (dir / "seg").string()}).code, 0);
    const std::string chambers = (dir / "seg/chambers").string();

    CliRun r = run({"alpha-search", "--config", cfg, "--manifest", manifest, "--chambers", chambers, "--out",
                 (dir / "search").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const json report = load(dir / "search/alpha_report.json");
    EXPECT_EQ(report.at("per_alpha").size(), 3u);
    EXPECT_EQ(report.at("train_images").size(), 4u);
    EXPECT_TRUE(fs::exists(dir / "search/classifier.bin"));

    r = run({"detect", "--config", cfg, "--manifest", manifest, "--chambers", chambers, "--classifier",
             (dir / "search/classifier.bin").string(), "--alpha-report", (dir / "search/alpha_report.json").string(),
             "--subset", "test", "--out", (dir / "det").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    std::ifstream lines(dir / "det/detections.jsonl");
    std::string line;
    int n = 0;
    std::string first_id;
    while (std::getline(lines, line)) {
        const json j = json::parse(line);
        if (n == 0) first_id = j.at("image");
        for (const auto& b : j.at("boxes")) {
            EXPECT_EQ(b.at("h"), 20);
            EXPECT_GE(b.at("score").get<double>(), 0.5);
        }
        ++n;
    }
    EXPECT_EQ(n, 5);

    r = run({"eval", "--manifest", manifest, "--detections", (dir / "det/detections.jsonl").string(), "--out",
             (dir / "ev").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(load(dir / "ev/metrics.json").at("images"), 5);

    r = run({"overlay", "--manifest", manifest, "--id", first_id, "--detections",
             (dir / "det/detections.jsonl").string(), "--format", "png", "--out", (dir / "ov").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const GrayImage ov = read_gray(dir / "ov" / (first_id + "_overlay.png"));
    const DatasetManifest m = load_manifest(manifest);
    for (const auto& e : m.entries) {
        if (e.id != first_id) continue;
        for (const Point& p : e.cells) {
            EXPECT_EQ(ov.at(p.row, p.col - 3), 128);
            EXPECT_EQ(ov.at(p.row - 3, p.col), 128);
        }
    }
}

TEST(Cli, OverlayDrawsBoxOutline) {
    TempDir dir;
    write_gray(dir / "img.pgm", GrayImage(40, 40, 10));
    std::ofstream(dir / "d.jsonl") << R"({"image": "img", "boxes": [{"row": 20, "col": 20, "h": 20, "w": 20, "score": 1}]})"
                                   << "\n";
    const CliRun r = run({"overlay", "--image", (dir / "img.pgm").string(), "--detections", (dir / "d.jsonl").string(),
                       "--out", (dir / "o").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const GrayImage ov = read_gray(dir / "o/img_overlay.pgm");
    EXPECT_EQ(ov.at(10, 10), 255);
    EXPECT_EQ(ov.at(30, 30), 255);
    EXPECT_EQ(ov.at(10, 25), 255);
    EXPECT_EQ(ov.at(20, 20), 10);
    EXPECT_EQ(ov.at(9, 10), 10);
}
