#include "run_config.hpp"

#include <accdor/errors.hpp>
#include <accdor/external_segmenter.hpp>

#include <fstream>

namespace accdor::cli {

using nlohmann::json;

namespace {

json offsets_to_json(const std::vector<PromptOffset>& offsets) {
    json arr = json::array();
    for (const auto& o : offsets) {
        auto part = [](const OffsetValue& v) {
            return json{{"value", v.value}, {"unit", v.fraction_of_width ? "width" : "px"}};
        };
        arr.push_back({{"row", part(o.row)}, {"col", part(o.col)}});
    }
    return arr;
}

std::vector<PromptOffset> offsets_from_json(const json& arr) {
    std::vector<PromptOffset> out;
    for (const auto& o : arr) {
        auto part = [](const json& v) {
            if (v.is_number()) return OffsetValue{v.get<double>(), false};
            const std::string unit = v.value("unit", "px");
            if (unit != "px" && unit != "width") {
                throw Error(ErrorCode::InvalidConfig, "offset unit must be \"px\" or \"width\"");
            }
            return OffsetValue{v.at("value").get<double>(), unit == "width"};
        };
        out.push_back({part(o.at("row")), part(o.at("col"))});
    }
    return out;
}

template <typename T>
void maybe(const json& j, const char* key, T& field) {
    if (j.contains(key)) field = j.at(key).get<T>();
}

} // namespace

void RunConfig::validate() const {
    hpg.validate();
    cdm.validate();
    train.validate();
    phantom.validate();
    split.validate();
    if (oracle.fill_tolerance < 0) {
        throw Error(ErrorCode::InvalidConfig, "oracle fill_tolerance must be non-negative");
    }
    if (backend == Backend::External && adapter_cmd.empty()) {
        throw Error(ErrorCode::InvalidConfig,
                    "external backend selected but no adapter command (--adapter-cmd or ACCDOR_ADAPTER_CMD)");
    }
    if (phantom_count < 1) {
        throw Error(ErrorCode::InvalidConfig, "phantom count must be at least 1");
    }
    if (image_format != "pgm" && image_format != "png") {
        throw Error(ErrorCode::InvalidConfig, "image format must be pgm or png");
    }
    if (jobs < 1) {
        throw Error(ErrorCode::InvalidConfig, "jobs must be at least 1");
    }
    if (baseline_beta_min < 1) {
        throw Error(ErrorCode::InvalidConfig, "baseline_beta_min must be at least 1");
    }
}

ProtocolConfig RunConfig::protocol() const {
    ProtocolConfig p;
    p.cdm = cdm;
    p.train = train;
    p.split = split;
    p.baseline_beta_min = baseline_beta_min;
    p.jobs = jobs;
    return p;
}

json to_json(const RunConfig& c) {
    return json{
        {"hpg", {{"r_as", c.hpg.r_as}, {"n_prompts", c.hpg.n_prompts}, {"offsets", offsets_to_json(c.hpg.offsets)}}},
        {"oracle", {{"fill_tolerance", c.oracle.fill_tolerance}, {"fill_holes", c.oracle.fill_holes}}},
        {"cdm",
         {{"beta_min", c.cdm.beta_min},
          {"beta_max", c.cdm.beta_max},
          {"alpha_min", c.cdm.alpha_min},
          {"alpha_max", c.cdm.alpha_max},
          {"alpha_step", c.cdm.alpha_step},
          {"box_h", c.cdm.box_h},
          {"box_w", c.cdm.box_w}}},
        {"train",
         {{"learning_rate", c.train.learning_rate},
          {"batch_size", c.train.batch_size},
          {"max_epochs", c.train.max_epochs},
          {"patience", c.train.patience},
          {"seed", c.train.seed},
          {"hidden", c.train.hidden}}},
        {"phantom", c.phantom},
        {"generation", {{"count", c.phantom_count}, {"seed", c.phantom_seed}, {"format", c.image_format}}},
        {"split",
         {{"train", c.split.train},
          {"val", c.split.val},
          {"test", c.split.test},
          {"repeats", c.split.repeats},
          {"seed", c.split.seed}}},
        {"baseline_beta_min", c.baseline_beta_min},
        {"backend", c.backend == Backend::Oracle ? "oracle" : "external"},
        {"adapter_cmd", c.adapter_cmd},
        {"adapter_timeout_ms", c.adapter_timeout_ms},
        {"jobs", c.jobs},
        {"out", c.out},
    };
}

void apply_json(RunConfig& c, const json& j) {
    try {
        if (j.contains("hpg")) {
            const auto& h = j["hpg"];
            maybe(h, "r_as", c.hpg.r_as);
            maybe(h, "n_prompts", c.hpg.n_prompts);
            if (h.contains("offsets")) c.hpg.offsets = offsets_from_json(h["offsets"]);
        }
        if (j.contains("oracle")) {
            maybe(j["oracle"], "fill_tolerance", c.oracle.fill_tolerance);
            maybe(j["oracle"], "fill_holes", c.oracle.fill_holes);
        }
        if (j.contains("cdm")) {
            const auto& d = j["cdm"];
            maybe(d, "beta_min", c.cdm.beta_min);
            maybe(d, "beta_max", c.cdm.beta_max);
            maybe(d, "alpha_min", c.cdm.alpha_min);
            maybe(d, "alpha_max", c.cdm.alpha_max);
            maybe(d, "alpha_step", c.cdm.alpha_step);
            maybe(d, "box_h", c.cdm.box_h);
            maybe(d, "box_w", c.cdm.box_w);
        }
        if (j.contains("train")) {
            const auto& t = j["train"];
            maybe(t, "learning_rate", c.train.learning_rate);
            maybe(t, "batch_size", c.train.batch_size);
            maybe(t, "max_epochs", c.train.max_epochs);
            maybe(t, "patience", c.train.patience);
            maybe(t, "seed", c.train.seed);
            maybe(t, "hidden", c.train.hidden);
        }
        if (j.contains("phantom")) {
            json merged = c.phantom;
            merged.update(j["phantom"]);
            c.phantom = merged.get<PhantomConfig>();
        }
        if (j.contains("generation")) {
            maybe(j["generation"], "count", c.phantom_count);
            maybe(j["generation"], "seed", c.phantom_seed);
            maybe(j["generation"], "format", c.image_format);
        }
        if (j.contains("split")) {
            const auto& s = j["split"];
            maybe(s, "train", c.split.train);
            maybe(s, "val", c.split.val);
            maybe(s, "test", c.split.test);
            maybe(s, "repeats", c.split.repeats);
            maybe(s, "seed", c.split.seed);
        }
        maybe(j, "baseline_beta_min", c.baseline_beta_min);
        if (j.contains("backend")) {
            const auto b = j["backend"].get<std::string>();
            if (b != "oracle" && b != "external") {
                throw Error(ErrorCode::InvalidConfig, "backend must be \"oracle\" or \"external\"");
            }
            c.backend = b == "oracle" ? Backend::Oracle : Backend::External;
        }
        maybe(j, "adapter_cmd", c.adapter_cmd);
        maybe(j, "adapter_timeout_ms", c.adapter_timeout_ms);
        maybe(j, "jobs", c.jobs);
        maybe(j, "out", c.out);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidConfig, std::string("bad config value: ") + e.what());
    }
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot open config " + path);
    }
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidConfig, std::string("config is not JSON: ") + e.what());
    }
    RunConfig c;
    apply_json(c, j);
    return c;
}

SegmenterFactory make_segmenter_factory(const RunConfig& config) {
    if (config.backend == Backend::Oracle) {
        return [oracle = config.oracle] { return std::make_unique<OracleSegmenter>(oracle); };
    }
    AdapterOptions options{config.adapter_cmd, std::chrono::milliseconds(config.adapter_timeout_ms)};
    return [options] { return std::make_unique<ExternalSegmenter>(options); };
}

} // namespace accdor::cli
