#pragma once

#include <accdor/cell_detect.hpp>
#include <accdor/chamber_seg.hpp>
#include <accdor/classifier.hpp>
#include <accdor/dataset.hpp>
#include <accdor/phantom.hpp>
#include <accdor/protocol.hpp>
#include <accdor/segmenter.hpp>

#include <nlohmann/json.hpp>

#include <cstdint>
#include <string>

namespace accdor::cli {

enum class Backend { Oracle, External };

/// Everything a run needs. Resolution order: flags > config file > defaults.
struct RunConfig {
    HpgConfig hpg;
    OracleConfig oracle;
    CdmConfig cdm;
    TrainConfig train;
    PhantomConfig phantom;
    SplitSpec split;
    int phantom_count = 50;
    std::uint64_t phantom_seed = 0; // image i uses derive_seed(phantom_seed, i)
    std::string image_format = "pgm";
    std::size_t baseline_beta_min = 1;
    Backend backend = Backend::Oracle;
    std::string adapter_cmd;
    std::int64_t adapter_timeout_ms = 120'000;
    int jobs = 1;
    std::string out;

    void validate() const;
    ProtocolConfig protocol() const;
};

nlohmann::json to_json(const RunConfig& config);

/// Overlays the keys present in `j` onto `config`.
void apply_json(RunConfig& config, const nlohmann::json& j);

RunConfig load_run_config(const std::string& path);

SegmenterFactory make_segmenter_factory(const RunConfig& config);

} // namespace accdor::cli
