#include "accdor/dataset.hpp"

#include "accdor/errors.hpp"
#include "accdor/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

namespace accdor {

using nlohmann::json;

json manifest_to_json(const DatasetManifest& manifest) {
    json entries = json::array();
    for (const auto& e : manifest.entries) {
        json cells = json::array();
        for (const Point& p : e.cells) cells.push_back({p.row, p.col});
        entries.push_back({{"id", e.id},
                           {"image", e.image.generic_string()},
                           {"chamber_mask", e.chamber_mask.generic_string()},
                           {"cells", std::move(cells)}});
    }
    return json{{"version", kManifestVersion}, {"entries", std::move(entries)}, {"metadata", manifest.metadata}};
}

DatasetManifest manifest_from_json(const json& j, const std::filesystem::path& base_dir) {
    try {
        if (j.at("version").get<int>() != kManifestVersion) {
            throw Error(ErrorCode::IoError, "unsupported manifest version");
        }
        DatasetManifest m;
        m.base_dir = base_dir;
        m.metadata = j.value("metadata", json::object());
        for (const auto& e : j.at("entries")) {
            ManifestEntry entry;
            entry.image = e.at("image").get<std::string>();
            entry.chamber_mask = e.value("chamber_mask", std::string{});
            entry.id = e.value("id", entry.image.stem().string());
            for (const auto& p : e.value("cells", json::array())) {
                entry.cells.push_back({p.at(0).get<int>(), p.at(1).get<int>()});
            }
            m.entries.push_back(std::move(entry));
        }
        return m;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::IoError, std::string("malformed manifest: ") + e.what());
    }
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot open manifest " + path.string());
    }
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::IoError, std::string("manifest is not JSON: ") + e.what());
    }
    return manifest_from_json(j, path.parent_path());
}

void save_manifest(const std::filesystem::path& path, const DatasetManifest& manifest) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw Error(ErrorCode::IoError, "cannot write manifest " + path.string());
    }
    out << manifest_to_json(manifest).dump(2) << '\n';
}

void SplitSpec::validate() const {
    if (train < 0.0 || val < 0.0 || test < 0.0 || std::abs(train + val + test - 1.0) > 1e-9) {
        throw Error(ErrorCode::InvalidConfig, "split ratios must be non-negative and sum to 1");
    }
    if (repeats < 1) {
        throw Error(ErrorCode::InvalidConfig, "repeats must be at least 1");
    }
}

SplitIndices split_indices(std::size_t count, const SplitSpec& spec, int repeat_index) {
    spec.validate();
    if (repeat_index < 0 || repeat_index >= spec.repeats) {
        throw Error(ErrorCode::InvalidArgument, "repeat_index out of range");
    }
    if (count == 0) {
        throw Error(ErrorCode::EmptyDataset, "cannot split an empty manifest");
    }
    std::vector<std::size_t> order(count);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(derive_seed(spec.seed, static_cast<std::uint64_t>(repeat_index)));
    std::shuffle(order.begin(), order.end(), rng);

    const auto n = static_cast<double>(count);
    const auto n_train = static_cast<std::size_t>(std::floor(spec.train * n + 1e-9));
    const auto n_val = std::min(count - n_train, static_cast<std::size_t>(std::floor(spec.val * n + 1e-9)));
    SplitIndices s;
    s.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
    s.val.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train),
                 order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
    s.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), order.end());
    return s;
}

DatasetSplit split(const DatasetManifest& manifest, const SplitSpec& spec, int repeat_index) {
    const SplitIndices idx = split_indices(manifest.entries.size(), spec, repeat_index);
    auto subset = [&](const std::vector<std::size_t>& which) {
        DatasetManifest m;
        m.metadata = manifest.metadata;
        m.base_dir = manifest.base_dir;
        for (const std::size_t i : which) m.entries.push_back(manifest.entries[i]);
        return m;
    };
    return {subset(idx.train), subset(idx.val), subset(idx.test)};
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const char ch : bytes) {
        h ^= static_cast<unsigned char>(ch);
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace accdor
