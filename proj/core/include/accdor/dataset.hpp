#pragma once

#include "accdor/imaging.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace accdor {

struct ManifestEntry {
    std::string id;
    std::filesystem::path image;        // relative paths resolve against the manifest directory
    std::filesystem::path chamber_mask; // may be empty when no mask annotation exists
    std::vector<Point> cells;
};

/// {"version": 1, "entries": [{"image", "chamber_mask", "cells": [[row, col], ...]}], "metadata": {...}}
struct DatasetManifest {
    std::vector<ManifestEntry> entries;
    nlohmann::json metadata = nlohmann::json::object();
    std::filesystem::path base_dir; // directory the relative paths resolve against

    std::filesystem::path resolve(const std::filesystem::path& p) const {
        return p.is_absolute() || p.empty() ? p : base_dir / p;
    }
};

inline constexpr int kManifestVersion = 1;

DatasetManifest load_manifest(const std::filesystem::path& path);
void save_manifest(const std::filesystem::path& path, const DatasetManifest& manifest);

nlohmann::json manifest_to_json(const DatasetManifest& manifest);
DatasetManifest manifest_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);

/// Train/validation/test ratios and the number of repeated random splits.
struct SplitSpec {
    double train = 0.40;
    double val = 0.10;
    double test = 0.50;
    int repeats = 10;
    std::uint64_t seed = 0;

    void validate() const;
};

struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> val;
    std::vector<std::size_t> test;
};

struct DatasetSplit {
    DatasetManifest train;
    DatasetManifest val;
    DatasetManifest test;
};

/// Seeded shuffle keyed by (spec.seed, repeat_index), then floor(ratio * n)
/// for train and validation; the remainder goes to test.
SplitIndices split_indices(std::size_t count, const SplitSpec& spec, int repeat_index);
DatasetSplit split(const DatasetManifest& manifest, const SplitSpec& spec, int repeat_index);

/// FNV-1a over the bytes; used to fingerprint generator configs.
std::uint64_t fnv1a64(std::string_view bytes);

} // namespace accdor
