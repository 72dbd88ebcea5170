#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "gridfit/partition.hpp"

namespace gridfit::cli {

/// Versioned on-disk document for fitted partitioned models. Serialization is
/// canonical (sorted keys, shortest round-trip decimals), so load -> save
/// reproduces the file byte for byte.
struct ModelStore {
    static constexpr int kSchemaVersion = 1;

    PartitionedModel model;
    std::string config_hash;
    std::int64_t created_unix_s = 0;

    void save(const std::filesystem::path& path) const;
    static ModelStore load(const std::filesystem::path& path);
};

}  // namespace gridfit::cli
