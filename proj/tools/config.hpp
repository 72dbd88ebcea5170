#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "gridfit/feeder.hpp"
#include "gridfit/partition.hpp"
#include "gridfit/plant.hpp"

namespace gridfit::cli {

/// One document drives a full experiment: plant parameters, probing/search
/// settings and (optionally) the feeder case with its profile files. Relative
/// paths are resolved against the config file's directory; referenced files
/// must exist at load time.
struct RunConfig {
    PlantParams plant;
    SearchConfig search;
    std::optional<FeederCase> feeder;
    std::filesystem::path output_dir = "out";
    std::uint64_t seed = 0;

    /// FNV-1a of the canonical config text, for model provenance.
    std::string config_hash;
};

RunConfig load_run_config(const std::filesystem::path& path);

std::string fnv1a_hex(const std::string& text);

}  // namespace gridfit::cli
