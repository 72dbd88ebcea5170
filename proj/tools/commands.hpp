#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "config.hpp"

namespace gridfit::cli {

struct CommonOptions {
    std::filesystem::path config_path;
    std::optional<std::filesystem::path> out_dir;
    std::optional<std::uint64_t> seed;
};

int cmd_probe(const CommonOptions& opts, int partitions /* <=0: use n_max */);
int cmd_fit(const CommonOptions& opts, const std::string& u_csv, const std::string& y_csv,
            int partitions);
int cmd_validate(const CommonOptions& opts, const std::filesystem::path& model_path,
                 const std::string& scenario);
int cmd_simulate(const CommonOptions& opts, const std::string& mode, const std::string& binding,
                 const std::filesystem::path& model_path);
int cmd_sweep(const CommonOptions& opts);
int cmd_bench(const CommonOptions& opts, const std::filesystem::path& model_path, int repeats);

}  // namespace gridfit::cli
