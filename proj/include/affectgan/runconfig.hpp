#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "affectgan/models.hpp"
#include "affectgan/noise.hpp"
#include "affectgan/train.hpp"

namespace affectgan {

struct DataConfig {
    std::string manifest;  // resolved relative to the config file
    std::string train_split = "train";
    std::string val_split = "val";
    NoiseSpec noise;

    bool operator==(const DataConfig&) const = default;
};

struct ModelConfig {
    int image_size = 64;
    std::vector<int> aeg_channels = {32, 64, 64};
    std::vector<int> cd_trunk_channels = {64, 128, 128};
    std::vector<int> cd_head_channels = {256};
    bool append_noisy = false;

    AegSpec aeg_spec() const;
    CdSpec cd_spec() const;  // latent/lld widths are finalized by the trainer

    bool operator==(const ModelConfig&) const = default;
};

struct EvalConfig {
    std::string split = "val";
    int batch_size = 32;

    bool operator==(const EvalConfig&) const = default;
};

// Sections [data] [model] [train] [eval]; '#' comments; unknown keys are
// rejected. Relative paths are resolved against the config file's directory.
struct RunConfig {
    DataConfig data;
    ModelConfig model;
    TrainConfig train;
    EvalConfig eval;

    bool operator==(const RunConfig&) const = default;
};

RunConfig parse_run_config_text(const std::string& text,
                                const std::filesystem::path& base_dir);
RunConfig parse_run_config(const std::filesystem::path& file);
std::string dump_run_config(const RunConfig& config);

}  // namespace affectgan
