#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "affectgan/models.hpp"

namespace affectgan {

// Single-file archive: a JSON header with the mode label, model specs and a
// free-form metadata object, followed by the named parameter tensors as
// little-endian doubles. Loading rebuilds the models from the stored specs
// and verifies every tensor matches its expected shape.
void save_checkpoint(const std::filesystem::path& file, const std::string& mode_label,
                     Aeg* aeg, Cd& cd, const std::string& extra_json = "{}");

struct LoadedCheckpoint {
    std::string mode_label;
    std::string extra_json;
    std::unique_ptr<Aeg> aeg;  // null for checkpoints trained without a generator
    std::unique_ptr<Cd> cd;
};

LoadedCheckpoint load_checkpoint(const std::filesystem::path& file);

// checksum over all parameter values (AEG then CD when both are present)
std::uint64_t checkpoint_checksum(const std::filesystem::path& file);

}  // namespace affectgan
