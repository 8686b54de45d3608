#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "affectgan/image.hpp"
#include "affectgan/metrics.hpp"
#include "affectgan/wav.hpp"

namespace affectgan {

struct ManifestError : std::runtime_error {
    std::string clip_id;
    ManifestError(std::string clip, const std::string& what)
        : std::runtime_error("clip \"" + clip + "\": " + what), clip_id(std::move(clip)) {}
};

struct ClipEntry {
    std::string clip_id;
    std::string subject_id;
    double fps = 25.0;
    int n_frames = 0;
    std::string frame_pattern;  // relative to the manifest root, printf-style %06d
    std::string audio_file;     // relative
    std::string label_file;     // relative
    std::string split;          // free-form tag, e.g. "train" / "val"

    bool operator==(const ClipEntry&) const = default;

    std::filesystem::path frame_path(const std::filesystem::path& root, int index) const;
};

struct DatasetManifest {
    std::filesystem::path root;  // directory holding the referenced files
    std::vector<ClipEntry> clips;

    std::vector<ClipEntry> clips_in_split(const std::string& split) const;
    std::vector<std::string> subjects_in_split(const std::string& split) const;
};

// JSON manifest round trip. Loading verifies ids are unique and that every
// referenced file exists; failures name the offending clip.
void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& file);
DatasetManifest load_manifest(const std::filesystem::path& file);

// Fully loaded clip: frames, audio and per-frame labels.
struct ClipRecord {
    std::string clip_id;
    std::string subject_id;
    double fps = 25.0;
    std::vector<Image> frames;
    AudioTrack audio;
    std::vector<AffectEstimate> labels;
};

ClipRecord load_clip(const DatasetManifest& manifest, const ClipEntry& entry);

void write_labels_csv(const std::vector<AffectEstimate>& labels,
                      const std::filesystem::path& file);
std::vector<AffectEstimate> read_labels_csv(const std::filesystem::path& file);

}  // namespace affectgan
