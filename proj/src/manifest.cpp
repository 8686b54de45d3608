#include "affectgan/manifest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "json.hpp"

namespace affectgan {

std::filesystem::path ClipEntry::frame_path(const std::filesystem::path& root, int index) const {
    char buf[512];
    std::snprintf(buf, sizeof(buf), frame_pattern.c_str(), index);
    return root / buf;
}

std::vector<ClipEntry> DatasetManifest::clips_in_split(const std::string& split) const {
    std::vector<ClipEntry> out;
    for (const auto& c : clips)
        if (c.split == split) out.push_back(c);
    return out;
}

std::vector<std::string> DatasetManifest::subjects_in_split(const std::string& split) const {
    std::set<std::string> s;
    for (const auto& c : clips)
        if (c.split == split) s.insert(c.subject_id);
    return {s.begin(), s.end()};
}

void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& file) {
    nlohmann::json j;
    j["version"] = 1;
    nlohmann::json clips = nlohmann::json::array();
    for (const auto& c : manifest.clips) {
        nlohmann::json e;
        e["id"] = c.clip_id;
        e["subject"] = c.subject_id;
        e["fps"] = c.fps;
        e["n_frames"] = c.n_frames;
        e["frames"] = c.frame_pattern;
        e["audio"] = c.audio_file;
        e["labels"] = c.label_file;
        e["split"] = c.split;
        clips.push_back(e);
    }
    j["clips"] = clips;
    std::ofstream f(file);
    if (!f) throw std::runtime_error("cannot write manifest: " + file.string());
    f << j.dump(2) << "\n";
}

DatasetManifest load_manifest(const std::filesystem::path& file) {
    std::ifstream f(file);
    if (!f) throw std::runtime_error("cannot read manifest: " + file.string());
    nlohmann::json j;
    try {
        f >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("malformed manifest JSON " + file.string() + ": " + e.what());
    }

    DatasetManifest m;
    m.root = file.has_parent_path() ? file.parent_path() : std::filesystem::path(".");
    std::set<std::string> ids;
    for (const auto& e : j.at("clips")) {
        ClipEntry c;
        try {
            c.clip_id = e.at("id").get<std::string>();
            c.subject_id = e.at("subject").get<std::string>();
            c.fps = e.at("fps").get<double>();
            c.n_frames = e.at("n_frames").get<int>();
            c.frame_pattern = e.at("frames").get<std::string>();
            c.audio_file = e.at("audio").get<std::string>();
            c.label_file = e.at("labels").get<std::string>();
            c.split = e.value("split", std::string{});
        } catch (const nlohmann::json::exception& ex) {
            throw ManifestError(e.value("id", std::string("<missing id>")),
                                std::string("malformed entry: ") + ex.what());
        }
        if (!ids.insert(c.clip_id).second)
            throw ManifestError(c.clip_id, "duplicate clip id");
        if (c.fps <= 0.0) throw ManifestError(c.clip_id, "fps must be > 0");
        if (c.n_frames < 1) throw ManifestError(c.clip_id, "n_frames must be >= 1");
        for (int i = 0; i < c.n_frames; ++i) {
            const auto p = c.frame_path(m.root, i);
            if (!std::filesystem::exists(p))
                throw ManifestError(c.clip_id, "missing frame file " + p.string());
        }
        if (!std::filesystem::exists(m.root / c.audio_file))
            throw ManifestError(c.clip_id, "missing audio file " + c.audio_file);
        if (!std::filesystem::exists(m.root / c.label_file))
            throw ManifestError(c.clip_id, "missing label file " + c.label_file);
        m.clips.push_back(std::move(c));
    }
    return m;
}

void write_labels_csv(const std::vector<AffectEstimate>& labels,
                      const std::filesystem::path& file) {
    std::ofstream f(file);
    if (!f) throw std::runtime_error("cannot write labels: " + file.string());
    f << "frame,valence,arousal\n";
    char buf[96];
    for (std::size_t i = 0; i < labels.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%zu,%.6f,%.6f\n", i, labels[i].valence,
                      labels[i].arousal);
        f << buf;
    }
}

std::vector<AffectEstimate> read_labels_csv(const std::filesystem::path& file) {
    std::ifstream f(file);
    if (!f) throw std::runtime_error("cannot read labels: " + file.string());
    std::string line;
    if (!std::getline(f, line) || line.rfind("frame,valence,arousal", 0) != 0)
        throw std::runtime_error("bad label CSV header in " + file.string());
    std::vector<AffectEstimate> labels;
    int row = 1;
    while (std::getline(f, line)) {
        ++row;
        if (line.empty()) continue;
        double frame = 0, v = 0, a = 0;
        if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &frame, &v, &a) != 3)
            throw std::runtime_error("bad label row " + std::to_string(row) + " in " +
                                     file.string());
        labels.push_back({v, a});
    }
    return labels;
}

ClipRecord load_clip(const DatasetManifest& manifest, const ClipEntry& entry) {
    ClipRecord rec;
    rec.clip_id = entry.clip_id;
    rec.subject_id = entry.subject_id;
    rec.fps = entry.fps;
    rec.frames.reserve(static_cast<std::size_t>(entry.n_frames));
    for (int i = 0; i < entry.n_frames; ++i)
        rec.frames.push_back(read_png(entry.frame_path(manifest.root, i)));
    rec.audio = read_wav(manifest.root / entry.audio_file);
    rec.labels = read_labels_csv(manifest.root / entry.label_file);
    if (rec.labels.size() != rec.frames.size())
        throw ManifestError(entry.clip_id,
                            "label count " + std::to_string(rec.labels.size()) +
                                " does not match frame count " + std::to_string(rec.frames.size()));
    for (const auto& l : rec.labels)
        if (!(std::abs(l.valence) <= 1.0 + 1e-9) || !(std::abs(l.arousal) <= 1.0 + 1e-9))
            throw ManifestError(entry.clip_id, "label outside [-1,1]");
    return rec;
}

}  // namespace affectgan
