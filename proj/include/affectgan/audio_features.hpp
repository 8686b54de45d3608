#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "affectgan/wav.hpp"

namespace affectgan {

// Audio samples for one video frame, enlarged with the previous and future
// video frame so consecutive audio frames overlap. Boundary frames are
// clamped to the clip, never padded.
struct AudioFrame {
    std::vector<double> samples;
    int center_video_frame = 0;
    std::int64_t start_sample = 0;
    std::int64_t end_sample = 0;  // exclusive
};

// Sample index of the video-frame boundary k at the given rate.
std::int64_t video_frame_boundary(int k, int sample_rate, double fps);

std::vector<AudioFrame> build_audio_frames(const AudioTrack& track, double fps,
                                           int n_video_frames);

// Row-major (n_windows x n_descriptors) low-level descriptor matrix.
struct LldMatrix {
    int n_windows = 0;
    int n_descriptors = 0;
    std::vector<double> values;

    double at(int w, int d) const {
        return values[static_cast<std::size_t>(w) * n_descriptors + d];
    }
};

// Fallback descriptor set, one row per 60 ms window at a 10 ms hop:
// log energy, RMS, zero-crossing rate, spectral centroid, 85% roll-off,
// autocorrelation F0 in [60,400] Hz (0 when the peak ratio is below 0.3).
inline constexpr int kFallbackDescriptors = 6;
inline constexpr double kLldWindowSeconds = 0.060;
inline constexpr double kLldHopSeconds = 0.010;
inline constexpr double kSilentLogEnergy = -1e2;

LldMatrix extract_llds(const AudioFrame& frame, int sample_rate,
                       double window_s = kLldWindowSeconds, double hop_s = kLldHopSeconds);

// Fixed-length per-video-frame descriptor: the first two windows
// concatenated, which keeps the dimensionality independent of sample rate.
struct LldVector {
    std::vector<double> values;
    int descriptors_per_window = 0;

    int length() const { return static_cast<int>(values.size()); }
};

LldVector select_first_two(const LldMatrix& llds);

// Full fallback chain for one clip: one LldVector per video frame.
std::vector<LldVector> fallback_clip_llds(const AudioTrack& track, double fps,
                                          int n_video_frames);

// Reads a precomputed LLD CSV (header row; column 0 a timestamp in seconds;
// ';' or ',' delimited) and groups windows onto video frames by the same
// spans build_audio_frames uses, taking the first two windows of each frame.
std::vector<LldVector> ingest_precomputed(const std::filesystem::path& csv_file, double fps,
                                          int n_video_frames);

// Per-clip LLD file: header "frame,d0,...", one fixed-length vector per
// video frame. This is what `features` emits and what the batch pipeline
// picks up in preference to the fallback extractor.
void write_lld_csv(const std::vector<LldVector>& vectors, const std::filesystem::path& file);
std::vector<LldVector> read_lld_csv(const std::filesystem::path& file);

}  // namespace affectgan
