#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "affectgan/image.hpp"
#include "affectgan/manifest.hpp"
#include "affectgan/wav.hpp"

namespace affectgan {

struct SynthConfig {
    int n_subjects = 10;
    int clips_per_subject = 1;
    int frames_per_clip = 80;
    int image_size = 64;
    double fps = 25.0;
    int audio_rate = 16000;
    std::uint64_t seed = 1;
    int val_subject_every = 5;  // subject i tagged "val" when (i+1) % val_subject_every == 0

    void validate() const;
};

// Parametric face geometry, scaled from a 64px reference. Ground truth is
// carried by three affine pixel mappings (mouth curvature <- valence,
// eye aperture and background flicker amplitude <- arousal) plus two affine
// audio mappings (fundamental <- valence, amplitude envelope <- arousal).
struct FaceLayout {
    explicit FaceLayout(int size);

    int size;
    double cx, cy;
    double face_rx, face_ry;
    double eye_dx, eye_y, eye_rx;
    double eye_aperture_mid, eye_aperture_gain;
    double mouth_y, mouth_half_width, mouth_depth, mouth_sigma;
};

// mouth center line: y(x) = mouth_y + kappa * (x - cx)^2; smiles bend the
// corners up (smaller y), so kappa is negative for positive valence
double mouth_curvature(const FaceLayout& g, double valence);
double valence_from_mouth_curvature(const FaceLayout& g, double kappa);

double eye_aperture(const FaceLayout& g, double arousal);
double flicker_amplitude(double arousal);
double tone_amplitude(double arousal);   // [0.1, 0.7]
double tone_frequency(double valence);   // [140, 300] Hz

struct SubjectStyle {
    double skin_r = 0.78, skin_g = 0.62, skin_b = 0.50;
};

struct ClipTexture {
    double wave_x = 0.35, wave_y = 0.23;
    double phase_x = 0.0, phase_y = 0.0;
    double flicker_phase = 0.0;
};

SubjectStyle subject_style(std::uint64_t seed, int subject_index);
ClipTexture clip_texture(std::uint64_t seed, int clip_index);

Image render_face_frame(const FaceLayout& g, const SubjectStyle& style, const ClipTexture& tex,
                        int frame_index, double fps, double valence, double arousal);

// Smooth seeded random walk in [-1, 1], one value per frame.
std::vector<double> label_walk(std::uint64_t seed, int n_frames);

AudioTrack synthesize_clip_audio(const std::vector<double>& valence,
                                 const std::vector<double>& arousal, double fps, int sample_rate,
                                 std::uint64_t seed);

// Writes the full dataset tree (PNG frames, WAV audio, label CSVs and the
// manifest) under out_root and returns the loaded manifest.
DatasetManifest generate_synthetic_dataset(const SynthConfig& config,
                                           const std::filesystem::path& out_root);

}  // namespace affectgan
