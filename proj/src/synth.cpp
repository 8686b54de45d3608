#include "affectgan/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "affectgan/rng.hpp"

namespace affectgan {

namespace {

constexpr std::uint64_t kStyleTag = 0x5354594cULL;    // per-subject style stream
constexpr std::uint64_t kTextureTag = 0x54455854ULL;  // per-clip texture stream
constexpr std::uint64_t kLabelTag = 0x4c41424cULL;
constexpr std::uint64_t kAudioTag = 0x41554449ULL;

double smoothstep(double x) {
    x = std::clamp(x, 0.0, 1.0);
    return x * x * (3.0 - 2.0 * x);
}

void blend(Image& img, int y, int x, double alpha, double r, double g, double b) {
    if (alpha <= 0.0) return;
    img.at(0, y, x) = (1.0 - alpha) * img.at(0, y, x) + alpha * r;
    img.at(1, y, x) = (1.0 - alpha) * img.at(1, y, x) + alpha * g;
    img.at(2, y, x) = (1.0 - alpha) * img.at(2, y, x) + alpha * b;
}

}  // namespace

void SynthConfig::validate() const {
    if (n_subjects < 1 || clips_per_subject < 1 || frames_per_clip < 1)
        throw std::invalid_argument("synth config: counts must be >= 1");
    if (image_size < 16) throw std::invalid_argument("synth config: image_size must be >= 16");
    if (fps <= 0.0 || audio_rate <= 0) throw std::invalid_argument("synth config: bad rates");
}

FaceLayout::FaceLayout(int s) : size(s) {
    const double f = static_cast<double>(s);
    cx = 0.5 * f;
    cy = 0.5 * f;
    face_rx = 0.34 * f;
    face_ry = 0.42 * f;
    eye_dx = 0.14 * f;
    eye_y = cy - 0.11 * f;
    eye_rx = 0.08 * f;
    eye_aperture_mid = 0.038 * f;
    eye_aperture_gain = 0.024 * f;
    mouth_y = cy + 0.16 * f;
    mouth_half_width = 0.16 * f;
    mouth_depth = 0.075 * f;
    mouth_sigma = 0.022 * f;
}

double mouth_curvature(const FaceLayout& g, double valence) {
    return -valence * g.mouth_depth / (g.mouth_half_width * g.mouth_half_width);
}

double valence_from_mouth_curvature(const FaceLayout& g, double kappa) {
    return -kappa * g.mouth_half_width * g.mouth_half_width / g.mouth_depth;
}

double eye_aperture(const FaceLayout& g, double arousal) {
    return g.eye_aperture_mid + g.eye_aperture_gain * arousal;
}

double flicker_amplitude(double arousal) { return 0.10 + 0.06 * arousal; }

double tone_amplitude(double arousal) { return 0.4 + 0.3 * arousal; }

double tone_frequency(double valence) { return 220.0 + 80.0 * valence; }

SubjectStyle subject_style(std::uint64_t seed, int subject_index) {
    Rng rng(mix_seed(mix_seed(seed, kStyleTag), static_cast<std::uint64_t>(subject_index)));
    SubjectStyle s;
    s.skin_r = 0.78 + rng.uniform(-0.05, 0.05);
    s.skin_g = 0.62 + rng.uniform(-0.04, 0.04);
    s.skin_b = 0.50 + rng.uniform(-0.05, 0.05);
    return s;
}

ClipTexture clip_texture(std::uint64_t seed, int clip_index) {
    Rng rng(mix_seed(mix_seed(seed, kTextureTag), static_cast<std::uint64_t>(clip_index)));
    ClipTexture t;
    t.wave_x = rng.uniform(0.2, 0.5);
    t.wave_y = rng.uniform(0.2, 0.5);
    t.phase_x = rng.uniform(0.0, 2.0 * std::numbers::pi);
    t.phase_y = rng.uniform(0.0, 2.0 * std::numbers::pi);
    t.flicker_phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    return t;
}

Image render_face_frame(const FaceLayout& g, const SubjectStyle& style, const ClipTexture& tex,
                        int frame_index, double fps, double valence, double arousal) {
    Image img(g.size, g.size);
    const double t_sec = static_cast<double>(frame_index) / fps;
    const double flick =
        flicker_amplitude(arousal) * std::sin(2.0 * std::numbers::pi * 1.3 * t_sec +
                                              tex.flicker_phase);

    for (int y = 0; y < g.size; ++y)
        for (int x = 0; x < g.size; ++x) {
            const double texture = 0.5 + 0.5 * std::sin(tex.wave_x * x + tex.phase_x) *
                                             std::sin(tex.wave_y * y + tex.phase_y);
            const double base = std::clamp(0.30 + 0.18 * texture + flick, 0.0, 1.0);
            img.at(0, y, x) = base;
            img.at(1, y, x) = base * 0.95;
            img.at(2, y, x) = base * 1.05 > 1.0 ? 1.0 : base * 1.05;
        }

    // head
    for (int y = 0; y < g.size; ++y)
        for (int x = 0; x < g.size; ++x) {
            const double ex = (x - g.cx) / g.face_rx;
            const double ey = (y - g.cy) / g.face_ry;
            const double alpha = smoothstep((1.0 - (ex * ex + ey * ey)) / 0.08);
            blend(img, y, x, alpha, style.skin_r, style.skin_g, style.skin_b);
        }

    // eyes; aperture (half-height) is affine in arousal
    const double aperture = eye_aperture(g, arousal);
    for (int side = -1; side <= 1; side += 2) {
        const double ecx = g.cx + side * g.eye_dx;
        const int x0 = std::max(0, static_cast<int>(ecx - g.eye_rx - 2));
        const int x1 = std::min(g.size - 1, static_cast<int>(ecx + g.eye_rx + 2));
        const int y0 = std::max(0, static_cast<int>(g.eye_y - aperture - 2));
        const int y1 = std::min(g.size - 1, static_cast<int>(g.eye_y + aperture + 2));
        for (int y = y0; y <= y1; ++y)
            for (int x = x0; x <= x1; ++x) {
                const double ex = (x - ecx) / g.eye_rx;
                const double ey = (y - g.eye_y) / aperture;
                const double alpha = smoothstep((1.0 - (ex * ex + ey * ey)) / 0.25);
                blend(img, y, x, alpha, 0.10, 0.08, 0.08);
            }
    }

    // mouth arc with a Gaussian cross-section; curvature is affine in valence
    const double kappa = mouth_curvature(g, valence);
    const int mx0 = std::max(0, static_cast<int>(g.cx - g.mouth_half_width));
    const int mx1 = std::min(g.size - 1, static_cast<int>(g.cx + g.mouth_half_width));
    const int band = static_cast<int>(g.mouth_depth + 4.0 * g.mouth_sigma) + 1;
    for (int x = mx0; x <= mx1; ++x) {
        const double dx = x - g.cx;
        const double yc = g.mouth_y + kappa * dx * dx;
        const int y0 = std::max(0, static_cast<int>(yc) - band);
        const int y1 = std::min(g.size - 1, static_cast<int>(yc) + band);
        for (int y = y0; y <= y1; ++y) {
            const double d = y - yc;
            const double alpha = std::exp(-0.5 * d * d / (g.mouth_sigma * g.mouth_sigma));
            blend(img, y, x, alpha, 0.45, 0.08, 0.10);
        }
    }
    return img;
}

std::vector<double> label_walk(std::uint64_t seed, int n_frames) {
    Rng rng(seed);
    std::vector<double> walk(static_cast<std::size_t>(n_frames));
    double v = rng.uniform(-0.6, 0.6);
    for (int i = 0; i < n_frames; ++i) {
        walk[static_cast<std::size_t>(i)] = v;
        v += rng.normal(0.0, 0.16);
        // reflect at the rails so the walk stays in range without sticking
        if (v > 0.98) v = 1.96 - v;
        if (v < -0.98) v = -1.96 - v;
    }
    // two light smoothing passes
    for (int pass = 0; pass < 2; ++pass) {
        std::vector<double> s(walk);
        for (int i = 1; i + 1 < n_frames; ++i)
            s[static_cast<std::size_t>(i)] = 0.25 * walk[static_cast<std::size_t>(i) - 1] +
                                             0.5 * walk[static_cast<std::size_t>(i)] +
                                             0.25 * walk[static_cast<std::size_t>(i) + 1];
        walk = std::move(s);
    }
    for (double& x : walk) x = std::clamp(x, -1.0, 1.0);
    return walk;
}

AudioTrack synthesize_clip_audio(const std::vector<double>& valence,
                                 const std::vector<double>& arousal, double fps, int sample_rate,
                                 std::uint64_t seed) {
    if (valence.size() != arousal.size() || valence.empty())
        throw std::invalid_argument("synthesize_clip_audio: bad label vectors");
    Rng rng(seed);
    const int n_frames = static_cast<int>(valence.size());
    AudioTrack track;
    track.sample_rate = sample_rate;
    const auto n_samples = static_cast<std::size_t>(
        std::llround(static_cast<double>(n_frames) / fps * sample_rate));
    track.samples.resize(n_samples);

    auto lerp_label = [&](const std::vector<double>& lab, double t_sec) {
        const double p = t_sec * fps - 0.5;
        const int i0 = std::clamp(static_cast<int>(std::floor(p)), 0, n_frames - 1);
        const int i1 = std::min(i0 + 1, n_frames - 1);
        const double frac = std::clamp(p - i0, 0.0, 1.0);
        return (1.0 - frac) * lab[static_cast<std::size_t>(i0)] +
               frac * lab[static_cast<std::size_t>(i1)];
    };

    double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    for (std::size_t i = 0; i < n_samples; ++i) {
        const double t = static_cast<double>(i) / sample_rate;
        const double f = tone_frequency(lerp_label(valence, t));
        const double amp = tone_amplitude(lerp_label(arousal, t));
        phase += 2.0 * std::numbers::pi * f / sample_rate;
        track.samples[i] = amp * std::sin(phase);
    }
    return track;
}

DatasetManifest generate_synthetic_dataset(const SynthConfig& config,
                                           const std::filesystem::path& out_root) {
    config.validate();
    std::filesystem::create_directories(out_root / "clips");

    DatasetManifest manifest;
    manifest.root = out_root;
    const FaceLayout layout(config.image_size);

    int clip_index = 0;
    for (int s = 0; s < config.n_subjects; ++s) {
        const SubjectStyle style = subject_style(config.seed, s);
        char subject_id[32];
        std::snprintf(subject_id, sizeof(subject_id), "s%02d", s);
        const bool is_val =
            config.val_subject_every > 0 && (s + 1) % config.val_subject_every == 0;
        for (int c = 0; c < config.clips_per_subject; ++c, ++clip_index) {
            char clip_id[48];
            std::snprintf(clip_id, sizeof(clip_id), "%s_c%02d", subject_id, c);
            const auto clip_dir = out_root / "clips" / clip_id;
            std::filesystem::create_directories(clip_dir);

            const ClipTexture tex = clip_texture(config.seed, clip_index);
            const auto valence = label_walk(
                mix_seed(mix_seed(config.seed, kLabelTag), 2 * clip_index), config.frames_per_clip);
            const auto arousal =
                label_walk(mix_seed(mix_seed(config.seed, kLabelTag), 2 * clip_index + 1),
                           config.frames_per_clip);

            std::vector<AffectEstimate> labels(static_cast<std::size_t>(config.frames_per_clip));
            for (int i = 0; i < config.frames_per_clip; ++i) {
                labels[static_cast<std::size_t>(i)] = {valence[static_cast<std::size_t>(i)],
                                                       arousal[static_cast<std::size_t>(i)]};
                const Image frame = render_face_frame(layout, style, tex, i, config.fps,
                                                      valence[static_cast<std::size_t>(i)],
                                                      arousal[static_cast<std::size_t>(i)]);
                char name[32];
                std::snprintf(name, sizeof(name), "frame_%06d.png", i);
                write_png(frame, clip_dir / name);
            }
            write_labels_csv(labels, clip_dir / "labels.csv");
            const AudioTrack audio = synthesize_clip_audio(
                valence, arousal, config.fps, config.audio_rate,
                mix_seed(mix_seed(config.seed, kAudioTag), clip_index));
            write_wav(audio, clip_dir / "audio.wav");

            ClipEntry entry;
            entry.clip_id = clip_id;
            entry.subject_id = subject_id;
            entry.fps = config.fps;
            entry.n_frames = config.frames_per_clip;
            entry.frame_pattern = std::string("clips/") + clip_id + "/frame_%06d.png";
            entry.audio_file = std::string("clips/") + clip_id + "/audio.wav";
            entry.label_file = std::string("clips/") + clip_id + "/labels.csv";
            entry.split = is_val ? "val" : "train";
            manifest.clips.push_back(std::move(entry));
        }
    }
    save_manifest(manifest, out_root / "manifest.json");
    return manifest;
}

}  // namespace affectgan
