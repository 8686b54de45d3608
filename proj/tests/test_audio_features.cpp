#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "affectgan/audio_features.hpp"
#include "affectgan/rng.hpp"
#include "doctest.h"

using namespace affectgan;
namespace fs = std::filesystem;

namespace {

AudioTrack sine_track(double freq, double seconds, int rate, double amp = 0.5) {
    AudioTrack t;
    t.sample_rate = rate;
    const auto n = static_cast<std::size_t>(std::llround(seconds * rate));
    t.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        t.samples[i] = amp * std::sin(2.0 * std::numbers::pi * freq * i / rate);
    return t;
}

}  // namespace

TEST_CASE("audio frame spans") {
    SUBCASE("interior frame covers previous/current/next video frame") {
        const AudioTrack t = sine_track(220.0, 1.0, 16000);
        const auto frames = build_audio_frames(t, 25.0, 25);
        REQUIRE(frames.size() == 25);
        // fps 25 at 16 kHz: 640 samples per video frame
        CHECK(frames[5].start_sample == 4 * 640);
        CHECK(frames[5].end_sample == 7 * 640);
        CHECK(frames[5].samples.size() == 1920);  // 0.12 s
    }
    SUBCASE("first frame clamps to two periods starting at zero") {
        const AudioTrack t = sine_track(220.0, 1.0, 16000);
        const auto frames = build_audio_frames(t, 25.0, 25);
        CHECK(frames[0].start_sample == 0);
        CHECK(frames[0].end_sample == 2 * 640);
        CHECK(frames[24].end_sample == 25 * 640);  // clamped to the clip
    }
    SUBCASE("count equals video frame count across fps and rates") {
        for (double fps : {24.0, 25.0, 30.0})
            for (int rate : {8000, 16000, 44100}) {
                const int n = static_cast<int>(std::lround(10.0 * fps));
                const AudioTrack t = sine_track(180.0, 10.0, rate);
                const auto frames = build_audio_frames(t, fps, n);
                CHECK(frames.size() == static_cast<std::size_t>(n));
                for (int k = 1; k + 1 < n; ++k) {
                    const auto& f = frames[static_cast<std::size_t>(k)];
                    CHECK(f.start_sample == video_frame_boundary(k - 1, rate, fps));
                    CHECK(f.end_sample == video_frame_boundary(k + 2, rate, fps));
                    // exactly three video periods up to sample quantization
                    const double span_s =
                        static_cast<double>(f.end_sample - f.start_sample) / rate;
                    CHECK(std::abs(span_s - 3.0 / fps) <= 1.5 / rate);
                    // consecutive frames overlap by two video periods
                    const auto& g = frames[static_cast<std::size_t>(k) + 1];
                    CHECK(g.start_sample == video_frame_boundary(k, rate, fps));
                    CHECK(g.start_sample < f.end_sample);
                }
            }
    }
    SUBCASE("track shorter than one video frame is rejected") {
        AudioTrack t;
        t.sample_rate = 16000;
        t.samples.assign(100, 0.0);
        CHECK_THROWS_AS(build_audio_frames(t, 25.0, 5), std::invalid_argument);
    }
}

TEST_CASE("lld extraction") {
    SUBCASE("0.12 s frame yields 7 windows of 6 descriptors") {
        const AudioTrack t = sine_track(220.0, 1.0, 16000);
        const auto frames = build_audio_frames(t, 25.0, 25);
        const LldMatrix m = extract_llds(frames[5], 16000);
        CHECK(m.n_windows == 7);  // floor((0.12 - 0.06) / 0.01) + 1
        CHECK(m.n_descriptors == kFallbackDescriptors);
    }
    SUBCASE("silent window conventions") {
        AudioFrame f;
        f.samples.assign(1920, 0.0);
        const LldMatrix m = extract_llds(f, 16000);
        CHECK(m.at(0, 0) == kSilentLogEnergy);
        CHECK(m.at(0, 1) == 0.0);  // RMS
        CHECK(m.at(0, 2) == 0.0);  // ZCR
        CHECK(m.at(0, 3) == 0.0);  // centroid
        CHECK(m.at(0, 5) == 0.0);  // F0
    }
    SUBCASE("pure 220 Hz tone F0 within 5 Hz") {
        const AudioTrack t = sine_track(220.0, 0.5, 16000);
        AudioFrame f;
        f.samples = t.samples;
        const LldMatrix m = extract_llds(f, 16000);
        for (int w = 0; w < m.n_windows; ++w)
            CHECK(std::abs(m.at(w, 5) - 220.0) < 5.0);
    }
    SUBCASE("frame shorter than one window is rejected") {
        AudioFrame f;
        f.samples.assign(500, 0.1);
        CHECK_THROWS_AS(extract_llds(f, 16000), std::invalid_argument);
    }
}

TEST_CASE("select_first_two") {
    const AudioTrack t = sine_track(200.0, 1.0, 16000);
    const auto frames = build_audio_frames(t, 25.0, 25);
    const LldMatrix m = extract_llds(frames[4], 16000);
    const LldVector v = select_first_two(m);
    CHECK(v.length() == 2 * kFallbackDescriptors);
    CHECK(v.descriptors_per_window == kFallbackDescriptors);
    for (int d = 0; d < m.n_descriptors; ++d) {
        CHECK(v.values[static_cast<std::size_t>(d)] == m.at(0, d));
        CHECK(v.values[static_cast<std::size_t>(d + m.n_descriptors)] == m.at(1, d));
    }
    LldMatrix one;
    one.n_windows = 1;
    one.n_descriptors = 6;
    one.values.assign(6, 0.0);
    CHECK_THROWS_AS(select_first_two(one), std::invalid_argument);
}

TEST_CASE("lld vector length is rate independent") {
    for (double fps : {24.0, 25.0}) {
        std::vector<int> lengths;
        for (int rate : {8000, 16000, 44100}) {
            const int n = static_cast<int>(std::lround(2.0 * fps));
            const AudioTrack t = sine_track(180.0, 2.0, rate);
            const auto llds = fallback_clip_llds(t, fps, n);
            CHECK(llds.size() == static_cast<std::size_t>(n));
            for (const auto& v : llds) lengths.push_back(v.length());
        }
        for (int l : lengths) CHECK(l == lengths.front());
    }
}

TEST_CASE("ingest_precomputed") {
    const fs::path dir = fs::temp_directory_path() / "affectgan_test_llds";
    fs::create_directories(dir);
    const int d = 23;
    const double fps = 25.0;
    const int n_frames = 25;

    auto write_fixture = [&](const fs::path& file, char delim, bool poison = false) {
        std::ofstream f(file);
        f << "timestamp";
        for (int j = 0; j < d; ++j) f << delim << "lld" << j;
        f << "\n";
        Rng rng(13);
        for (int w = 0; w < 100; ++w) {  // 10 ms hop over a 1 s clip
            f << (0.01 * w);
            for (int j = 0; j < d; ++j) {
                if (poison && w == 50 && j == 3)
                    f << delim << "oops";
                else
                    f << delim << rng.uniform(-1.0, 1.0);
            }
            f << "\n";
        }
    };

    SUBCASE("semicolon delimited, D inferred from header") {
        write_fixture(dir / "a.csv", ';');
        const auto vecs = ingest_precomputed(dir / "a.csv", fps, n_frames);
        REQUIRE(vecs.size() == static_cast<std::size_t>(n_frames));
        for (const auto& v : vecs) {
            CHECK(v.length() == 2 * d);
            CHECK(v.descriptors_per_window == d);
        }
    }
    SUBCASE("comma delimited matches frame spans of build_audio_frames") {
        write_fixture(dir / "b.csv", ',');
        const auto vecs = ingest_precomputed(dir / "b.csv", fps, n_frames);
        const AudioTrack t = sine_track(200.0, 1.0, 16000);
        const auto frames = build_audio_frames(t, fps, n_frames);
        // the first ingested window of frame k must start inside frame k's span
        for (int k = 0; k < n_frames; ++k) {
            const double t0 = static_cast<double>(frames[static_cast<std::size_t>(k)].start_sample) / 16000.0;
            const double t1 = static_cast<double>(frames[static_cast<std::size_t>(k)].end_sample) / 16000.0;
            // reconstruct the timestamp of the first selected window: it is the
            // first 10 ms grid point at or after t0
            const double first_ts = std::ceil(t0 / 0.01 - 1e-9) * 0.01;
            CHECK(first_ts >= t0 - 1e-9);
            CHECK(first_ts < t1);
        }
        CHECK(vecs.size() == static_cast<std::size_t>(n_frames));
    }
    SUBCASE("non-numeric cell names the row") {
        write_fixture(dir / "bad.csv", ';', true);
        try {
            ingest_precomputed(dir / "bad.csv", fps, n_frames);
            FAIL("expected error");
        } catch (const std::runtime_error& e) {
            CHECK(std::string(e.what()).find("row 52") != std::string::npos);
        }
    }
    SUBCASE("too few windows for a frame names the frame") {
        std::ofstream f(dir / "short.csv");
        f << "timestamp;x\n0.0;1.0\n0.01;2.0\n";
        f.close();
        try {
            ingest_precomputed(dir / "short.csv", fps, n_frames);
            FAIL("expected error");
        } catch (const std::runtime_error& e) {
            CHECK(std::string(e.what()).find("video frame") != std::string::npos);
        }
    }
}
