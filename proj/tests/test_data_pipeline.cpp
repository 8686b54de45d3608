#include <cstdint>
#include <filesystem>
#include <fstream>

#include "affectgan/batch.hpp"
#include "affectgan/manifest.hpp"
#include "affectgan/noise.hpp"
#include "affectgan/rng.hpp"
#include "affectgan/synth.hpp"
#include "affectgan/wav.hpp"
#include "doctest.h"
#include "synth_probe.hpp"

using namespace affectgan;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("affectgan_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::uint64_t fnv1a_file(const fs::path& file) {
    std::ifstream f(file, std::ios::binary);
    REQUIRE(f.good());
    std::uint64_t h = 1469598103934665603ULL;
    char c;
    while (f.get(c)) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ULL;
    }
    return h;
}

std::uint64_t fnv1a_tree(const fs::path& root) {
    std::vector<fs::path> files;
    for (const auto& e : fs::recursive_directory_iterator(root))
        if (e.is_regular_file()) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    std::uint64_t h = 1469598103934665603ULL;
    for (const auto& f : files) {
        const std::uint64_t fh = fnv1a_file(f);
        h ^= fh;
        h *= 1099511628211ULL;
    }
    return h;
}

Image gradient_image(int size) {
    Image img(size, size);
    for (int c = 0; c < 3; ++c)
        for (int y = 0; y < size; ++y)
            for (int x = 0; x < size; ++x)
                img.at(c, y, x) = (x + y + 17.0 * c) / (2.0 * size + 51.0);
    return img;
}

SynthConfig small_config() {
    SynthConfig cfg;
    cfg.n_subjects = 3;
    cfg.clips_per_subject = 1;
    cfg.frames_per_clip = 10;
    cfg.val_subject_every = 3;
    cfg.seed = 7;
    return cfg;
}

}  // namespace

TEST_CASE("png round trip is exact at 8-bit resolution") {
    const auto dir = temp_dir("png");
    Image img(16, 16);
    Rng rng(3);
    for (double& v : img.data)
        v = static_cast<double>(rng.uniform_index(256)) / 255.0;
    write_png(img, dir / "a.png");
    const Image back = read_png(dir / "a.png");
    REQUIRE(back.same_shape(img));
    for (std::size_t i = 0; i < img.data.size(); ++i)
        CHECK(back.data[i] == doctest::Approx(img.data[i]).epsilon(1e-12));
}

TEST_CASE("wav round trip within 16-bit quantization") {
    const auto dir = temp_dir("wav");
    AudioTrack t;
    t.sample_rate = 16000;
    Rng rng(5);
    t.samples.resize(1600);
    for (double& s : t.samples) s = rng.uniform(-0.99, 0.99);
    write_wav(t, dir / "a.wav");
    const AudioTrack back = read_wav(dir / "a.wav");
    CHECK(back.sample_rate == 16000);
    REQUIRE(back.samples.size() == t.samples.size());
    for (std::size_t i = 0; i < t.samples.size(); ++i)
        CHECK(back.samples[i] == doctest::Approx(t.samples[i]).epsilon(1e-4));
}

TEST_CASE("corrupt") {
    const Image img = gradient_image(32);

    SUBCASE("identity spec returns the input") {
        const Image out = corrupt(img, NoiseSpec::none(), 9);
        CHECK(out.data == img.data);
    }
    SUBCASE("colour scaling fixes the all-zeros image") {
        NoiseSpec spec = NoiseSpec::none();
        spec.p_color = 1.0;
        Image zeros(32, 32);
        const Image out = corrupt(zeros, spec, 11);
        for (double v : out.data) CHECK(v == 0.0);
    }
    SUBCASE("deterministic per (image, spec, seed)") {
        NoiseSpec spec;  // all four corruptions at p = 0.5
        const Image a = corrupt(img, spec, 1234);
        const Image b = corrupt(img, spec, 1234);
        CHECK(a.data == b.data);
        const Image c = corrupt(img, spec, 1235);
        CHECK(a.data != c.data);
    }
    SUBCASE("range and shape preserved under every corruption") {
        NoiseSpec spec;
        spec.p_blur = spec.p_downsample = spec.p_noise = spec.p_color = 1.0;
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            const Image out = corrupt(img, spec, seed);
            CHECK(out.height == img.height);
            CHECK(out.width == img.width);
            for (double v : out.data) {
                CHECK(v >= 0.0);
                CHECK(v <= 1.0);
            }
        }
    }
    SUBCASE("invalid spec rejected") {
        NoiseSpec spec;
        spec.blur_sigma_lo = 3.0;  // above hi
        CHECK_THROWS_AS(corrupt(img, spec, 1), std::invalid_argument);
    }
}

TEST_CASE("face renderer encodes labels geometrically") {
    const FaceLayout g(64);
    const SubjectStyle style = subject_style(1, 0);
    const ClipTexture tex = clip_texture(1, 0);

    SUBCASE("affine endpoints and midpoints") {
        CHECK(mouth_curvature(g, 1.0) == doctest::Approx(-g.mouth_depth /
                                                          (g.mouth_half_width * g.mouth_half_width)));
        CHECK(mouth_curvature(g, -1.0) == -mouth_curvature(g, 1.0));
        CHECK(eye_aperture(g, 0.0) == doctest::Approx(g.eye_aperture_mid));
        CHECK(tone_amplitude(0.0) == doctest::Approx(0.4));  // midpoint of [0.1, 0.7]
        CHECK(tone_frequency(1.0) == doctest::Approx(300.0));
        CHECK(tone_frequency(-1.0) == doctest::Approx(140.0));
    }

    SUBCASE("mouth decoder recovers valence within 0.05") {
        for (double v = -1.0; v <= 1.001; v += 0.2) {
            const Image frame = render_face_frame(g, style, tex, 3, 25.0, v, 0.1);
            const double measured = measure_mouth_valence(frame, g);
            CHECK(std::abs(measured - v) < 0.05);
        }
    }

    SUBCASE("extreme valences bend the corners in opposite directions") {
        const Image smile = render_face_frame(g, style, tex, 0, 25.0, 1.0, 0.0);
        const Image frown = render_face_frame(g, style, tex, 0, 25.0, -1.0, 0.0);
        // darkest row at the mouth corner column moves opposite to the center
        auto darkest_row = [&](const Image& img, int x) {
            int best_y = 0;
            double best = 1e9;
            for (int y = 30; y < 56; ++y)
                if (img.at(1, y, x) < best) {
                    best = img.at(1, y, x);
                    best_y = y;
                }
            return best_y;
        };
        const int corner_x = static_cast<int>(g.cx + g.mouth_half_width) - 2;
        CHECK(darkest_row(smile, corner_x) < darkest_row(smile, static_cast<int>(g.cx)));
        CHECK(darkest_row(frown, corner_x) > darkest_row(frown, static_cast<int>(g.cx)));
    }
}

TEST_CASE("label walks stay in range and are deterministic") {
    const auto a = label_walk(99, 500);
    const auto b = label_walk(99, 500);
    CHECK(a == b);
    for (double v : a) {
        CHECK(v >= -1.0);
        CHECK(v <= 1.0);
    }
    double spread = 0.0;
    for (double v : a) spread = std::max(spread, std::abs(v));
    CHECK(spread > 0.3);  // the walk actually moves
}

TEST_CASE("synthetic dataset generation") {
    const auto dir = temp_dir("synth");
    const SynthConfig cfg = small_config();
    const DatasetManifest manifest = generate_synthetic_dataset(cfg, dir);
    REQUIRE(manifest.clips.size() == 3);
    CHECK(manifest.clips[2].split == "val");
    CHECK(manifest.clips[0].split == "train");

    SUBCASE("manifest round trip") {
        const DatasetManifest loaded = load_manifest(dir / "manifest.json");
        REQUIRE(loaded.clips.size() == manifest.clips.size());
        for (std::size_t i = 0; i < loaded.clips.size(); ++i)
            CHECK(loaded.clips[i] == manifest.clips[i]);
        const auto dir2 = temp_dir("synth_resave");
        // resaving the loaded manifest reproduces the same entries
        save_manifest(loaded, dir / "manifest2.json");
        const DatasetManifest again = load_manifest(dir / "manifest2.json");
        for (std::size_t i = 0; i < again.clips.size(); ++i)
            CHECK(again.clips[i] == manifest.clips[i]);
    }

    SUBCASE("same seed regenerates a byte-identical tree") {
        const auto dir_b = temp_dir("synth_b");
        generate_synthetic_dataset(cfg, dir_b);
        CHECK(fnv1a_tree(dir) == fnv1a_tree(dir_b));
        SynthConfig other = cfg;
        other.seed = 8;
        const auto dir_c = temp_dir("synth_c");
        generate_synthetic_dataset(other, dir_c);
        CHECK(fnv1a_tree(dir) != fnv1a_tree(dir_c));
    }

    SUBCASE("stored frames still decode to the stored labels") {
        const FaceLayout g(cfg.image_size);
        const ClipRecord clip = load_clip(manifest, manifest.clips[1]);
        for (std::size_t i = 0; i < clip.frames.size(); i += 3) {
            const double measured = measure_mouth_valence(clip.frames[i], g);
            CHECK(std::abs(measured - clip.labels[i].valence) < 0.05);
        }
    }

    SUBCASE("clip audio carries the labels") {
        const ClipRecord clip = load_clip(manifest, manifest.clips[0]);
        CHECK(clip.audio.sample_rate == cfg.audio_rate);
        CHECK(clip.audio.samples.size() ==
              static_cast<std::size_t>(std::llround(cfg.frames_per_clip / cfg.fps *
                                                    cfg.audio_rate)));
    }
}

TEST_CASE("manifest validation errors name the clip") {
    const auto dir = temp_dir("manifest_err");
    const DatasetManifest manifest = generate_synthetic_dataset(small_config(), dir);

    SUBCASE("absent label file") {
        fs::remove(dir / manifest.clips[1].label_file);
        try {
            load_manifest(dir / "manifest.json");
            FAIL("expected ManifestError");
        } catch (const ManifestError& e) {
            CHECK(e.clip_id == manifest.clips[1].clip_id);
            CHECK(std::string(e.what()).find("label") != std::string::npos);
        }
    }
    SUBCASE("duplicate clip id") {
        DatasetManifest dup = manifest;
        dup.clips.push_back(dup.clips[0]);
        save_manifest(dup, dir / "dup.json");
        CHECK_THROWS_AS(load_manifest(dir / "dup.json"), ManifestError);
    }
    SUBCASE("mismatched label count") {
        // truncate the label CSV of clip 0
        const auto labels = read_labels_csv(dir / manifest.clips[0].label_file);
        write_labels_csv({labels.begin(), labels.end() - 2},
                         dir / manifest.clips[0].label_file);
        const auto loaded = load_manifest(dir / "manifest.json");
        CHECK_THROWS_AS(load_clip(loaded, loaded.clips[0]), ManifestError);
    }
}

TEST_CASE("batch iterator") {
    const auto dir = temp_dir("batch");
    const DatasetManifest manifest = generate_synthetic_dataset(small_config(), dir);
    const FrameDataset train(manifest, "train");
    REQUIRE(train.n_frames() == 20);  // 2 train subjects x 10 frames
    CHECK(train.lld_length() == 2 * kFallbackDescriptors);

    BatchConfig bc;
    bc.batch_size = 8;
    bc.seed = 21;

    SUBCASE("epoch replay is identical; partition covers every frame") {
        BatchIterator it(train, bc);
        std::vector<int> sizes;
        std::vector<double> first_pixels;
        it.start_epoch(2);
        Batch batch;
        std::size_t total = 0;
        while (it.next(batch)) {
            sizes.push_back(batch.size());
            first_pixels.push_back(batch.noisy[0]);
            total += static_cast<std::size_t>(batch.size());
        }
        CHECK(total == train.n_frames());
        CHECK(sizes == std::vector<int>{8, 8, 4});  // final short batch emitted

        it.start_epoch(2);
        std::size_t i = 0;
        while (it.next(batch)) {
            CHECK(batch.size() == sizes[i]);
            CHECK(batch.noisy[0] == first_pixels[i]);
            ++i;
        }
        it.start_epoch(3);
        REQUIRE(it.next(batch));
        CHECK(batch.noisy[0] != first_pixels[0]);  // reshuffled and re-corrupted
    }

    SUBCASE("noisy equals corrupt(clean, spec, per-frame seed)") {
        BatchIterator it(train, bc);
        it.start_epoch(0);
        Batch batch;
        REQUIRE(it.next(batch));
        // recompute via the published seed derivation for the first element
        const int s = train.image_size();
        Image clean(s, s);
        std::copy(batch.clean.data(), batch.clean.data() + clean.data.size(),
                  clean.data.begin());
        // locate the source frame by matching clean pixels
        std::size_t found = train.n_frames();
        for (std::size_t idx = 0; idx < train.n_frames(); ++idx)
            if (train.frame(idx).data == clean.data) {
                found = idx;
                break;
            }
        REQUIRE(found < train.n_frames());
        const Image expect = corrupt(clean, bc.noise, frame_corruption_seed(bc.seed, 0, found));
        for (std::size_t i = 0; i < expect.data.size(); ++i)
            CHECK(expect.data[i] == batch.noisy[i]);
    }

    SUBCASE("batch size below two is rejected") {
        BatchConfig bad = bc;
        bad.batch_size = 1;
        CHECK_THROWS_AS(BatchIterator(train, bad), std::invalid_argument);
    }
    SUBCASE("empty split is rejected") {
        CHECK_THROWS_AS(FrameDataset(manifest, "nosuch"), std::invalid_argument);
    }
}
