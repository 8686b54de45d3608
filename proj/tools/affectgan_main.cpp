#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "affectgan/audio_features.hpp"
#include "affectgan/batch.hpp"
#include "affectgan/checkpoint.hpp"
#include "affectgan/manifest.hpp"
#include "affectgan/runconfig.hpp"
#include "affectgan/synth.hpp"
#include "affectgan/train.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace affectgan;

namespace {

constexpr const char* kVersion = "affectgan 0.1.0";

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[19];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::uint64_t env_seed_or(std::uint64_t fallback) {
    const char* env = std::getenv("AFFECTGAN_SEED");
    if (!env) return fallback;
    try {
        return std::stoull(env);
    } catch (const std::exception&) {
        throw std::runtime_error("AFFECTGAN_SEED is not a number: " + std::string(env));
    }
}

void write_run_manifest(const fs::path& out_dir, const std::string& command,
                        const std::string& config_text, std::uint64_t seed) {
    fs::create_directories(out_dir);
    nlohmann::json j;
    j["version"] = kVersion;
    j["command"] = command;
    j["config_hash"] = hex64(fnv1a(config_text));
    j["seed"] = seed;
    std::ofstream f(out_dir / "run_manifest.json");
    if (!f) throw std::runtime_error("cannot write run manifest under " + out_dir.string());
    f << j.dump(2) << "\n";
}

struct PredictOverrides {
    bool clean = false;
    bool zero_latent = false;
    std::int64_t seed = -1;  // negative: use the checkpoint's stored seed
};

PredictOptions options_from_checkpoint(const LoadedCheckpoint& ckpt,
                                       const PredictOverrides& over) {
    PredictOptions opt;
    opt.mode = train_mode_from_string(ckpt.mode_label);
    const auto extra = nlohmann::json::parse(ckpt.extra_json);
    if (extra.contains("noise"))
        opt.noise = noise_spec_from_json(extra.at("noise").dump());
    opt.seed = extra.value("seed", std::uint64_t{1});
    opt.eval_on_clean = extra.value("eval_on_clean", false);
    if (over.clean) opt.eval_on_clean = true;
    if (over.zero_latent) opt.zero_latent = true;
    if (over.seed >= 0) opt.seed = static_cast<std::uint64_t>(over.seed);
    return opt;
}

int cmd_synth_data(const fs::path& out, int subjects, int clips, int frames, double fps,
                   int size, int rate, int val_every, std::uint64_t seed, bool json) {
    SynthConfig cfg;
    cfg.n_subjects = subjects;
    cfg.clips_per_subject = clips;
    cfg.frames_per_clip = frames;
    cfg.fps = fps;
    cfg.image_size = size;
    cfg.audio_rate = rate;
    cfg.val_subject_every = val_every;
    cfg.seed = seed;
    const DatasetManifest manifest = generate_synthetic_dataset(cfg, out);
    const std::string flags = "synth-data|" + std::to_string(subjects) + "|" +
                              std::to_string(clips) + "|" + std::to_string(frames) + "|" +
                              std::to_string(fps) + "|" + std::to_string(size) + "|" +
                              std::to_string(rate) + "|" + std::to_string(seed);
    write_run_manifest(out, "synth-data", flags, seed);
    if (json) {
        nlohmann::json j;
        j["manifest"] = (out / "manifest.json").string();
        j["clips"] = manifest.clips.size();
        j["frames_per_clip"] = frames;
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << "wrote " << manifest.clips.size() << " clips under " << out.string()
                  << "\n";
    }
    return 0;
}

int cmd_features(const fs::path& manifest_path, const std::string& source, bool json) {
    const DatasetManifest manifest = load_manifest(manifest_path);
    std::string csv_dir;
    if (source.rfind("csv:", 0) == 0)
        csv_dir = source.substr(4);
    else if (source != "fallback")
        throw std::runtime_error("features: --source must be 'fallback' or 'csv:PATH'");

    std::size_t n_vectors = 0;
    int lld_length = 0;
    for (const auto& entry : manifest.clips) {
        std::vector<LldVector> vectors;
        if (csv_dir.empty()) {
            const AudioTrack audio = read_wav(manifest.root / entry.audio_file);
            vectors = fallback_clip_llds(audio, entry.fps, entry.n_frames);
        } else {
            const fs::path src = fs::path(csv_dir) / (entry.clip_id + ".csv");
            if (!fs::exists(src))
                throw ManifestError(entry.clip_id, "missing LLD CSV " + src.string());
            vectors = ingest_precomputed(src, entry.fps, entry.n_frames);
        }
        if (lld_length == 0) lld_length = vectors.front().length();
        if (vectors.front().length() != lld_length)
            throw ManifestError(entry.clip_id, "LLD vector length differs across clips");
        const fs::path out_file =
            (manifest.root / entry.label_file).parent_path() / "lld.csv";
        write_lld_csv(vectors, out_file);
        n_vectors += vectors.size();
    }
    if (json) {
        nlohmann::json j;
        j["clips"] = manifest.clips.size();
        j["vectors"] = n_vectors;
        j["lld_length"] = lld_length;
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << "wrote " << n_vectors << " LLD vectors (length " << lld_length << ") for "
                  << manifest.clips.size() << " clips\n";
    }
    return 0;
}

int cmd_train(const fs::path& config_path, const std::string& mode_override,
              const fs::path& out, bool dump, bool json) {
    RunConfig rc = parse_run_config(config_path);
    if (!mode_override.empty()) rc.train.mode = train_mode_from_string(mode_override);
    if (dump) {
        std::cout << dump_run_config(rc);
        return 0;
    }
    const DatasetManifest manifest = load_manifest(rc.data.manifest);
    const FrameDataset train_data(manifest, rc.data.train_split);
    const FrameDataset val_data(manifest, rc.data.val_split);
    Trainer trainer(rc.train, rc.model.aeg_spec(), rc.model.cd_spec(), rc.data.noise, train_data,
                    val_data);
    write_run_manifest(out, "train", dump_run_config(rc), rc.train.seed);
    const TrainResult result = trainer.run(out);
    if (json) {
        nlohmann::json j;
        j["history"] = result.history_csv.string();
        j["best_checkpoint"] = result.best_checkpoint.string();
        j["last_checkpoint"] = result.last_checkpoint.string();
        j["best_epoch"] = result.best_epoch;
        j["best_ccc"] = result.best_ccc;
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << "trained " << result.history.size() << " epochs; best mean CCC "
                  << result.best_ccc << " at epoch " << result.best_epoch << "\n"
                  << "history: " << result.history_csv.string() << "\n"
                  << "best checkpoint: " << result.best_checkpoint.string() << "\n";
    }
    return 0;
}

int cmd_eval(const fs::path& checkpoint, const fs::path& manifest_path, const std::string& split,
             const fs::path& out, const PredictOverrides& over, bool json) {
    LoadedCheckpoint ckpt = load_checkpoint(checkpoint);
    const DatasetManifest manifest = load_manifest(manifest_path);
    const FrameDataset data(manifest, split);
    const PredictOptions opt = options_from_checkpoint(ckpt, over);
    const auto preds = predict_affect(ckpt.aeg.get(), *ckpt.cd, data, opt);
    std::vector<AffectEstimate> targets;
    targets.reserve(data.n_frames());
    for (std::size_t i = 0; i < data.n_frames(); ++i) targets.push_back(data.label(i));
    MetricsReport report = evaluate(preds, targets);
    report.mode_label = ckpt.mode_label;
    report.seed = opt.seed;
    report.split_id = split;

    if (!out.empty()) {
        write_run_manifest(out, "eval",
                           checkpoint.string() + "|" + manifest_path.string() + "|" + split,
                           opt.seed);
        std::ofstream jf(out / "report.json");
        jf << report.to_json() << "\n";
        std::ofstream cf(out / "report.csv");
        cf << MetricsReport::csv_header() << "\n" << report.to_csv_rows();
    }
    if (json)
        std::cout << report.to_json() << "\n";
    else
        std::cout << MetricsReport::csv_header() << "\n" << report.to_csv_rows();
    return 0;
}

int cmd_denoise(const fs::path& checkpoint, const fs::path& in, const fs::path& out, bool json) {
    LoadedCheckpoint ckpt = load_checkpoint(checkpoint);
    if (!ckpt.aeg)
        throw std::runtime_error("denoise: checkpoint \"" + checkpoint.string() +
                                 "\" holds no generator (mode " + ckpt.mode_label + ")");
    std::vector<fs::path> files;
    if (fs::is_directory(in)) {
        for (const auto& e : fs::directory_iterator(in))
            if (e.is_regular_file() && e.path().extension() == ".png") files.push_back(e.path());
        std::sort(files.begin(), files.end());
    } else {
        files.push_back(in);
    }
    if (files.empty()) throw std::runtime_error("denoise: no PNG inputs under " + in.string());
    fs::create_directories(out);

    const int s = ckpt.aeg->spec().image_size;
    for (const auto& file : files) {
        const Image img = read_png(file);
        if (img.height != s || img.width != s)
            throw std::runtime_error("denoise: " + file.string() + " is " +
                                     std::to_string(img.width) + "x" +
                                     std::to_string(img.height) + ", the generator expects " +
                                     std::to_string(s) + "x" + std::to_string(s));
        Tensor input({1, 3, s, s});
        std::copy(img.data.begin(), img.data.end(), input.data());
        const auto gen = ckpt.aeg->forward(input, false);
        Image denoised(s, s);
        std::copy(gen.clean_estimate.data(), gen.clean_estimate.data() + denoised.data.size(),
                  denoised.data.begin());
        write_png(denoised, out / file.filename());
    }
    write_run_manifest(out, "denoise", checkpoint.string() + "|" + in.string(), 0);
    if (json) {
        nlohmann::json j;
        j["images"] = files.size();
        j["out"] = out.string();
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << "denoised " << files.size() << " images into " << out.string() << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"adversarial latent-feature networks for valence/arousal estimation"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    // synth-data
    auto* synth = app.add_subcommand("synth-data", "generate the synthetic audiovisual dataset");
    std::string synth_out;
    int subjects = 10, clips = 1, frames = 80, size = 64, rate = 16000, val_every = 5;
    double fps = 25.0;
    std::int64_t seed_flag = -1;
    bool synth_json = false;
    synth->add_option("--out", synth_out, "output directory")->required();
    synth->add_option("--subjects", subjects, "number of subjects");
    synth->add_option("--clips", clips, "clips per subject");
    synth->add_option("--frames", frames, "frames per clip")->check(CLI::PositiveNumber);
    synth->add_option("--fps", fps, "video frame rate");
    synth->add_option("--size", size, "image size in pixels");
    synth->add_option("--rate", rate, "audio sample rate");
    synth->add_option("--val-every", val_every, "tag every Nth subject as validation");
    synth->add_option("--seed", seed_flag, "random seed (default: AFFECTGAN_SEED or 1)");
    synth->add_flag("--json", synth_json, "machine-readable output");

    // features
    auto* features = app.add_subcommand("features", "extract or ingest per-clip LLD vectors");
    std::string feat_manifest, feat_source = "fallback";
    bool feat_json = false;
    features->add_option("--manifest", feat_manifest, "dataset manifest")->required();
    features->add_option("--source", feat_source, "'fallback' or 'csv:PATH'");
    features->add_flag("--json", feat_json, "machine-readable output");

    // train
    auto* train = app.add_subcommand("train", "train a model per the run config");
    std::string train_config, train_mode, train_out = "run";
    bool train_dump = false, train_json = false;
    train->add_option("--config", train_config, "run configuration file")->required();
    train->add_option("--mode", train_mode, "override [train] mode: disc|aeg_cd|aeg_cd_sz");
    train->add_option("--out", train_out, "output directory");
    train->add_flag("--dump-config", train_dump, "echo the effective config and exit");
    train->add_flag("--json", train_json, "machine-readable output");

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint on a split");
    std::string eval_ckpt, eval_manifest, eval_split = "val", eval_out;
    PredictOverrides over;
    bool eval_json = false;
    eval_cmd->add_option("--checkpoint", eval_ckpt, "checkpoint file")->required();
    eval_cmd->add_option("--manifest", eval_manifest, "dataset manifest")->required();
    eval_cmd->add_option("--split", eval_split, "split tag to evaluate");
    eval_cmd->add_option("--out", eval_out, "directory for report.json/report.csv");
    eval_cmd->add_option("--seed", over.seed, "override the stored corruption seed");
    eval_cmd->add_flag("--clean", over.clean, "evaluate on clean instead of corrupted inputs");
    eval_cmd->add_flag("--zero-latent", over.zero_latent,
                       "ablate the latent conditioning path");
    eval_cmd->add_flag("--json", eval_json, "machine-readable output");

    // denoise
    auto* denoise = app.add_subcommand("denoise", "run the generator over PNG images");
    std::string den_ckpt, den_in, den_out;
    bool den_json = false;
    denoise->add_option("--checkpoint", den_ckpt, "checkpoint file")->required();
    denoise->add_option("--in", den_in, "input PNG or directory of PNGs")->required();
    denoise->add_option("--out", den_out, "output directory")->required();
    denoise->add_flag("--json", den_json, "machine-readable output");

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) {
            const std::uint64_t seed =
                seed_flag >= 0 ? static_cast<std::uint64_t>(seed_flag) : env_seed_or(1);
            return cmd_synth_data(synth_out, subjects, clips, frames, fps, size, rate,
                                  val_every, seed, synth_json);
        }
        if (features->parsed()) return cmd_features(feat_manifest, feat_source, feat_json);
        if (train->parsed())
            return cmd_train(train_config, train_mode, train_out, train_dump, train_json);
        if (eval_cmd->parsed())
            return cmd_eval(eval_ckpt, eval_manifest, eval_split, eval_out, over, eval_json);
        if (denoise->parsed()) return cmd_denoise(den_ckpt, den_in, den_out, den_json);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
