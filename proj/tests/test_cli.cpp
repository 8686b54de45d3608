#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "affectgan/checkpoint.hpp"
#include "affectgan/manifest.hpp"
#include "affectgan/runconfig.hpp"
#include "doctest.h"

using namespace affectgan;
namespace fs = std::filesystem;

namespace {

fs::path work_dir() {
    static const fs::path dir = [] {
        const fs::path p = fs::temp_directory_path() / "affectgan_test_cli";
        fs::remove_all(p);
        fs::create_directories(p);
        return p;
    }();
    return dir;
}

int run_cli(const std::string& args, const fs::path& capture = {}) {
    std::string cmd = std::string(AFFECTGAN_BIN) + " " + args;
    if (!capture.empty())
        cmd += " > " + capture.string() + " 2>&1";
    else
        cmd += " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    REQUIRE(f.good());
    return std::string((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
}

std::uint64_t tree_hash(const fs::path& root) {
    std::vector<fs::path> files;
    for (const auto& e : fs::recursive_directory_iterator(root))
        if (e.is_regular_file()) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    std::uint64_t h = 1469598103934665603ULL;
    for (const auto& f : files)
        for (unsigned char c : slurp(f)) {
            h ^= c;
            h *= 1099511628211ULL;
        }
    return h;
}

std::string tiny_config_text(const fs::path& manifest) {
    std::ostringstream os;
    os << "[data]\n"
       << "manifest = " << manifest.string() << "\n"
       << "[model]\n"
       << "image_size = 16\n"
       << "aeg_channels = 4,8\n"
       << "cd_trunk_channels = 6,10\n"
       << "cd_head_channels = \n"
       << "[train]\n"
       << "mode = aeg_cd_sz\n"
       << "batch_size = 8\n"
       << "epochs = 2\n"
       << "seed = 3\n"
       << "n_bins = 4\n";
    return os.str();
}

}  // namespace

TEST_CASE("run config round trip") {
    RunConfig cfg;
    cfg.data.manifest = (work_dir() / "somewhere/manifest.json").string();
    cfg.model.image_size = 32;
    cfg.model.aeg_channels = {8, 16};
    cfg.model.cd_head_channels = {};
    cfg.train.mode = TrainMode::disc;
    cfg.train.lambda_rec = 2.5;
    cfg.train.seed = 99;
    cfg.train.adv_loss = AdvLossKind::least_squares;
    cfg.eval.split = "test";

    const std::string text = dump_run_config(cfg);
    const RunConfig back = parse_run_config_text(text, work_dir());
    CHECK(back == cfg);

    SUBCASE("unknown keys are rejected") {
        CHECK_THROWS_AS(parse_run_config_text("[train]\nbogus = 1\n", work_dir()),
                        std::invalid_argument);
        CHECK_THROWS_AS(parse_run_config_text("[nope]\n", work_dir()), std::invalid_argument);
        CHECK_THROWS_AS(parse_run_config_text("orphan = 1\n", work_dir()),
                        std::invalid_argument);
    }
    SUBCASE("bad values are rejected") {
        CHECK_THROWS_AS(parse_run_config_text("[train]\nepochs = many\n", work_dir()),
                        std::invalid_argument);
        CHECK_THROWS_AS(parse_run_config_text("[train]\nmode = sideways\n", work_dir()),
                        std::invalid_argument);
    }
    SUBCASE("comments and blank lines are fine") {
        const RunConfig c =
            parse_run_config_text("# header\n[train]\n\nepochs = 7 # trailing\n", work_dir());
        CHECK(c.train.epochs == 7);
    }
}

TEST_CASE("cli synth-data") {
    const fs::path a = work_dir() / "synth_a";
    const fs::path b = work_dir() / "synth_b";
    REQUIRE(run_cli("synth-data --out " + a.string() +
                    " --subjects 3 --clips 1 --frames 8 --size 16 --seed 5") == 0);
    const DatasetManifest manifest = load_manifest(a / "manifest.json");
    CHECK(manifest.clips.size() == 3);

    SUBCASE("same seed gives an identical tree") {
        REQUIRE(run_cli("synth-data --out " + b.string() +
                        " --subjects 3 --clips 1 --frames 8 --size 16 --seed 5") == 0);
        CHECK(tree_hash(a / "clips") == tree_hash(b / "clips"));
    }
    SUBCASE("environment seed fallback") {
        const fs::path c = work_dir() / "synth_c";
        REQUIRE(std::system(("AFFECTGAN_SEED=5 " + std::string(AFFECTGAN_BIN) +
                             " synth-data --out " + c.string() +
                             " --subjects 3 --clips 1 --frames 8 --size 16 > /dev/null 2>&1")
                                .c_str()) == 0);
        CHECK(tree_hash(a / "clips") == tree_hash(c / "clips"));
    }
    SUBCASE("invalid frame count is a usage error") {
        CHECK(run_cli("synth-data --out " + (work_dir() / "bad").string() + " --frames 0") != 0);
    }
}

TEST_CASE("cli features") {
    const fs::path data = work_dir() / "featdata";
    REQUIRE(run_cli("synth-data --out " + data.string() +
                    " --subjects 2 --clips 1 --frames 8 --size 16 --seed 2") == 0);
    SUBCASE("fallback emits one vector per frame") {
        const fs::path log = work_dir() / "features.json";
        REQUIRE(run_cli("features --manifest " + (data / "manifest.json").string() + " --json",
                        log) == 0);
        const std::string out = slurp(log);
        CHECK(out.find("\"vectors\": 16") != std::string::npos);
        CHECK(out.find("\"lld_length\": 12") != std::string::npos);
        CHECK(fs::exists(data / "clips" / "s00_c00" / "lld.csv"));
    }
    SUBCASE("missing csv source names the clip") {
        const fs::path log = work_dir() / "features_err.txt";
        CHECK(run_cli("features --manifest " + (data / "manifest.json").string() +
                          " --source csv:" + (work_dir() / "nowhere").string(),
                      log) != 0);
        CHECK(slurp(log).find("s00_c00") != std::string::npos);
    }
}

TEST_CASE("cli train, eval, denoise") {
    const fs::path data = work_dir() / "traindata";
    REQUIRE(run_cli("synth-data --out " + data.string() +
                    " --subjects 4 --clips 1 --frames 8 --size 16 --val-every 4 --seed 7") == 0);
    const fs::path config = work_dir() / "tiny.cfg";
    std::ofstream(config) << tiny_config_text(data / "manifest.json");

    SUBCASE("dump-config round trips through the binary") {
        const fs::path dumped = work_dir() / "dumped.cfg";
        REQUIRE(run_cli("train --config " + config.string() + " --dump-config", dumped) == 0);
        const RunConfig a = parse_run_config(config);
        const RunConfig b = parse_run_config(dumped);
        CHECK(a == b);
        // and the dump of the reparsed config is fixed-point
        const fs::path dumped2 = work_dir() / "dumped2.cfg";
        REQUIRE(run_cli("train --config " + dumped.string() + " --dump-config", dumped2) == 0);
        CHECK(slurp(dumped) == slurp(dumped2));
    }

    const fs::path run_dir = work_dir() / "run";
    REQUIRE(run_cli("train --config " + config.string() + " --out " + run_dir.string()) == 0);
    REQUIRE(fs::exists(run_dir / "history.csv"));
    REQUIRE(fs::exists(run_dir / "best.ckpt"));
    REQUIRE(fs::exists(run_dir / "run_manifest.json"));

    SUBCASE("history columns match the interface") {
        std::istringstream hist(slurp(run_dir / "history.csv"));
        std::string header;
        std::getline(hist, header);
        CHECK(header == "epoch,split,mse_v,mse_a,cor_v,cor_a,ccc_v,ccc_a,L_D,L_G");
        std::string row;
        int rows = 0;
        while (std::getline(hist, row))
            if (!row.empty()) ++rows;
        CHECK(rows == 2);
    }

    SUBCASE("mode override is honored") {
        const fs::path disc_dir = work_dir() / "run_disc";
        REQUIRE(run_cli("train --config " + config.string() + " --mode disc --out " +
                        disc_dir.string()) == 0);
        CHECK(load_checkpoint(disc_dir / "last.ckpt").mode_label == "disc");
    }

    SUBCASE("eval reproduces the logged validation metrics and is repeatable") {
        const fs::path e1 = work_dir() / "eval1";
        const fs::path e2 = work_dir() / "eval2";
        REQUIRE(run_cli("eval --checkpoint " + (run_dir / "last.ckpt").string() +
                        " --manifest " + (data / "manifest.json").string() + " --out " +
                        e1.string()) == 0);
        REQUIRE(run_cli("eval --checkpoint " + (run_dir / "last.ckpt").string() +
                        " --manifest " + (data / "manifest.json").string() + " --out " +
                        e2.string()) == 0);
        CHECK(slurp(e1 / "report.csv") == slurp(e2 / "report.csv"));

        // the last history row and the eval of last.ckpt agree field by field
        std::istringstream hist(slurp(run_dir / "history.csv"));
        std::string line, last;
        std::getline(hist, line);  // header
        while (std::getline(hist, line))
            if (!line.empty()) last = line;
        std::vector<std::string> hist_cells;
        {
            std::stringstream ss(last);
            std::string cell;
            while (std::getline(ss, cell, ',')) hist_cells.push_back(cell);
        }
        std::istringstream rep(slurp(e1 / "report.csv"));
        std::getline(rep, line);  // header
        std::getline(rep, line);  // valence row: mode,fold,dim,mse,rmse,cor,ccc,n
        std::vector<std::string> rep_cells;
        {
            std::stringstream ss(line);
            std::string cell;
            while (std::getline(ss, cell, ',')) rep_cells.push_back(cell);
        }
        REQUIRE(hist_cells.size() == 10);
        REQUIRE(rep_cells.size() == 8);
        CHECK(std::stod(rep_cells[3]) ==
              doctest::Approx(std::stod(hist_cells[2])).epsilon(1e-9));  // mse_v
        CHECK(std::stod(rep_cells[6]) ==
              doctest::Approx(std::stod(hist_cells[6])).epsilon(1e-9));  // ccc_v
    }

    SUBCASE("denoise emits images of the input size") {
        const fs::path den = work_dir() / "denoised";
        const fs::path frame = data / "clips" / "s00_c00" / "frame_000000.png";
        REQUIRE(run_cli("denoise --checkpoint " + (run_dir / "last.ckpt").string() + " --in " +
                        frame.string() + " --out " + den.string()) == 0);
        const Image img = read_png(den / "frame_000000.png");
        CHECK(img.width == 16);
        CHECK(img.height == 16);
        for (double v : img.data) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
    }

    SUBCASE("denoise rejects a generator-free checkpoint") {
        const fs::path disc_dir = work_dir() / "run_disc2";
        REQUIRE(run_cli("train --config " + config.string() + " --mode disc --out " +
                        disc_dir.string()) == 0);
        CHECK(run_cli("denoise --checkpoint " + (disc_dir / "last.ckpt").string() + " --in " +
                      (data / "clips" / "s00_c00" / "frame_000000.png").string() + " --out " +
                      (work_dir() / "nope").string()) != 0);
    }
}
