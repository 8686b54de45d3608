#include <cmath>
#include <filesystem>
#include <fstream>

#include "affectgan/batch.hpp"
#include "affectgan/checkpoint.hpp"
#include "affectgan/losses.hpp"
#include "affectgan/rng.hpp"
#include "affectgan/synth.hpp"
#include "affectgan/train.hpp"
#include "doctest.h"

using namespace affectgan;
namespace fs = std::filesystem;

namespace {

double softplus_ref(double x) { return std::log(1.0 + std::exp(x)); }

Tensor random_patch(Rng& rng, int n) {
    Tensor t({n, 1, 2, 2});
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(-2.0, 2.0);
    return t;
}

struct TinyWorld {
    fs::path dir;
    DatasetManifest manifest;
    std::unique_ptr<FrameDataset> train;
    std::unique_ptr<FrameDataset> val;
    TrainConfig config;
    AegSpec aeg_spec;
    CdSpec cd_spec;
    NoiseSpec noise;

    explicit TinyWorld(const std::string& tag, TrainMode mode) {
        dir = fs::temp_directory_path() / ("affectgan_train_" + tag);
        fs::remove_all(dir);
        SynthConfig sc;
        sc.n_subjects = 3;
        sc.clips_per_subject = 1;
        sc.frames_per_clip = 8;
        sc.image_size = 16;
        sc.val_subject_every = 3;
        sc.seed = 5;
        manifest = generate_synthetic_dataset(sc, dir / "data");
        train = std::make_unique<FrameDataset>(manifest, "train");
        val = std::make_unique<FrameDataset>(manifest, "val");

        config.mode = mode;
        config.batch_size = 8;
        config.epochs = 2;
        config.seed = 11;
        config.n_bins = 4;

        aeg_spec.image_size = 16;
        aeg_spec.encoder_channels = {4, 8};
        cd_spec.image_size = 16;
        cd_spec.trunk_channels = {6, 10};
        cd_spec.head_channels = {};
        cd_spec.latent_channels = 8;
    }

    Trainer make_trainer() const {
        return Trainer(config, aeg_spec, cd_spec, noise, *train, *val);
    }

    Batch first_batch() const {
        BatchConfig bc;
        bc.batch_size = config.batch_size;
        bc.noise = noise;
        bc.seed = config.seed;
        BatchIterator it(*train, bc);
        it.start_epoch(0);
        Batch b;
        REQUIRE(it.next(b));
        return b;
    }
};

}  // namespace

TEST_CASE("adversarial losses") {
    Rng rng(42);
    SUBCASE("equal zero scores give 2 log 2") {
        Tensor zeros({2, 1, 2, 2});
        const auto d = adv_loss_d(zeros, zeros, AdvLossKind::nonsaturating_log);
        CHECK(d.value == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-12));
    }
    SUBCASE("saturated scores drive the loss to zero") {
        Tensor real({1, 1, 2, 2}), fake({1, 1, 2, 2});
        real.fill(40.0);
        fake.fill(-40.0);
        const auto d = adv_loss_d(real, fake, AdvLossKind::nonsaturating_log);
        CHECK(d.value == doctest::Approx(0.0).epsilon(1e-12));
    }
    SUBCASE("value matches the elementwise scalar oracle") {
        const Tensor real = random_patch(rng, 3);
        const Tensor fake = random_patch(rng, 3);
        long double expect = 0.0L;
        for (std::size_t i = 0; i < real.size(); ++i)
            expect += softplus_ref(-real[i]) / static_cast<double>(real.size());
        for (std::size_t i = 0; i < fake.size(); ++i)
            expect += softplus_ref(fake[i]) / static_cast<double>(fake.size());
        const auto d = adv_loss_d(real, fake, AdvLossKind::nonsaturating_log);
        CHECK(d.value == doctest::Approx(static_cast<double>(expect)).epsilon(1e-12));

        const auto g = adv_loss_g(fake, AdvLossKind::nonsaturating_log);
        long double gexpect = 0.0L;
        for (std::size_t i = 0; i < fake.size(); ++i)
            gexpect += softplus_ref(-fake[i]) / static_cast<double>(fake.size());
        CHECK(g.value == doctest::Approx(static_cast<double>(gexpect)).epsilon(1e-12));
    }
    SUBCASE("least squares forms") {
        Tensor real({1, 1, 2, 2}), fake({1, 1, 2, 2});
        real.fill(1.0);
        fake.fill(0.0);
        CHECK(adv_loss_d(real, fake, AdvLossKind::least_squares).value ==
              doctest::Approx(0.0));
        fake.fill(1.0);
        CHECK(adv_loss_g(fake, AdvLossKind::least_squares).value == doctest::Approx(0.0));
        CHECK(adv_loss_d(real, fake, AdvLossKind::least_squares).value ==
              doctest::Approx(0.5));
    }
    SUBCASE("gradients match finite differences") {
        for (AdvLossKind kind : {AdvLossKind::nonsaturating_log, AdvLossKind::least_squares}) {
            Tensor real = random_patch(rng, 2);
            Tensor fake = random_patch(rng, 2);
            const auto base = adv_loss_d(real, fake, kind);
            const double h = 1e-6;
            for (std::size_t i = 0; i < real.size(); ++i) {
                const double saved = real[i];
                real[i] = saved + h;
                const double up = adv_loss_d(real, fake, kind).value;
                real[i] = saved - h;
                const double dn = adv_loss_d(real, fake, kind).value;
                real[i] = saved;
                CHECK(base.d_real[i] == doctest::Approx((up - dn) / (2 * h)).epsilon(1e-5));
            }
            const auto gbase = adv_loss_g(fake, kind);
            for (std::size_t i = 0; i < fake.size(); ++i) {
                const double saved = fake[i];
                fake[i] = saved + h;
                const double up = adv_loss_g(fake, kind).value;
                fake[i] = saved - h;
                const double dn = adv_loss_g(fake, kind).value;
                fake[i] = saved;
                CHECK(gbase.d_fake[i] == doctest::Approx((up - dn) / (2 * h)).epsilon(1e-5));
            }
        }
    }
}

TEST_CASE("reconstruction loss") {
    Rng rng(7);
    Tensor clean({1, 3, 4, 4}), xhat({1, 3, 4, 4}), xhat2({1, 3, 4, 4});
    for (std::size_t i = 0; i < clean.size(); ++i) {
        clean[i] = rng.uniform(0.0, 1.0);
        xhat[i] = rng.uniform(0.0, 1.0);
        xhat2[i] = rng.uniform(0.0, 1.0);
    }

    SUBCASE("identity is lossless with zero gradients") {
        const auto r = rec_loss_terms(clean, clean, clean);
        CHECK(r.value == 0.0);
        for (std::size_t i = 0; i < clean.size(); ++i) {
            CHECK(r.d_clean_estimate[i] == 0.0);
            CHECK(r.d_second_estimate[i] == 0.0);
        }
    }
    SUBCASE("constant idempotent output leaves only the denoise term") {
        Tensor c(clean.shape());
        c.fill(0.25);
        const auto r = rec_loss_terms(clean, c, c);
        long double expect = 0.0L;
        for (std::size_t i = 0; i < clean.size(); ++i)
            expect += std::abs(clean[i] - 0.25) / static_cast<double>(clean.size());
        CHECK(r.denoise_term == doctest::Approx(static_cast<double>(expect)).epsilon(1e-12));
        CHECK(r.cycle_term == 0.0);
    }
    SUBCASE("fixture matches the elementwise L1 oracle") {
        const auto r = rec_loss_terms(clean, xhat, xhat2);
        long double d1 = 0.0L, d2 = 0.0L;
        for (std::size_t i = 0; i < clean.size(); ++i) {
            d1 += std::abs(xhat[i] - clean[i]) / static_cast<double>(clean.size());
            d2 += std::abs(xhat[i] - xhat2[i]) / static_cast<double>(clean.size());
        }
        CHECK(r.denoise_term == doctest::Approx(static_cast<double>(d1)).epsilon(1e-12));
        CHECK(r.cycle_term == doctest::Approx(static_cast<double>(d2)).epsilon(1e-12));
        CHECK(r.value == doctest::Approx(r.denoise_term + r.cycle_term));
    }
    SUBCASE("gradients match finite differences") {
        const auto base = rec_loss_terms(clean, xhat, xhat2);
        const double h = 1e-7;
        for (std::size_t i = 0; i < xhat.size(); i += 5) {
            double saved = xhat[i];
            xhat[i] = saved + h;
            const double up = rec_loss_terms(clean, xhat, xhat2).value;
            xhat[i] = saved - h;
            const double dn = rec_loss_terms(clean, xhat, xhat2).value;
            xhat[i] = saved;
            CHECK(base.d_clean_estimate[i] ==
                  doctest::Approx((up - dn) / (2 * h)).epsilon(1e-4));
            saved = xhat2[i];
            xhat2[i] = saved + h;
            const double up2 = rec_loss_terms(clean, xhat, xhat2).value;
            xhat2[i] = saved - h;
            const double dn2 = rec_loss_terms(clean, xhat, xhat2).value;
            xhat2[i] = saved;
            CHECK(base.d_second_estimate[i] ==
                  doctest::Approx((up2 - dn2) / (2 * h)).epsilon(1e-4));
        }
    }
}

TEST_CASE("training steps isolate the two parameter sets") {
    TinyWorld world("isolation", TrainMode::aeg_cd_sz);
    Trainer trainer = world.make_trainer();
    const Batch batch = world.first_batch();

    const auto aeg_before = params_checksum(trainer.aeg()->params());
    const auto cd_before = params_checksum(trainer.cd().params());

    const auto rd = trainer.d_step(batch);
    CHECK(params_checksum(trainer.aeg()->params()) == aeg_before);  // AEG untouched
    CHECK(params_checksum(trainer.cd().params()) != cd_before);
    CHECK(rd.l_d == doctest::Approx(rd.l_adv + trainer.config().lambda_afc * rd.l_afc_r)
                        .epsilon(1e-6));

    const auto cd_after_d = params_checksum(trainer.cd().params());
    const auto rg = trainer.g_step(batch);
    CHECK(params_checksum(trainer.cd().params()) == cd_after_d);  // CD untouched
    CHECK(params_checksum(trainer.aeg()->params()) != aeg_before);
    CHECK(rg.l_g == doctest::Approx(rg.l_adv + trainer.config().lambda_afc * rg.l_afc_f +
                                    trainer.config().lambda_rec * rg.l_rec)
                        .epsilon(1e-6));
}

TEST_CASE("lambda_afc = 0 leaves the pure adversarial objective") {
    TinyWorld world("lambda0", TrainMode::aeg_cd);
    world.config.lambda_afc = 0.0;
    Trainer trainer = world.make_trainer();
    const auto rd = trainer.d_step(world.first_batch());
    CHECK(rd.l_d == doctest::Approx(rd.l_adv).epsilon(1e-12));
}

TEST_CASE("disc mode is plain supervision") {
    TinyWorld world("disc", TrainMode::disc);
    Trainer trainer = world.make_trainer();
    CHECK(trainer.aeg() == nullptr);
    const auto rd = trainer.d_step(world.first_batch());
    CHECK(rd.l_adv == 0.0);
    CHECK(rd.l_d == doctest::Approx(rd.l_afc_r).epsilon(1e-12));
    CHECK_THROWS_AS(trainer.g_step(world.first_batch()), std::logic_error);
}

TEST_CASE("non-finite loss aborts with a diagnostic") {
    TinyWorld world("diverge", TrainMode::disc);
    Trainer trainer = world.make_trainer();
    for (Param* p : trainer.cd().params())
        if (p->name == "cd.affect.weight") p->value[0] = std::nan("");
    CHECK_THROWS_AS(trainer.d_step(world.first_batch()), TrainingDiverged);
}

TEST_CASE("smoke training run writes history and checkpoints deterministically") {
    TinyWorld world("smoke", TrainMode::aeg_cd_sz);

    const auto out_a = world.dir / "run_a";
    const auto out_b = world.dir / "run_b";
    Trainer ta = world.make_trainer();
    const TrainResult ra = ta.run(out_a);
    Trainer tb = world.make_trainer();
    const TrainResult rb = tb.run(out_b);

    REQUIRE(ra.history.size() == 2);
    CHECK(fs::exists(ra.best_checkpoint));
    CHECK(fs::exists(ra.last_checkpoint));

    auto slurp = [](const fs::path& p) {
        std::ifstream f(p, std::ios::binary);
        return std::string((std::istreambuf_iterator<char>(f)),
                           std::istreambuf_iterator<char>());
    };
    const std::string csv_a = slurp(ra.history_csv);
    CHECK(csv_a == slurp(rb.history_csv));  // byte-identical reruns
    CHECK(csv_a.rfind(kHistoryHeader, 0) == 0);
    CHECK(checkpoint_checksum(ra.last_checkpoint) == checkpoint_checksum(rb.last_checkpoint));
    CHECK(checkpoint_checksum(ra.best_checkpoint) == checkpoint_checksum(rb.best_checkpoint));

    SUBCASE("eval of the stored checkpoint reproduces the logged history row") {
        auto loaded = load_checkpoint(ra.last_checkpoint);
        PredictOptions opt;
        opt.mode = train_mode_from_string(loaded.mode_label);
        opt.noise = world.noise;
        opt.seed = world.config.seed;
        auto preds = predict_affect(loaded.aeg.get(), *loaded.cd, *world.val, opt);
        std::vector<AffectEstimate> targets;
        for (std::size_t i = 0; i < world.val->n_frames(); ++i)
            targets.push_back(world.val->label(i));
        const auto rep = evaluate(preds, targets);
        const auto& last = ra.history.back().val;
        CHECK(rep.valence.ccc == doctest::Approx(last.valence.ccc).epsilon(1e-12));
        CHECK(rep.arousal.mse == doctest::Approx(last.arousal.mse).epsilon(1e-12));
    }

    SUBCASE("latent ablation changes predictions in sz mode") {
        auto loaded = load_checkpoint(ra.last_checkpoint);
        PredictOptions opt;
        opt.mode = TrainMode::aeg_cd_sz;
        opt.noise = world.noise;
        opt.seed = world.config.seed;
        const auto with_z = predict_affect(loaded.aeg.get(), *loaded.cd, *world.val, opt);
        opt.zero_latent = true;
        const auto without_z = predict_affect(loaded.aeg.get(), *loaded.cd, *world.val, opt);
        double diff = 0.0;
        for (std::size_t i = 0; i < with_z.size(); ++i)
            diff += std::abs(with_z[i].valence - without_z[i].valence) / with_z.size();
        CHECK(diff > 0.0);
    }
}

TEST_CASE("gradient audit") {
    for (AdvLossKind kind : {AdvLossKind::nonsaturating_log, AdvLossKind::least_squares}) {
        const auto report = gradient_audit(kind, 314, 4, 1e-6);
        CAPTURE(to_string(kind));
        CHECK(report.checked > 100);
        CHECK(report.max_rel_err_d < 1e-4);
        CHECK(report.max_rel_err_g < 1e-4);
    }
    SUBCASE("deterministic per seed") {
        const auto a = gradient_audit(AdvLossKind::nonsaturating_log, 9, 2, 1e-6);
        const auto b = gradient_audit(AdvLossKind::nonsaturating_log, 9, 2, 1e-6);
        CHECK(a.max_rel_err_d == b.max_rel_err_d);
        CHECK(a.max_rel_err_g == b.max_rel_err_g);
    }
}
