#include "affectgan/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace affectgan {

namespace {

const Tensor kEmpty;

AffectLossResult affect_pair_loss(const Tensor& affect, const Tensor& labels, bool composite,
                                  const ClassWeighting& wv, const ClassWeighting& wa) {
    const int n = affect.dim(0);
    AffectSeries sv, sa;
    sv.dimension = AffectDim::valence;
    sa.dimension = AffectDim::arousal;
    sv.predictions.resize(static_cast<std::size_t>(n));
    sv.targets.resize(static_cast<std::size_t>(n));
    sa.predictions.resize(static_cast<std::size_t>(n));
    sa.targets.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        sv.predictions[static_cast<std::size_t>(i)] = affect[static_cast<std::size_t>(i) * 2];
        sa.predictions[static_cast<std::size_t>(i)] = affect[static_cast<std::size_t>(i) * 2 + 1];
        sv.targets[static_cast<std::size_t>(i)] = labels[static_cast<std::size_t>(i) * 2];
        sa.targets[static_cast<std::size_t>(i)] = labels[static_cast<std::size_t>(i) * 2 + 1];
    }
    AffectLossConfig cfg;
    cfg.include_cor = composite;
    cfg.include_ccc = composite;
    return affect_loss(sv, sa, wv, wa, cfg);
}

Tensor affect_grad_tensor(const AffectLossResult& r, double scale) {
    const int n = static_cast<int>(r.grad_valence.size());
    Tensor g({n, 2});
    for (int i = 0; i < n; ++i) {
        g[static_cast<std::size_t>(i) * 2] = scale * r.grad_valence[static_cast<std::size_t>(i)];
        g[static_cast<std::size_t>(i) * 2 + 1] =
            scale * r.grad_arousal[static_cast<std::size_t>(i)];
    }
    return g;
}

void check_outputs_finite(const Cd::Output& out, long step) {
    if (!out.patch.all_finite() || !out.affect.all_finite())
        throw TrainingDiverged("non-finite discriminator outputs at step " +
                               std::to_string(step));
}

// loss assembly shared between the trainer and the gradient audit
struct LossPipeline {
    const TrainConfig* config;
    Aeg* aeg;
    Cd* cd;
    const ClassWeighting* wv;
    const ClassWeighting* wa;

    bool uses_latent() const { return config->mode == TrainMode::aeg_cd_sz; }
    bool uses_audio() const {
        return config->mode == TrainMode::aeg_cd_sz || config->mode == TrainMode::disc;
    }
    const Tensor& extra(const Batch& b) const {
        return cd->spec().append_noisy ? b.noisy : kEmpty;
    }

    StepReport d_backward(const Batch& batch, long step) const {
        StepReport rep;
        rep.step = step;
        rep.mode = config->mode;
        if (config->mode == TrainMode::disc) {
            auto out = cd->forward(batch.noisy, batch.lld, kEmpty, extra(batch), true);
            check_outputs_finite(out, step);
            const auto afc =
                affect_pair_loss(out.affect, batch.labels, config->disc_full_affect_loss, *wv, *wa);
            rep.l_afc_r = afc.value;
            rep.l_d = afc.value;  // plain supervised loss, no adversarial term
            cd->backward(Tensor(out.patch.shape()), affect_grad_tensor(afc, 1.0));
            return rep;
        }
        const auto gen = aeg->forward(batch.noisy, false);  // generator is frozen here
        const Tensor& lld = uses_audio() ? batch.lld : kEmpty;
        const Tensor& z = uses_latent() ? gen.latent : kEmpty;
        auto real = cd->forward(batch.clean, lld, z, extra(batch), true);
        auto fake = cd->forward(gen.clean_estimate, lld, z, extra(batch), true);
        check_outputs_finite(real, step);
        check_outputs_finite(fake, step);
        const auto adv = adv_loss_d(real.patch, fake.patch, config->adv_loss);
        const auto afc = affect_pair_loss(real.affect, batch.labels, true, *wv, *wa);
        rep.l_adv = adv.value;
        rep.l_afc_r = afc.value;
        rep.l_d = adv.value + config->lambda_afc * afc.value;
        cd->backward(adv.d_fake, Tensor(fake.affect.shape()));
        cd->backward(adv.d_real, affect_grad_tensor(afc, config->lambda_afc));
        return rep;
    }

    double d_value(const Batch& batch) const {
        if (config->mode == TrainMode::disc) {
            auto out = cd->forward(batch.noisy, batch.lld, kEmpty, extra(batch), false);
            return affect_pair_loss(out.affect, batch.labels, config->disc_full_affect_loss, *wv,
                                    *wa)
                .value;
        }
        const auto gen = aeg->forward(batch.noisy, false);
        const Tensor& lld = uses_audio() ? batch.lld : kEmpty;
        const Tensor& z = uses_latent() ? gen.latent : kEmpty;
        auto real = cd->forward(batch.clean, lld, z, extra(batch), false);
        auto fake = cd->forward(gen.clean_estimate, lld, z, extra(batch), false);
        return adv_loss_d(real.patch, fake.patch, config->adv_loss).value +
               config->lambda_afc *
                   affect_pair_loss(real.affect, batch.labels, true, *wv, *wa).value;
    }

    StepReport g_backward(const Batch& batch, long step) const {
        StepReport rep;
        rep.step = step;
        rep.mode = config->mode;
        const auto first = aeg->forward(batch.noisy, true);
        const auto second = aeg->forward(first.clean_estimate, true);
        const Tensor& lld = uses_audio() ? batch.lld : kEmpty;
        const Tensor& z = uses_latent() ? first.latent : kEmpty;
        auto out = cd->forward(first.clean_estimate, lld, z, extra(batch), true);
        check_outputs_finite(out, step);
        const auto adv = adv_loss_g(out.patch, config->adv_loss);
        const auto afc = affect_pair_loss(out.affect, batch.labels, true, *wv, *wa);
        const auto rec = rec_loss_terms(batch.clean, first.clean_estimate, second.clean_estimate);
        rep.l_adv = adv.value;
        rep.l_afc_f = afc.value;
        rep.l_rec = rec.value;
        rep.l_g = adv.value + config->lambda_afc * afc.value + config->lambda_rec * rec.value;

        auto cd_grads = cd->backward(adv.d_fake, affect_grad_tensor(afc, config->lambda_afc));
        Tensor d_second = rec.d_second_estimate;
        d_second *= config->lambda_rec;
        Tensor d_estimate = aeg->backward(d_second, kEmpty);  // unwinds the second application
        for (std::size_t i = 0; i < d_estimate.size(); ++i)
            d_estimate[i] += config->lambda_rec * rec.d_clean_estimate[i] + cd_grads.d_image[i];
        aeg->backward(d_estimate, uses_latent() ? cd_grads.d_latent : kEmpty);
        return rep;
    }

    double g_value(const Batch& batch) const {
        const auto first = aeg->forward(batch.noisy, false);
        const auto second = aeg->forward(first.clean_estimate, false);
        const Tensor& lld = uses_audio() ? batch.lld : kEmpty;
        const Tensor& z = uses_latent() ? first.latent : kEmpty;
        auto out = cd->forward(first.clean_estimate, lld, z, extra(batch), false);
        return adv_loss_g(out.patch, config->adv_loss).value +
               config->lambda_afc *
                   affect_pair_loss(out.affect, batch.labels, true, *wv, *wa).value +
               config->lambda_rec *
                   rec_loss_terms(batch.clean, first.clean_estimate, second.clean_estimate).value;
    }
};

void append_csv_double(std::string& out, double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    out += buf;
}

}  // namespace

const char* to_string(TrainMode mode) {
    switch (mode) {
        case TrainMode::disc: return "disc";
        case TrainMode::aeg_cd: return "aeg_cd";
        case TrainMode::aeg_cd_sz: return "aeg_cd_sz";
    }
    return "?";
}

TrainMode train_mode_from_string(const std::string& s) {
    if (s == "disc") return TrainMode::disc;
    if (s == "aeg_cd") return TrainMode::aeg_cd;
    if (s == "aeg_cd_sz") return TrainMode::aeg_cd_sz;
    throw std::invalid_argument("unknown training mode: " + s);
}

void TrainConfig::validate() const {
    if (lambda_afc < 0.0 || lambda_rec < 0.0)
        throw std::invalid_argument("TrainConfig: lambdas must be >= 0");
    if (g_lr <= 0.0 || d_lr <= 0.0)
        throw std::invalid_argument("TrainConfig: learning rates must be > 0");
    if (d_steps_per_g < 1) throw std::invalid_argument("TrainConfig: d_steps_per_g must be >= 1");
    if (batch_size < 2) throw std::invalid_argument("TrainConfig: batch_size must be >= 2");
    if (epochs < 1) throw std::invalid_argument("TrainConfig: epochs must be >= 1");
    if (n_bins < 1) throw std::invalid_argument("TrainConfig: n_bins must be >= 1");
}

std::vector<AffectEstimate> predict_affect(Aeg* aeg, Cd& cd, const FrameDataset& data,
                                           const PredictOptions& options) {
    if (options.mode != TrainMode::disc && aeg == nullptr)
        throw std::invalid_argument("predict_affect: this mode needs a generator");
    const int s = data.image_size();
    const std::size_t n = data.n_frames();
    const std::size_t plane = static_cast<std::size_t>(3) * s * s;
    std::vector<AffectEstimate> out;
    out.reserve(n);

    for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(options.batch_size)) {
        const int b = static_cast<int>(
            std::min<std::size_t>(options.batch_size, n - start));
        Tensor input({b, 3, s, s});
        Tensor lld({b, data.lld_length()});
        for (int j = 0; j < b; ++j) {
            const std::size_t idx = start + static_cast<std::size_t>(j);
            const Image img = options.eval_on_clean
                                  ? data.frame(idx)
                                  : eval_corrupted_frame(data, idx, options.noise, options.seed);
            std::copy(img.data.begin(), img.data.end(),
                      input.data() + static_cast<std::size_t>(j) * plane);
            const auto& v = data.lld(idx);
            std::copy(v.values.begin(), v.values.end(),
                      lld.data() + static_cast<std::size_t>(j) * data.lld_length());
        }
        const Tensor& extra = cd.spec().append_noisy ? input : kEmpty;
        Cd::Output cd_out;
        switch (options.mode) {
            case TrainMode::disc:
                cd_out = cd.forward(input, lld, kEmpty, extra, false);
                break;
            case TrainMode::aeg_cd: {
                const auto gen = aeg->forward(input, false);
                cd_out = cd.forward(gen.clean_estimate, kEmpty, kEmpty, extra, false);
                break;
            }
            case TrainMode::aeg_cd_sz: {
                const auto gen = aeg->forward(input, false);
                cd_out = cd.forward(gen.clean_estimate, lld,
                                    options.zero_latent ? kEmpty : gen.latent, extra, false);
                break;
            }
        }
        for (int j = 0; j < b; ++j)
            out.push_back({cd_out.affect[static_cast<std::size_t>(j) * 2],
                           cd_out.affect[static_cast<std::size_t>(j) * 2 + 1]});
    }
    return out;
}

Trainer::Trainer(const TrainConfig& config, const AegSpec& aeg_spec, const CdSpec& cd_spec,
                 const NoiseSpec& noise, const FrameDataset& train_data,
                 const FrameDataset& val_data)
    : config_(config), noise_(noise), train_data_(train_data), val_data_(val_data) {
    config_.validate();
    noise_.validate();
    aeg_spec.validate();
    if (aeg_spec.image_size != train_data_.image_size())
        throw std::invalid_argument("Trainer: model image size " +
                                    std::to_string(aeg_spec.image_size) +
                                    " does not match the dataset's " +
                                    std::to_string(train_data_.image_size()));

    CdSpec cds = cd_spec;
    cds.image_size = aeg_spec.image_size;
    cds.lld_length = train_data_.lld_length();
    cds.latent_channels = aeg_spec.latent_channels();
    cds.validate();
    if (cds.injection_size() != aeg_spec.latent_size())
        throw std::invalid_argument(
            "Trainer: discriminator injection plane is " + std::to_string(cds.injection_size()) +
            " but the generator bottleneck is " + std::to_string(aeg_spec.latent_size()));

    if (config_.mode != TrainMode::disc)
        aeg_ = std::make_unique<Aeg>(aeg_spec, mix_seed(config_.seed, 0xA6E6ULL));
    cd_ = std::make_unique<Cd>(cds, mix_seed(config_.seed, 0xCD15ULL));
    if (aeg_)
        opt_g_ = std::make_unique<Adam>(aeg_->params(), config_.g_lr);
    opt_d_ = std::make_unique<Adam>(cd_->params(), config_.d_lr);

    weighting_valence_ =
        class_weights(train_data_.labels_of(AffectDim::valence), config_.n_bins, config_.weighting);
    weighting_arousal_ =
        class_weights(train_data_.labels_of(AffectDim::arousal), config_.n_bins, config_.weighting);
}

AffectLossResult Trainer::affect_on(const Tensor& affect, const Tensor& labels,
                                    bool composite) const {
    return affect_pair_loss(affect, labels, composite, weighting_valence_, weighting_arousal_);
}

StepReport Trainer::d_pass(const Batch& batch, bool apply) {
    opt_d_->zero_grad();
    LossPipeline p{&config_, aeg_.get(), cd_.get(), &weighting_valence_, &weighting_arousal_};
    const StepReport rep = p.d_backward(batch, ++steps_);
    if (!std::isfinite(rep.l_d))
        throw TrainingDiverged("non-finite discriminator loss at step " +
                               std::to_string(rep.step));
    if (apply) opt_d_->step();
    return rep;
}

StepReport Trainer::g_pass(const Batch& batch, bool apply) {
    if (!aeg_) throw std::logic_error("g_step is undefined in disc mode");
    opt_g_->zero_grad();
    opt_d_->zero_grad();  // CD gradients from this pass are never applied
    LossPipeline p{&config_, aeg_.get(), cd_.get(), &weighting_valence_, &weighting_arousal_};
    const StepReport rep = p.g_backward(batch, ++steps_);
    if (!std::isfinite(rep.l_g))
        throw TrainingDiverged("non-finite generator loss at step " + std::to_string(rep.step));
    if (apply) opt_g_->step();
    return rep;
}

StepReport Trainer::d_step(const Batch& batch) { return d_pass(batch, true); }

StepReport Trainer::g_step(const Batch& batch) { return g_pass(batch, true); }

MetricsReport Trainer::evaluate_split(const FrameDataset& data, const std::string& split_id) {
    PredictOptions opt;
    opt.mode = config_.mode;
    opt.noise = noise_;
    opt.seed = config_.seed;
    opt.eval_on_clean = config_.eval_on_clean;
    auto preds = predict_affect(aeg_.get(), *cd_, data, opt);
    std::vector<AffectEstimate> targets;
    targets.reserve(data.n_frames());
    for (std::size_t i = 0; i < data.n_frames(); ++i) targets.push_back(data.label(i));
    MetricsReport report = evaluate(preds, targets);
    report.mode_label = to_string(config_.mode);
    report.seed = config_.seed;
    report.split_id = split_id;
    return report;
}

namespace {

void write_history_csv(const std::filesystem::path& file, const std::vector<EpochRow>& rows) {
    std::string out(kHistoryHeader);
    out += "\n";
    for (const auto& r : rows) {
        out += std::to_string(r.epoch) + "," + r.val.split_id + ",";
        append_csv_double(out, r.val.valence.mse);
        out += ",";
        append_csv_double(out, r.val.arousal.mse);
        out += ",";
        append_csv_double(out, r.val.valence.cor);
        out += ",";
        append_csv_double(out, r.val.arousal.cor);
        out += ",";
        append_csv_double(out, r.val.valence.ccc);
        out += ",";
        append_csv_double(out, r.val.arousal.ccc);
        out += ",";
        append_csv_double(out, r.mean_l_d);
        out += ",";
        append_csv_double(out, r.mean_l_g);
        out += "\n";
    }
    std::ofstream f(file, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write history: " + file.string());
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
}

}  // namespace

TrainResult Trainer::run(const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    TrainResult result;
    result.best_ccc = -2.0;
    result.history_csv = out_dir / "history.csv";
    result.last_checkpoint = out_dir / "last.ckpt";
    result.best_checkpoint = out_dir / "best.ckpt";

    BatchConfig bc;
    bc.batch_size = config_.batch_size;
    bc.noise = noise_;
    bc.seed = config_.seed;
    BatchIterator it(train_data_, bc);

    long g_counter = 0;
    try {
        for (int epoch = 0; epoch < config_.epochs; ++epoch) {
            it.start_epoch(epoch);
            Batch batch;
            double sum_d = 0.0, sum_g = 0.0;
            int n_d = 0, n_g = 0;
            while (it.next(batch)) {
                const auto rd = d_step(batch);
                sum_d += rd.l_d;
                ++n_d;
                if (config_.mode != TrainMode::disc &&
                    ++g_counter % config_.d_steps_per_g == 0) {
                    const auto rg = g_step(batch);
                    sum_g += rg.l_g;
                    ++n_g;
                }
            }
            EpochRow row;
            row.epoch = epoch;
            row.val = evaluate_split(val_data_, "val");
            row.mean_l_d = n_d > 0 ? sum_d / n_d : 0.0;
            row.mean_l_g = n_g > 0 ? sum_g / n_g : 0.0;
            result.history.push_back(row);

            const std::string extra = std::string("{\"seed\":") + std::to_string(config_.seed) +
                                      ",\"eval_on_clean\":" +
                                      (config_.eval_on_clean ? "true" : "false") +
                                      ",\"epoch\":" + std::to_string(epoch) +
                                      ",\"noise\":" + noise_spec_to_json(noise_) + "}";
            save_checkpoint(result.last_checkpoint, to_string(config_.mode), aeg_.get(), *cd_,
                            extra);
            const double ccc = row.val.mean_ccc();
            if (ccc > result.best_ccc) {
                result.best_ccc = ccc;
                result.best_epoch = epoch;
                save_checkpoint(result.best_checkpoint, to_string(config_.mode), aeg_.get(), *cd_,
                                extra);
            }
        }
    } catch (const TrainingDiverged&) {
        write_history_csv(result.history_csv, result.history);
        throw;
    }
    write_history_csv(result.history_csv, result.history);
    return result;
}

GradientAuditReport gradient_audit(AdvLossKind kind, std::uint64_t seed, int per_tensor,
                                   double step) {
    AegSpec aeg_spec;
    aeg_spec.image_size = 8;
    aeg_spec.encoder_channels = {4, 8};
    CdSpec cd_spec;
    cd_spec.image_size = 8;
    cd_spec.trunk_channels = {6, 10};
    cd_spec.latent_channels = 8;
    cd_spec.head_channels = {};
    cd_spec.lld_length = 5;

    TrainConfig config;
    config.mode = TrainMode::aeg_cd_sz;
    config.adv_loss = kind;
    config.lambda_afc = 1.0;
    config.lambda_rec = 1.0;
    config.n_bins = 4;

    Rng rng(mix_seed(seed, 0xAD17ULL));
    Aeg aeg(aeg_spec, mix_seed(seed, 1));
    Cd cd(cd_spec, mix_seed(seed, 2));

    const int n = 5;
    Batch batch;
    batch.noisy = Tensor({n, 3, 8, 8});
    batch.clean = Tensor({n, 3, 8, 8});
    batch.lld = Tensor({n, 5});
    batch.labels = Tensor({n, 2});
    for (std::size_t i = 0; i < batch.noisy.size(); ++i) batch.noisy[i] = rng.uniform(0.05, 0.95);
    for (std::size_t i = 0; i < batch.clean.size(); ++i) batch.clean[i] = rng.uniform(0.05, 0.95);
    for (std::size_t i = 0; i < batch.lld.size(); ++i) batch.lld[i] = rng.uniform(-1.0, 1.0);
    for (std::size_t i = 0; i < batch.labels.size(); ++i)
        batch.labels[i] = rng.uniform(-0.9, 0.9);

    std::vector<double> lv, la;
    for (int i = 0; i < n; ++i) {
        lv.push_back(batch.labels[static_cast<std::size_t>(i) * 2]);
        la.push_back(batch.labels[static_cast<std::size_t>(i) * 2 + 1]);
    }
    const auto wv = class_weights(lv, config.n_bins, WeightMode::inverse);
    const auto wa = class_weights(la, config.n_bins, WeightMode::inverse);

    LossPipeline pipeline{&config, &aeg, &cd, &wv, &wa};

    GradientAuditReport report;
    auto audit = [&](bool generator_side) {
        // L_D treats the generator as fixed, so its analytic gradient only
        // covers the discriminator parameters; L_G backpropagates through
        // both networks and both sets are checked.
        std::vector<Param*> params = generator_side ? aeg.params() : std::vector<Param*>{};
        const auto cd_params = cd.params();
        params.insert(params.end(), cd_params.begin(), cd_params.end());
        for (Param* p : aeg.params()) p->grad.fill(0.0);
        for (Param* p : cd_params) p->grad.fill(0.0);
        if (generator_side)
            pipeline.g_backward(batch, 0);
        else
            pipeline.d_backward(batch, 0);

        double max_rel = 0.0;
        for (Param* p : params) {
            for (int pick = 0; pick < per_tensor; ++pick) {
                const std::size_t i = rng.uniform_index(p->value.size());
                const double analytic = p->grad[i];
                const double saved = p->value[i];
                p->value[i] = saved + step;
                const double up =
                    generator_side ? pipeline.g_value(batch) : pipeline.d_value(batch);
                p->value[i] = saved - step;
                const double dn =
                    generator_side ? pipeline.g_value(batch) : pipeline.d_value(batch);
                p->value[i] = saved;
                const double fd = (up - dn) / (2.0 * step);
                const double rel =
                    std::abs(analytic - fd) / std::max({std::abs(analytic), std::abs(fd), 1e-4});
                max_rel = std::max(max_rel, rel);
                ++report.checked;
            }
        }
        return max_rel;
    };

    report.max_rel_err_d = audit(false);
    report.max_rel_err_g = audit(true);
    return report;
}

}  // namespace affectgan
