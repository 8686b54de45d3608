#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "affectgan/batch.hpp"
#include "affectgan/checkpoint.hpp"
#include "affectgan/losses.hpp"
#include "affectgan/metrics.hpp"
#include "affectgan/models.hpp"
#include "affectgan/noise.hpp"

namespace affectgan {

// The three progressive conditions: a plain supervised discriminator, the
// adversarial generator/discriminator pair, and the full model with latent
// injection and the audio plane.
enum class TrainMode { disc, aeg_cd, aeg_cd_sz };

const char* to_string(TrainMode mode);
TrainMode train_mode_from_string(const std::string& s);

struct TrainConfig {
    TrainMode mode = TrainMode::aeg_cd_sz;
    double lambda_afc = 1.0;
    double lambda_rec = 10.0;
    AdvLossKind adv_loss = AdvLossKind::nonsaturating_log;
    double g_lr = 1e-4;
    double d_lr = 1e-4;
    int d_steps_per_g = 1;
    int batch_size = 16;
    int epochs = 10;
    std::uint64_t seed = 1;
    WeightMode weighting = WeightMode::inverse;
    int n_bins = 20;
    bool disc_full_affect_loss = false;  // disc mode default is plain MSE supervision
    bool eval_on_clean = false;          // validation inputs are corrupted by default

    bool operator==(const TrainConfig&) const = default;
    void validate() const;
};

struct StepReport {
    long step = 0;
    TrainMode mode = TrainMode::disc;
    double l_d = 0.0;
    double l_g = 0.0;
    double l_adv = 0.0;
    double l_afc_r = 0.0;
    double l_afc_f = 0.0;
    double l_rec = 0.0;
};

struct TrainingDiverged : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EpochRow {
    int epoch = 0;
    MetricsReport val;
    double mean_l_d = 0.0;
    double mean_l_g = 0.0;
};

struct TrainResult {
    std::vector<EpochRow> history;
    std::filesystem::path best_checkpoint;
    std::filesystem::path last_checkpoint;
    std::filesystem::path history_csv;
    double best_ccc = 0.0;
    int best_epoch = -1;
};

inline constexpr const char* kHistoryHeader =
    "epoch,split,mse_v,mse_a,cor_v,cor_a,ccc_v,ccc_a,L_D,L_G";

struct PredictOptions {
    TrainMode mode = TrainMode::aeg_cd_sz;
    NoiseSpec noise;
    std::uint64_t seed = 1;
    bool eval_on_clean = false;
    bool zero_latent = false;  // ablate the conditioning path at evaluation
    int batch_size = 32;
};

// Runs the mode's inference pipeline over every frame of the split.
std::vector<AffectEstimate> predict_affect(Aeg* aeg, Cd& cd, const FrameDataset& data,
                                           const PredictOptions& options);

class Trainer {
public:
    Trainer(const TrainConfig& config, const AegSpec& aeg_spec, const CdSpec& cd_spec,
            const NoiseSpec& noise, const FrameDataset& train_data, const FrameDataset& val_data);

    // one discriminator update; the generator's parameters are never touched
    StepReport d_step(const Batch& batch);
    // one generator update; the discriminator's parameters are never touched
    StepReport g_step(const Batch& batch);

    MetricsReport evaluate_split(const FrameDataset& data, const std::string& split_id);

    // full loop: alternating updates, per-epoch validation, best-CCC and
    // last checkpoints, history CSV
    TrainResult run(const std::filesystem::path& out_dir);

    Aeg* aeg() { return aeg_.get(); }
    Cd& cd() { return *cd_; }
    const TrainConfig& config() const { return config_; }

private:
    StepReport d_pass(const Batch& batch, bool apply);
    StepReport g_pass(const Batch& batch, bool apply);
    AffectLossResult affect_on(const Tensor& affect, const Tensor& labels, bool composite) const;

    TrainConfig config_;
    NoiseSpec noise_;
    const FrameDataset& train_data_;
    const FrameDataset& val_data_;
    std::unique_ptr<Aeg> aeg_;
    std::unique_ptr<Cd> cd_;
    std::unique_ptr<Adam> opt_g_;
    std::unique_ptr<Adam> opt_d_;
    ClassWeighting weighting_valence_;
    ClassWeighting weighting_arousal_;
    long steps_ = 0;

    friend struct GradientAuditAccess;
};

struct GradientAuditReport {
    double max_rel_err_d = 0.0;
    double max_rel_err_g = 0.0;
    int checked = 0;
};

// Compares the analytic gradients of L_D and L_G against central finite
// differences on tiny 8x8 networks with a synthetic batch.
GradientAuditReport gradient_audit(AdvLossKind kind, std::uint64_t seed, int per_tensor = 4,
                                   double step = 1e-5);

}  // namespace affectgan
