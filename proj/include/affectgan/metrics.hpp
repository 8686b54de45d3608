#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace affectgan {

enum class AffectDim { valence, arousal };

const char* to_string(AffectDim dim);

// One (valence, arousal) estimate per frame, both in [-1, 1].
struct AffectEstimate {
    double valence = 0.0;
    double arousal = 0.0;
};

// Aligned prediction/target vectors for a single affect dimension.
struct AffectSeries {
    std::vector<double> predictions;
    std::vector<double> targets;
    AffectDim dimension = AffectDim::valence;

    std::size_t size() const { return predictions.size(); }
    void validate() const;  // throws std::invalid_argument on contract violation
};

struct MetricFlags {
    bool degenerate_pred_variance = false;
    bool degenerate_target_variance = false;
    bool correlation_dropped = false;  // series too short for moment statistics
};

// mean of squared differences; requires a nonempty series
double mse(const AffectSeries& series);
double rmse(const AffectSeries& series);

// Pearson correlation with population moments. Zero variance in either
// series yields 0 and sets the degenerate flag instead of NaN.
double pearson_cor(const AffectSeries& series, MetricFlags* flags = nullptr);

// Lin's concordance: 2*cov / (var_p + var_t + (mean_p - mean_t)^2).
// Both series constant: 1 if equal (convention), 0 otherwise, flagged.
double ccc(const AffectSeries& series, MetricFlags* flags = nullptr);

enum class WeightMode { literal, inverse, uniform };

const char* to_string(WeightMode mode);
WeightMode weight_mode_from_string(const std::string& s);

// Histogram-based class weighting over [-1, 1].
// literal: w_i = n_i / N. inverse: w_i proportional to 1/n_i over occupied
// bins. uniform: equal weight over occupied bins. Empty bins weigh 0 and
// weights always sum to 1.
struct ClassWeighting {
    std::vector<double> bin_edges;       // n_bins + 1 uniform edges over [-1, 1]
    std::vector<std::int64_t> counts;    // per bin
    std::vector<double> weights;         // per bin, sums to 1
    WeightMode mode = WeightMode::inverse;

    int n_bins() const { return static_cast<int>(counts.size()); }
    int bin_of(double label) const;
};

ClassWeighting class_weights(const std::vector<double>& labels, int n_bins, WeightMode mode);

struct AffectLossConfig {
    bool include_cor = true;  // add (1 - COR) over the batch
    bool include_ccc = true;  // add (1 - CCC) over the batch
};

// Per-dimension breakdown of the composite loss.
struct AffectLossComponents {
    double mse_term = 0.0;  // sum_i w_i * MSE_i over target-label bins
    double cor_term = 0.0;  // 1 - COR, or 0 when dropped
    double ccc_term = 0.0;
    MetricFlags flags;
};

struct AffectLossResult {
    double value = 0.0;  // dimensions averaged
    std::vector<double> grad_valence;  // d value / d prediction
    std::vector<double> grad_arousal;
    AffectLossComponents valence;
    AffectLossComponents arousal;
};

// Composite class-weighted loss: per dimension the bin-weighted MSE plus the
// whole-batch (1 - COR) and (1 - CCC) terms, averaged over both dimensions.
// The analytic prediction gradient is returned alongside the value.
AffectLossResult affect_loss(const AffectSeries& valence, const AffectSeries& arousal,
                             const ClassWeighting& weighting_valence,
                             const ClassWeighting& weighting_arousal,
                             const AffectLossConfig& config = {});

struct DimMetrics {
    double mse = 0.0;
    double rmse = 0.0;
    double cor = 0.0;
    double ccc = 0.0;
};

struct MetricsReport {
    DimMetrics valence;
    DimMetrics arousal;
    std::size_t count = 0;
    std::string mode_label;
    std::uint64_t seed = 0;
    std::string split_id;

    std::string to_json() const;
    static std::string csv_header();  // mode,fold,dim,mse,rmse,cor,ccc,n
    std::string to_csv_rows() const;  // one row per dimension

    double mean_ccc() const { return 0.5 * (valence.ccc + arousal.ccc); }
};

MetricsReport evaluate(const std::vector<AffectEstimate>& predictions,
                       const std::vector<AffectEstimate>& targets);

// Subject-disjoint cross-validation folds.
struct FoldSpec {
    int fold_id = 0;
    std::vector<std::string> train_subjects;
    std::vector<std::string> test_subjects;
};

std::vector<FoldSpec> make_folds(const std::vector<std::string>& subject_ids, int k,
                                 std::uint64_t seed);

}  // namespace affectgan
