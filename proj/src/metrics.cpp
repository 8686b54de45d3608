#include "affectgan/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <stdexcept>

#include "affectgan/rng.hpp"
#include "json.hpp"

namespace affectgan {

namespace {

constexpr double kVarEps = 1e-12;

struct Moments {
    double mean_p = 0.0, mean_t = 0.0;
    double var_p = 0.0, var_t = 0.0;  // population
    double cov = 0.0;
};

Moments moments(const AffectSeries& s) {
    const std::size_t n = s.size();
    Moments m;
    for (std::size_t i = 0; i < n; ++i) {
        m.mean_p += s.predictions[i];
        m.mean_t += s.targets[i];
    }
    m.mean_p /= static_cast<double>(n);
    m.mean_t /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double dp = s.predictions[i] - m.mean_p;
        const double dt = s.targets[i] - m.mean_t;
        m.var_p += dp * dp;
        m.var_t += dt * dt;
        m.cov += dp * dt;
    }
    m.var_p /= static_cast<double>(n);
    m.var_t /= static_cast<double>(n);
    m.cov /= static_cast<double>(n);
    return m;
}

void format_double(std::string& out, double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    out += buf;
}

}  // namespace

const char* to_string(AffectDim dim) {
    return dim == AffectDim::valence ? "valence" : "arousal";
}

void AffectSeries::validate() const {
    if (predictions.empty()) throw std::invalid_argument("empty-series");
    if (predictions.size() != targets.size())
        throw std::invalid_argument("series length mismatch");
    for (double v : predictions)
        if (!std::isfinite(v)) throw std::invalid_argument("non-finite prediction");
    for (double v : targets)
        if (!std::isfinite(v)) throw std::invalid_argument("non-finite target");
}

double mse(const AffectSeries& series) {
    series.validate();
    double acc = 0.0;
    for (std::size_t i = 0; i < series.size(); ++i) {
        const double d = series.predictions[i] - series.targets[i];
        acc += d * d;
    }
    return acc / static_cast<double>(series.size());
}

double rmse(const AffectSeries& series) { return std::sqrt(mse(series)); }

double pearson_cor(const AffectSeries& series, MetricFlags* flags) {
    series.validate();
    if (series.size() < 2) throw std::invalid_argument("pearson_cor needs length >= 2");
    const Moments m = moments(series);
    if (m.var_p < kVarEps || m.var_t < kVarEps) {
        if (flags) {
            flags->degenerate_pred_variance = m.var_p < kVarEps;
            flags->degenerate_target_variance = m.var_t < kVarEps;
        }
        return 0.0;
    }
    return m.cov / (std::sqrt(m.var_p) * std::sqrt(m.var_t));
}

double ccc(const AffectSeries& series, MetricFlags* flags) {
    series.validate();
    if (series.size() < 2) throw std::invalid_argument("ccc needs length >= 2");
    const Moments m = moments(series);
    if (m.var_p < kVarEps && m.var_t < kVarEps) {
        if (flags) {
            flags->degenerate_pred_variance = true;
            flags->degenerate_target_variance = true;
        }
        const double dmu = m.mean_p - m.mean_t;
        return dmu * dmu < kVarEps ? 1.0 : 0.0;  // equal constants agree by convention
    }
    const double dmu = m.mean_p - m.mean_t;
    return 2.0 * m.cov / (m.var_p + m.var_t + dmu * dmu);
}

const char* to_string(WeightMode mode) {
    switch (mode) {
        case WeightMode::literal: return "literal";
        case WeightMode::inverse: return "inverse";
        case WeightMode::uniform: return "uniform";
    }
    return "?";
}

WeightMode weight_mode_from_string(const std::string& s) {
    if (s == "literal") return WeightMode::literal;
    if (s == "inverse") return WeightMode::inverse;
    if (s == "uniform") return WeightMode::uniform;
    throw std::invalid_argument("unknown weight mode: " + s);
}

int ClassWeighting::bin_of(double label) const {
    const int nb = n_bins();
    int b = static_cast<int>(std::floor((label + 1.0) * 0.5 * nb));
    return std::clamp(b, 0, nb - 1);
}

ClassWeighting class_weights(const std::vector<double>& labels, int n_bins, WeightMode mode) {
    if (labels.empty()) throw std::invalid_argument("class_weights: empty labels");
    if (n_bins < 1) throw std::invalid_argument("class_weights: n_bins must be >= 1");
    ClassWeighting w;
    w.mode = mode;
    w.bin_edges.resize(static_cast<std::size_t>(n_bins) + 1);
    for (int i = 0; i <= n_bins; ++i)
        w.bin_edges[static_cast<std::size_t>(i)] = -1.0 + 2.0 * i / n_bins;
    w.counts.assign(static_cast<std::size_t>(n_bins), 0);
    for (double x : labels) {
        if (!std::isfinite(x) || x < -1.0 - 1e-9 || x > 1.0 + 1e-9)
            throw std::invalid_argument("class_weights: label outside [-1,1]");
        ++w.counts[static_cast<std::size_t>(w.bin_of(x))];
    }
    w.weights.assign(static_cast<std::size_t>(n_bins), 0.0);
    const double total = static_cast<double>(labels.size());
    switch (mode) {
        case WeightMode::literal:
            for (int i = 0; i < n_bins; ++i)
                w.weights[static_cast<std::size_t>(i)] =
                    static_cast<double>(w.counts[static_cast<std::size_t>(i)]) / total;
            break;
        case WeightMode::inverse: {
            double norm = 0.0;
            for (int i = 0; i < n_bins; ++i)
                if (w.counts[static_cast<std::size_t>(i)] > 0)
                    norm += 1.0 / static_cast<double>(w.counts[static_cast<std::size_t>(i)]);
            for (int i = 0; i < n_bins; ++i)
                if (w.counts[static_cast<std::size_t>(i)] > 0)
                    w.weights[static_cast<std::size_t>(i)] =
                        1.0 / static_cast<double>(w.counts[static_cast<std::size_t>(i)]) / norm;
            break;
        }
        case WeightMode::uniform: {
            int occupied = 0;
            for (int i = 0; i < n_bins; ++i)
                if (w.counts[static_cast<std::size_t>(i)] > 0) ++occupied;
            for (int i = 0; i < n_bins; ++i)
                if (w.counts[static_cast<std::size_t>(i)] > 0)
                    w.weights[static_cast<std::size_t>(i)] = 1.0 / occupied;
            break;
        }
    }
    return w;
}

namespace {

// One dimension of the composite loss; appends the gradient into grad.
AffectLossComponents affect_loss_dim(const AffectSeries& s, const ClassWeighting& w,
                                     const AffectLossConfig& cfg, std::vector<double>& grad) {
    s.validate();
    const std::size_t n = s.size();
    AffectLossComponents out;
    grad.assign(n, 0.0);

    // class-weighted MSE: bins are taken on the target labels, bin weights on
    // the split-level histogram, per-bin means on the batch members
    std::vector<int> bin(n);
    std::vector<std::int64_t> batch_count(static_cast<std::size_t>(w.n_bins()), 0);
    for (std::size_t i = 0; i < n; ++i) {
        bin[i] = w.bin_of(s.targets[i]);
        ++batch_count[static_cast<std::size_t>(bin[i])];
    }
    for (std::size_t i = 0; i < n; ++i) {
        const double u = w.weights[static_cast<std::size_t>(bin[i])] /
                         static_cast<double>(batch_count[static_cast<std::size_t>(bin[i])]);
        const double d = s.predictions[i] - s.targets[i];
        out.mse_term += u * d * d;
        grad[i] += 2.0 * u * d;
    }

    if (n < 2) {
        out.flags.correlation_dropped = true;
        return out;
    }

    const Moments m = moments(s);
    const double nd = static_cast<double>(n);

    if (cfg.include_cor) {
        if (m.var_p < kVarEps || m.var_t < kVarEps) {
            out.flags.degenerate_pred_variance |= m.var_p < kVarEps;
            out.flags.degenerate_target_variance |= m.var_t < kVarEps;
            out.cor_term = 1.0;  // convention COR = 0, no gradient
        } else {
            const double sp = std::sqrt(m.var_p), st = std::sqrt(m.var_t);
            const double cor = m.cov / (sp * st);
            out.cor_term = 1.0 - cor;
            // d cor / d p_i = [(t_i - mt) - (cov / var_p)(p_i - mp)] / (n sp st)
            for (std::size_t i = 0; i < n; ++i) {
                const double dp = s.predictions[i] - m.mean_p;
                const double dt = s.targets[i] - m.mean_t;
                const double dcor = (dt - (m.cov / m.var_p) * dp) / (nd * sp * st);
                grad[i] -= dcor;
            }
        }
    }

    if (cfg.include_ccc) {
        const double dmu = m.mean_p - m.mean_t;
        const double den = m.var_p + m.var_t + dmu * dmu;
        if (den < kVarEps) {
            out.flags.degenerate_pred_variance = true;
            out.flags.degenerate_target_variance = true;
            out.ccc_term = 0.0;  // equal constants: CCC = 1 by convention
        } else {
            const double c = 2.0 * m.cov / den;
            out.ccc_term = 1.0 - c;
            // d ccc / d p_i = 2[(t_i - mt) den / n - cov (2(p_i - mp) + 2 dmu) / n] / den^2
            for (std::size_t i = 0; i < n; ++i) {
                const double dp = s.predictions[i] - m.mean_p;
                const double dt = s.targets[i] - m.mean_t;
                const double dccc =
                    2.0 * (dt * den - 2.0 * m.cov * (dp + dmu)) / (nd * den * den);
                grad[i] -= dccc;
            }
        }
    }
    return out;
}

}  // namespace

AffectLossResult affect_loss(const AffectSeries& valence, const AffectSeries& arousal,
                             const ClassWeighting& weighting_valence,
                             const ClassWeighting& weighting_arousal,
                             const AffectLossConfig& config) {
    if (valence.size() != arousal.size())
        throw std::invalid_argument("affect_loss: dimension batch size mismatch");
    AffectLossResult r;
    r.valence = affect_loss_dim(valence, weighting_valence, config, r.grad_valence);
    r.arousal = affect_loss_dim(arousal, weighting_arousal, config, r.grad_arousal);
    const double lv = r.valence.mse_term + r.valence.cor_term + r.valence.ccc_term;
    const double la = r.arousal.mse_term + r.arousal.cor_term + r.arousal.ccc_term;
    r.value = 0.5 * (lv + la);
    for (double& g : r.grad_valence) g *= 0.5;
    for (double& g : r.grad_arousal) g *= 0.5;
    return r;
}

MetricsReport evaluate(const std::vector<AffectEstimate>& predictions,
                       const std::vector<AffectEstimate>& targets) {
    if (predictions.size() != targets.size())
        throw std::invalid_argument("evaluate: stream length mismatch");
    if (predictions.empty()) throw std::invalid_argument("empty-series");

    MetricsReport report;
    report.count = predictions.size();
    for (AffectDim dim : {AffectDim::valence, AffectDim::arousal}) {
        AffectSeries s;
        s.dimension = dim;
        s.predictions.reserve(predictions.size());
        s.targets.reserve(targets.size());
        for (std::size_t i = 0; i < predictions.size(); ++i) {
            s.predictions.push_back(dim == AffectDim::valence ? predictions[i].valence
                                                              : predictions[i].arousal);
            s.targets.push_back(dim == AffectDim::valence ? targets[i].valence
                                                          : targets[i].arousal);
        }
        DimMetrics m;
        m.mse = mse(s);
        m.rmse = rmse(s);
        if (s.size() >= 2) {
            m.cor = pearson_cor(s);
            m.ccc = ccc(s);
        }
        (dim == AffectDim::valence ? report.valence : report.arousal) = m;
    }
    return report;
}

std::string MetricsReport::to_json() const {
    nlohmann::json j;
    j["mode"] = mode_label;
    j["seed"] = seed;
    j["split"] = split_id;
    j["n"] = count;
    for (AffectDim dim : {AffectDim::valence, AffectDim::arousal}) {
        const DimMetrics& m = dim == AffectDim::valence ? valence : arousal;
        nlohmann::json d;
        d["mse"] = m.mse;
        d["rmse"] = m.rmse;
        d["cor"] = m.cor;
        d["ccc"] = m.ccc;
        j[to_string(dim)] = d;
    }
    return j.dump(2);
}

std::string MetricsReport::csv_header() { return "mode,fold,dim,mse,rmse,cor,ccc,n"; }

std::string MetricsReport::to_csv_rows() const {
    std::string out;
    for (AffectDim dim : {AffectDim::valence, AffectDim::arousal}) {
        const DimMetrics& m = dim == AffectDim::valence ? valence : arousal;
        out += mode_label + "," + split_id + "," + to_string(dim) + ",";
        format_double(out, m.mse);
        out += ",";
        format_double(out, m.rmse);
        out += ",";
        format_double(out, m.cor);
        out += ",";
        format_double(out, m.ccc);
        out += "," + std::to_string(count) + "\n";
    }
    return out;
}

std::vector<FoldSpec> make_folds(const std::vector<std::string>& subject_ids, int k,
                                 std::uint64_t seed) {
    if (k < 2) throw std::invalid_argument("make_folds: k must be >= 2");
    std::set<std::string> unique(subject_ids.begin(), subject_ids.end());
    if (static_cast<int>(unique.size()) < k)
        throw std::invalid_argument("make_folds: fewer subjects than folds");

    std::vector<std::string> subjects(unique.begin(), unique.end());  // canonical order
    Rng rng(seed);
    rng.shuffle(subjects);

    std::vector<FoldSpec> folds(static_cast<std::size_t>(k));
    for (int f = 0; f < k; ++f) folds[static_cast<std::size_t>(f)].fold_id = f;
    for (std::size_t i = 0; i < subjects.size(); ++i) {
        const std::size_t f = i % static_cast<std::size_t>(k);
        folds[f].test_subjects.push_back(subjects[i]);
    }
    for (auto& fold : folds) {
        std::sort(fold.test_subjects.begin(), fold.test_subjects.end());
        for (const auto& s : subjects)
            if (!std::binary_search(fold.test_subjects.begin(), fold.test_subjects.end(), s))
                fold.train_subjects.push_back(s);
        std::sort(fold.train_subjects.begin(), fold.train_subjects.end());
    }
    return folds;
}

}  // namespace affectgan
