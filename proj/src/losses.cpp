#include "affectgan/losses.hpp"

#include <cmath>
#include <stdexcept>

#include "affectgan/models.hpp"

namespace affectgan {

namespace {

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

const char* to_string(AdvLossKind kind) {
    return kind == AdvLossKind::nonsaturating_log ? "nonsaturating_log" : "least_squares";
}

AdvLossKind adv_loss_kind_from_string(const std::string& s) {
    if (s == "nonsaturating_log") return AdvLossKind::nonsaturating_log;
    if (s == "least_squares") return AdvLossKind::least_squares;
    throw std::invalid_argument("unknown adversarial loss: " + s);
}

AdvLossD adv_loss_d(const Tensor& real_patch, const Tensor& fake_patch, AdvLossKind kind) {
    AdvLossD out;
    out.d_real = Tensor(real_patch.shape());
    out.d_fake = Tensor(fake_patch.shape());
    const double mr = static_cast<double>(real_patch.size());
    const double mf = static_cast<double>(fake_patch.size());
    if (kind == AdvLossKind::nonsaturating_log) {
        double acc = 0.0;
        for (std::size_t i = 0; i < real_patch.size(); ++i) {
            acc += softplus(-real_patch[i]) / mr;
            out.d_real[i] = -sigmoid(-real_patch[i]) / mr;
        }
        for (std::size_t i = 0; i < fake_patch.size(); ++i) {
            acc += softplus(fake_patch[i]) / mf;
            out.d_fake[i] = sigmoid(fake_patch[i]) / mf;
        }
        out.value = acc;
    } else {
        double acc = 0.0;
        for (std::size_t i = 0; i < real_patch.size(); ++i) {
            const double d = real_patch[i] - 1.0;
            acc += 0.5 * d * d / mr;
            out.d_real[i] = d / mr;
        }
        for (std::size_t i = 0; i < fake_patch.size(); ++i) {
            acc += 0.5 * fake_patch[i] * fake_patch[i] / mf;
            out.d_fake[i] = fake_patch[i] / mf;
        }
        out.value = acc;
    }
    return out;
}

AdvLossG adv_loss_g(const Tensor& fake_patch, AdvLossKind kind) {
    AdvLossG out;
    out.d_fake = Tensor(fake_patch.shape());
    const double m = static_cast<double>(fake_patch.size());
    double acc = 0.0;
    if (kind == AdvLossKind::nonsaturating_log) {
        for (std::size_t i = 0; i < fake_patch.size(); ++i) {
            acc += softplus(-fake_patch[i]) / m;
            out.d_fake[i] = -sigmoid(-fake_patch[i]) / m;
        }
    } else {
        for (std::size_t i = 0; i < fake_patch.size(); ++i) {
            const double d = fake_patch[i] - 1.0;
            acc += 0.5 * d * d / m;
            out.d_fake[i] = d / m;
        }
    }
    out.value = acc;
    return out;
}

RecLoss rec_loss_terms(const Tensor& clean, const Tensor& clean_estimate,
                       const Tensor& second_estimate) {
    if (!clean.same_shape(clean_estimate) || !clean.same_shape(second_estimate))
        throw std::invalid_argument("rec_loss: shape mismatch");
    RecLoss out;
    out.d_clean_estimate = Tensor(clean.shape());
    out.d_second_estimate = Tensor(clean.shape());
    const double n = static_cast<double>(clean.size());
    for (std::size_t i = 0; i < clean.size(); ++i) {
        const double d1 = clean_estimate[i] - clean[i];
        out.denoise_term += std::abs(d1) / n;
        const double s1 = d1 > 0.0 ? 1.0 : (d1 < 0.0 ? -1.0 : 0.0);
        const double d2 = clean_estimate[i] - second_estimate[i];
        out.cycle_term += std::abs(d2) / n;
        const double s2 = d2 > 0.0 ? 1.0 : (d2 < 0.0 ? -1.0 : 0.0);
        out.d_clean_estimate[i] = (s1 + s2) / n;
        out.d_second_estimate[i] = -s2 / n;
    }
    out.value = out.denoise_term + out.cycle_term;
    return out;
}

double rec_loss(const Tensor& clean, const Tensor& noisy, Aeg& aeg) {
    const auto first = aeg.forward(noisy, false);
    const auto second = aeg.forward(first.clean_estimate, false);
    return rec_loss_terms(clean, first.clean_estimate, second.clean_estimate).value;
}

}  // namespace affectgan
