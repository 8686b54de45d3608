#pragma once

#include <string>

#include "affectgan/tensor.hpp"

namespace affectgan {

class Aeg;

enum class AdvLossKind { nonsaturating_log, least_squares };

const char* to_string(AdvLossKind kind);
AdvLossKind adv_loss_kind_from_string(const std::string& s);

// Discriminator-side adversarial loss over patch score maps. The
// nonsaturating form minimizes -E[log s(real)] - E[log(1 - s(fake))];
// least squares minimizes 0.5 E[(real-1)^2] + 0.5 E[fake^2].
struct AdvLossD {
    double value = 0.0;
    Tensor d_real;
    Tensor d_fake;
};

AdvLossD adv_loss_d(const Tensor& real_patch, const Tensor& fake_patch, AdvLossKind kind);

// Generator side: nonsaturating -E[log s(fake)]; least squares
// 0.5 E[(fake-1)^2].
struct AdvLossG {
    double value = 0.0;
    Tensor d_fake;
};

AdvLossG adv_loss_g(const Tensor& fake_patch, AdvLossKind kind);

// Reconstruction loss: per-pixel L1 denoise term between the clean image and
// the generator output, plus the cycle term between the output and the
// generator re-applied to it. Gradients cover both occurrences of the output.
struct RecLoss {
    double value = 0.0;  // denoise_term + cycle_term, unweighted
    double denoise_term = 0.0;
    double cycle_term = 0.0;
    Tensor d_clean_estimate;    // direct gradient w.r.t. AEG(noisy)
    Tensor d_second_estimate;   // gradient w.r.t. AEG(AEG(noisy))
};

RecLoss rec_loss_terms(const Tensor& clean, const Tensor& clean_estimate,
                       const Tensor& second_estimate);

// Scalar convenience form running the generator twice in evaluation mode.
double rec_loss(const Tensor& clean, const Tensor& noisy, Aeg& aeg);

}  // namespace affectgan
