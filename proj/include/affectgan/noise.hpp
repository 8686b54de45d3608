#pragma once

#include <cstdint>
#include <vector>

#include "affectgan/image.hpp"

namespace affectgan {

// Parameters of the four-artifact corruption pipeline. Each corruption is
// applied independently with its own probability; parameter values are drawn
// uniformly from the configured ranges.
struct NoiseSpec {
    double blur_sigma_lo = 0.5;
    double blur_sigma_hi = 2.0;
    double noise_sigma_lo = 0.01;
    double noise_sigma_hi = 0.08;
    std::vector<int> downsample_factors = {2, 4};
    double color_scale_lo = 0.6;
    double color_scale_hi = 1.2;
    double p_blur = 0.5;
    double p_downsample = 0.5;
    double p_noise = 0.5;
    double p_color = 0.5;

    void validate() const;  // throws std::invalid_argument
    static NoiseSpec none();  // identity spec (all probabilities zero)

    bool operator==(const NoiseSpec&) const = default;
};

// Applies, in fixed order, blur -> downsample(+re-upsample) -> additive
// Gaussian noise -> per-channel colour scaling, then clamps to [0,1].
// Deterministic for identical (image, spec, seed).
Image corrupt(const Image& image, const NoiseSpec& spec, std::uint64_t seed);

std::string noise_spec_to_json(const NoiseSpec& spec);
NoiseSpec noise_spec_from_json(const std::string& json);

}  // namespace affectgan
