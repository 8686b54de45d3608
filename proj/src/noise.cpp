#include "affectgan/noise.hpp"

#include <algorithm>
#include <stdexcept>

#include "affectgan/rng.hpp"
#include "json.hpp"

namespace affectgan {

void NoiseSpec::validate() const {
    auto ordered = [](double lo, double hi) { return lo <= hi; };
    if (!ordered(blur_sigma_lo, blur_sigma_hi) || !ordered(noise_sigma_lo, noise_sigma_hi) ||
        !ordered(color_scale_lo, color_scale_hi))
        throw std::invalid_argument("NoiseSpec: range not ordered lo <= hi");
    for (int f : downsample_factors)
        if (f < 1) throw std::invalid_argument("NoiseSpec: downsample factor < 1");
    for (double p : {p_blur, p_downsample, p_noise, p_color})
        if (p < 0.0 || p > 1.0)
            throw std::invalid_argument("NoiseSpec: probability outside [0,1]");
}

NoiseSpec NoiseSpec::none() {
    NoiseSpec s;
    s.p_blur = s.p_downsample = s.p_noise = s.p_color = 0.0;
    return s;
}

Image corrupt(const Image& image, const NoiseSpec& spec, std::uint64_t seed) {
    spec.validate();
    Rng rng(seed);

    // decisions and parameters are drawn in a fixed sequence so a stage's
    // outcome never shifts the draws of the stages after it
    const bool do_blur = rng.uniform() < spec.p_blur;
    const double blur_sigma = rng.uniform(spec.blur_sigma_lo, spec.blur_sigma_hi);
    const bool do_down = rng.uniform() < spec.p_downsample && !spec.downsample_factors.empty();
    const std::size_t down_idx =
        spec.downsample_factors.empty() ? 0 : rng.uniform_index(spec.downsample_factors.size());
    const bool do_noise = rng.uniform() < spec.p_noise;
    const double noise_sigma = rng.uniform(spec.noise_sigma_lo, spec.noise_sigma_hi);
    const bool do_color = rng.uniform() < spec.p_color;
    double scale[3];
    for (double& s : scale) s = rng.uniform(spec.color_scale_lo, spec.color_scale_hi);

    Image out = image;
    if (do_blur) out = gaussian_blur(out, blur_sigma);
    if (do_down) out = downsample_upsample(out, spec.downsample_factors[down_idx]);
    if (do_noise)
        for (double& v : out.data) v += rng.normal(0.0, noise_sigma);
    if (do_color)
        for (int c = 0; c < 3; ++c)
            for (int y = 0; y < out.height; ++y)
                for (int x = 0; x < out.width; ++x) out.at(c, y, x) *= scale[c];
    for (double& v : out.data) v = std::clamp(v, 0.0, 1.0);
    return out;
}

std::string noise_spec_to_json(const NoiseSpec& s) {
    nlohmann::json j;
    j["blur_sigma"] = {s.blur_sigma_lo, s.blur_sigma_hi};
    j["noise_sigma"] = {s.noise_sigma_lo, s.noise_sigma_hi};
    j["downsample_factors"] = s.downsample_factors;
    j["color_scale"] = {s.color_scale_lo, s.color_scale_hi};
    j["p"] = {s.p_blur, s.p_downsample, s.p_noise, s.p_color};
    return j.dump();
}

NoiseSpec noise_spec_from_json(const std::string& json) {
    const auto j = nlohmann::json::parse(json);
    NoiseSpec s;
    s.blur_sigma_lo = j.at("blur_sigma")[0].get<double>();
    s.blur_sigma_hi = j.at("blur_sigma")[1].get<double>();
    s.noise_sigma_lo = j.at("noise_sigma")[0].get<double>();
    s.noise_sigma_hi = j.at("noise_sigma")[1].get<double>();
    s.downsample_factors = j.at("downsample_factors").get<std::vector<int>>();
    s.color_scale_lo = j.at("color_scale")[0].get<double>();
    s.color_scale_hi = j.at("color_scale")[1].get<double>();
    s.p_blur = j.at("p")[0].get<double>();
    s.p_downsample = j.at("p")[1].get<double>();
    s.p_noise = j.at("p")[2].get<double>();
    s.p_color = j.at("p")[3].get<double>();
    s.validate();
    return s;
}

}  // namespace affectgan
