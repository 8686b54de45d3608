#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "affectgan/nn.hpp"
#include "affectgan/tensor.hpp"

namespace affectgan {

// Denoising auto-encoder generator: mirrored stride-2 convolutions and
// deconvolutions around a 2D bottleneck, no skip connections, so everything
// the decoder sees flows through the latent code.
struct AegSpec {
    int image_size = 64;
    int in_channels = 3;
    std::vector<int> encoder_channels = {32, 64, 64};  // one stride-2 stage each

    int stages() const { return static_cast<int>(encoder_channels.size()); }
    int latent_channels() const { return encoder_channels.back(); }
    int latent_size() const { return image_size >> stages(); }
    void validate() const;

    bool operator==(const AegSpec&) const = default;
};

// Conditional discriminator: RGB + audio-plane input, stride-2 trunk to the
// injection stage where the latent code is concatenated channel-wise, then a
// stride-2 head into a 2x2 real/fake patch map; the affect head pools the
// injected features into a bounded (valence, arousal) pair.
struct CdSpec {
    int image_size = 64;
    int image_channels = 3;
    bool append_noisy = false;  // optionally feed the raw noisy image too
    std::vector<int> trunk_channels = {64, 128, 128};
    int latent_channels = 64;
    std::vector<int> head_channels = {256};
    int lld_length = 12;

    int in_channels() const {
        return image_channels + 1 + (append_noisy ? image_channels : 0);
    }
    int injection_size() const { return image_size >> static_cast<int>(trunk_channels.size()); }
    int injected_channels() const { return trunk_channels.back() + latent_channels; }
    int patch_input_size() const {
        return injection_size() >> static_cast<int>(head_channels.size());
    }
    void validate() const;

    bool operator==(const CdSpec&) const = default;
};

class Aeg {
public:
    Aeg(const AegSpec& spec, std::uint64_t seed);

    struct Output {
        Tensor clean_estimate;  // same shape as the input, in [0,1]
        Tensor latent;          // [N, C_z, H_z, W_z]
    };

    Output forward(const Tensor& noisy, bool record);
    // unwinds the most recent recorded forward; either gradient may be empty
    Tensor backward(const Tensor& d_clean_estimate, const Tensor& d_latent);

    // decoder alone; everything the output contains comes through the latent
    Tensor decode(const Tensor& latent, bool record);

    std::vector<Param*> params();
    const AegSpec& spec() const { return spec_; }

private:
    AegSpec spec_;
    Sequential encoder_;
    Sequential decoder_;
};

// channel-wise concatenation; spatial dimensions must match exactly
Tensor inject_latent(const Tensor& trunk_features, const Tensor& latent);

class Cd {
public:
    Cd(const CdSpec& spec, std::uint64_t seed);

    struct Output {
        Tensor patch;   // [N, 1, 2, 2] raw scores
        Tensor affect;  // [N, 2] in [-1, 1]
    };

    // lld may be empty (audio plane off -> zeros); latent may be empty
    // (ablated -> zeros); noisy_extra is required iff spec.append_noisy
    Output forward(const Tensor& image, const Tensor& lld, const Tensor& latent,
                   const Tensor& noisy_extra, bool record);
    Output forward(const Tensor& image, const Tensor& lld, const Tensor& latent, bool record) {
        return forward(image, lld, latent, Tensor{}, record);
    }

    struct InputGrads {
        Tensor d_image;
        Tensor d_latent;  // empty when the forward ran with an empty latent
    };
    InputGrads backward(const Tensor& d_patch, const Tensor& d_affect);

    // maps an LLD vector batch [N, L] to bounded audio planes [N, 1, S, S]
    Tensor audio_to_plane(const Tensor& lld, bool record);

    std::vector<Param*> params();
    const CdSpec& spec() const { return spec_; }

private:
    struct Context {
        bool audio_on = false;
        bool latent_on = false;
        bool noisy_on = false;
    };

    CdSpec spec_;
    Dense adapter_;
    Tanh adapter_act_;
    Sequential trunk_;
    Sequential head_;
    std::unique_ptr<Conv2d> patch_conv_;
    GlobalAvgPool affect_pool_;
    Dense affect_dense_;
    Tanh affect_act_;
    std::vector<Context> cache_;
};

struct ParamInfo {
    std::string name;
    std::vector<int> shape;
    std::size_t count = 0;
};

struct ParamSummary {
    std::vector<ParamInfo> entries;
    std::size_t total = 0;
};

ParamSummary param_summary(const AegSpec& spec);
ParamSummary param_summary(const CdSpec& spec);

}  // namespace affectgan
