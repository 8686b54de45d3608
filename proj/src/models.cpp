#include "affectgan/models.hpp"

#include <stdexcept>

namespace affectgan {

namespace {

Tensor concat_channels(const Tensor& a, const Tensor& b) {
    const int n = a.dim(0), h = a.dim(2), w = a.dim(3);
    if (b.dim(0) != n || b.dim(2) != h || b.dim(3) != w)
        throw std::invalid_argument("channel concat: spatial mismatch " + a.shape_str() + " vs " +
                                    b.shape_str());
    const int ca = a.dim(1), cb = b.dim(1);
    const std::size_t hw = static_cast<std::size_t>(h) * w;
    Tensor out({n, ca + cb, h, w});
    for (int i = 0; i < n; ++i) {
        std::copy(a.data() + static_cast<std::size_t>(i) * ca * hw,
                  a.data() + static_cast<std::size_t>(i + 1) * ca * hw,
                  out.data() + static_cast<std::size_t>(i) * (ca + cb) * hw);
        std::copy(b.data() + static_cast<std::size_t>(i) * cb * hw,
                  b.data() + static_cast<std::size_t>(i + 1) * cb * hw,
                  out.data() + (static_cast<std::size_t>(i) * (ca + cb) + ca) * hw);
    }
    return out;
}

void split_channels(const Tensor& d, int ca, Tensor& da, Tensor& db) {
    const int n = d.dim(0), c = d.dim(1), h = d.dim(2), w = d.dim(3);
    const int cb = c - ca;
    const std::size_t hw = static_cast<std::size_t>(h) * w;
    da = Tensor({n, ca, h, w});
    db = Tensor({n, cb, h, w});
    for (int i = 0; i < n; ++i) {
        std::copy(d.data() + static_cast<std::size_t>(i) * c * hw,
                  d.data() + (static_cast<std::size_t>(i) * c + ca) * hw,
                  da.data() + static_cast<std::size_t>(i) * ca * hw);
        std::copy(d.data() + (static_cast<std::size_t>(i) * c + ca) * hw,
                  d.data() + static_cast<std::size_t>(i + 1) * c * hw,
                  db.data() + static_cast<std::size_t>(i) * cb * hw);
    }
}

}  // namespace

void AegSpec::validate() const {
    if (stages() < 1) throw std::invalid_argument("AegSpec: need at least one encoder stage");
    if (in_channels < 1) throw std::invalid_argument("AegSpec: in_channels must be >= 1");
    if (image_size % (1 << stages()) != 0 || latent_size() < 2)
        throw std::invalid_argument("AegSpec: image_size must be divisible by 2^stages with a "
                                    "latent plane of at least 2x2");
    for (int c : encoder_channels)
        if (c < 1) throw std::invalid_argument("AegSpec: channel counts must be >= 1");
}

void CdSpec::validate() const {
    if (trunk_channels.empty()) throw std::invalid_argument("CdSpec: empty trunk");
    if (image_size % (1 << trunk_channels.size()) != 0 || injection_size() < 2)
        throw std::invalid_argument("CdSpec: trunk stages must divide the image size down to "
                                    "at least 2x2");
    if (latent_channels < 1) throw std::invalid_argument("CdSpec: latent_channels must be >= 1");
    if (lld_length < 1) throw std::invalid_argument("CdSpec: lld_length must be >= 1");
    const int ps = patch_input_size();
    if (ps != 2 && ps != 4)
        throw std::invalid_argument("CdSpec: patch head input must be 2x2 or 4x4 to emit the "
                                    "2x2 patch map, got " +
                                    std::to_string(ps));
}

// ---------------------------------------------------------------------------
// Aeg

Aeg::Aeg(const AegSpec& spec, std::uint64_t seed) : spec_(spec) {
    spec_.validate();
    Rng rng(mix_seed(seed, 0xAE6ULL));
    int prev = spec_.in_channels;
    for (std::size_t i = 0; i < spec_.encoder_channels.size(); ++i) {
        const int ch = spec_.encoder_channels[i];
        const std::string name = "aeg.enc" + std::to_string(i);
        encoder_.emplace<Conv2d>(name, prev, ch, 4, 2, 1, rng);
        encoder_.emplace<InstanceNorm>(name + ".norm", ch);
        encoder_.emplace<LeakyRelu>(0.2);
        prev = ch;
    }
    for (std::size_t i = spec_.encoder_channels.size(); i-- > 0;) {
        const int out = i == 0 ? spec_.in_channels : spec_.encoder_channels[i - 1];
        const std::string name = "aeg.dec" + std::to_string(i);
        decoder_.emplace<ConvTranspose2d>(name, spec_.encoder_channels[i], out, 4, 2, 1, rng);
        if (i == 0) {
            decoder_.emplace<Sigmoid>();
        } else {
            decoder_.emplace<InstanceNorm>(name + ".norm", out);
            decoder_.emplace<LeakyRelu>(0.2);
        }
    }
}

Aeg::Output Aeg::forward(const Tensor& noisy, bool record) {
    if (noisy.ndim() != 4 || noisy.dim(1) != spec_.in_channels ||
        noisy.dim(2) != spec_.image_size || noisy.dim(3) != spec_.image_size)
        throw std::invalid_argument("Aeg::forward: expected [N," +
                                    std::to_string(spec_.in_channels) + "," +
                                    std::to_string(spec_.image_size) + "," +
                                    std::to_string(spec_.image_size) + "], got " +
                                    noisy.shape_str());
    Output out;
    out.latent = encoder_.forward(noisy, record);
    out.clean_estimate = decoder_.forward(out.latent, record);
    return out;
}

Tensor Aeg::backward(const Tensor& d_clean_estimate, const Tensor& d_latent) {
    Tensor dz = decoder_.backward(d_clean_estimate);
    if (!d_latent.empty()) dz += d_latent;
    return encoder_.backward(dz);
}

Tensor Aeg::decode(const Tensor& latent, bool record) {
    return decoder_.forward(latent, record);
}

std::vector<Param*> Aeg::params() {
    std::vector<Param*> out;
    encoder_.collect_params(out);
    decoder_.collect_params(out);
    return out;
}

// ---------------------------------------------------------------------------
// Cd

Tensor inject_latent(const Tensor& trunk_features, const Tensor& latent) {
    if (trunk_features.dim(2) != latent.dim(2) || trunk_features.dim(3) != latent.dim(3))
        throw std::invalid_argument("inject_latent: spatial mismatch (no resampling): " +
                                    trunk_features.shape_str() + " vs " + latent.shape_str());
    return concat_channels(trunk_features, latent);
}

Cd::Cd(const CdSpec& spec, std::uint64_t seed)
    : spec_(spec),
      adapter_([&] {
          spec_.validate();
          Rng rng(mix_seed(seed, 0xCDADULL));
          return Dense("cd.audio_adapter", spec_.lld_length, spec_.image_size * spec_.image_size,
                       rng);
      }()),
      affect_dense_([&] {
          Rng rng(mix_seed(seed, 0xCDAFULL));
          return Dense("cd.affect", spec_.injected_channels(), 2, rng);
      }()) {
    Rng rng(mix_seed(seed, 0xCD00ULL));
    int prev = spec_.in_channels();
    for (std::size_t i = 0; i < spec_.trunk_channels.size(); ++i) {
        const int ch = spec_.trunk_channels[i];
        trunk_.emplace<Conv2d>("cd.trunk" + std::to_string(i), prev, ch, 4, 2, 1, rng);
        trunk_.emplace<LeakyRelu>(0.2);
        prev = ch;
    }
    prev = spec_.injected_channels();
    for (std::size_t i = 0; i < spec_.head_channels.size(); ++i) {
        const int ch = spec_.head_channels[i];
        head_.emplace<Conv2d>("cd.head" + std::to_string(i), prev, ch, 4, 2, 1, rng);
        head_.emplace<LeakyRelu>(0.2);
        prev = ch;
    }
    if (spec_.patch_input_size() == 4)
        patch_conv_ = std::make_unique<Conv2d>("cd.patch", prev, 1, 4, 2, 1, rng);
    else
        patch_conv_ = std::make_unique<Conv2d>("cd.patch", prev, 1, 3, 1, 1, rng);
}

Tensor Cd::audio_to_plane(const Tensor& lld, bool record) {
    if (lld.ndim() != 2 || lld.dim(1) != spec_.lld_length)
        throw std::invalid_argument("audio_to_plane: expected [N," +
                                    std::to_string(spec_.lld_length) + "], got " +
                                    lld.shape_str());
    Tensor plane = adapter_act_.forward(adapter_.forward(lld, record), record);
    plane.reshape({lld.dim(0), 1, spec_.image_size, spec_.image_size});
    return plane;
}

Cd::Output Cd::forward(const Tensor& image, const Tensor& lld, const Tensor& latent,
                       const Tensor& noisy_extra, bool record) {
    const int s = spec_.image_size;
    if (image.ndim() != 4 || image.dim(1) != spec_.image_channels || image.dim(2) != s ||
        image.dim(3) != s)
        throw std::invalid_argument("Cd::forward: bad image shape " + image.shape_str());
    const int n = image.dim(0);

    Context ctx;
    ctx.audio_on = !lld.empty();
    ctx.latent_on = !latent.empty();
    ctx.noisy_on = spec_.append_noisy;

    Tensor plane = ctx.audio_on ? audio_to_plane(lld, record) : Tensor({n, 1, s, s});
    Tensor x = concat_channels(image, plane);
    if (spec_.append_noisy) {
        if (noisy_extra.empty())
            throw std::invalid_argument("Cd::forward: spec.append_noisy requires the noisy image");
        x = concat_channels(x, noisy_extra);
    }

    Tensor t = trunk_.forward(x, record);
    Tensor z;
    if (ctx.latent_on) {
        if (latent.dim(0) != n || latent.dim(1) != spec_.latent_channels)
            throw std::invalid_argument("Cd::forward: bad latent shape " + latent.shape_str());
        z = latent;
    } else {
        z = Tensor({n, spec_.latent_channels, spec_.injection_size(), spec_.injection_size()});
    }
    const Tensor f = inject_latent(t, z);

    Output out;
    const Tensor h = head_.empty() ? f : head_.forward(f, record);
    out.patch = patch_conv_->forward(h, record);
    out.affect =
        affect_act_.forward(affect_dense_.forward(affect_pool_.forward(f, record), record),
                            record);
    if (record) cache_.push_back(ctx);
    return out;
}

Cd::InputGrads Cd::backward(const Tensor& d_patch, const Tensor& d_affect) {
    if (cache_.empty()) throw std::logic_error("Cd::backward without recorded forward");
    const Context ctx = cache_.back();
    cache_.pop_back();

    Tensor d_f = patch_conv_->backward(d_patch);
    if (!head_.empty()) d_f = head_.backward(d_f);
    const Tensor d_pooled = affect_dense_.backward(affect_act_.backward(d_affect));
    d_f += affect_pool_.backward(d_pooled);

    Tensor d_t, d_z;
    split_channels(d_f, spec_.trunk_channels.back(), d_t, d_z);
    Tensor d_x = trunk_.backward(d_t);

    InputGrads grads;
    Tensor d_imgplane = d_x;
    if (ctx.noisy_on) {
        Tensor d_noisy;
        split_channels(d_x, spec_.image_channels + 1, d_imgplane, d_noisy);
    }
    Tensor d_plane;
    split_channels(d_imgplane, spec_.image_channels, grads.d_image, d_plane);
    if (ctx.audio_on) {
        d_plane.reshape({d_plane.dim(0), spec_.image_size * spec_.image_size});
        adapter_.backward(adapter_act_.backward(d_plane));
    }
    if (ctx.latent_on) grads.d_latent = std::move(d_z);
    return grads;
}

std::vector<Param*> Cd::params() {
    std::vector<Param*> out;
    adapter_.collect_params(out);
    trunk_.collect_params(out);
    head_.collect_params(out);
    patch_conv_->collect_params(out);
    affect_dense_.collect_params(out);
    return out;
}

// ---------------------------------------------------------------------------
// summaries

namespace {

ParamSummary summarize(const std::vector<Param*>& params) {
    ParamSummary s;
    for (const Param* p : params) {
        s.entries.push_back({p->name, p->value.shape(), p->value.size()});
        s.total += p->value.size();
    }
    return s;
}

}  // namespace

ParamSummary param_summary(const AegSpec& spec) {
    Aeg model(spec, 0);
    return summarize(model.params());
}

ParamSummary param_summary(const CdSpec& spec) {
    Cd model(spec, 0);
    return summarize(model.params());
}

}  // namespace affectgan
