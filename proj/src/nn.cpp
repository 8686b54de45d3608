#include "affectgan/nn.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <cstring>
#include <stdexcept>

namespace affectgan {

namespace {

using MatRM = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapM = Eigen::Map<MatRM>;
using CMapM = Eigen::Map<const MatRM>;

// gathers k x k patches of img (C,H,W) into the OH*OW-wide column block of a
// [C*k*k, row_stride] matrix starting at cols (already offset to the block)
void im2col(const double* img, int C, int H, int W, int k, int s, int p, int OH, int OW,
            double* cols, std::size_t row_stride) {
    for (int c = 0; c < C; ++c)
        for (int ki = 0; ki < k; ++ki)
            for (int kj = 0; kj < k; ++kj) {
                double* row =
                    cols + ((static_cast<std::size_t>(c) * k + ki) * k + kj) * row_stride;
                for (int oy = 0; oy < OH; ++oy) {
                    const int y = oy * s + ki - p;
                    if (y < 0 || y >= H) {
                        for (int ox = 0; ox < OW; ++ox) row[oy * OW + ox] = 0.0;
                        continue;
                    }
                    const double* src = img + (static_cast<std::size_t>(c) * H + y) * W;
                    for (int ox = 0; ox < OW; ++ox) {
                        const int x = ox * s + kj - p;
                        row[oy * OW + ox] = (x >= 0 && x < W) ? src[x] : 0.0;
                    }
                }
            }
}

// scatter-add of one column block back into img (C,H,W)
void col2im(const double* cols, int C, int H, int W, int k, int s, int p, int OH, int OW,
            double* img, std::size_t row_stride) {
    for (int c = 0; c < C; ++c)
        for (int ki = 0; ki < k; ++ki)
            for (int kj = 0; kj < k; ++kj) {
                const double* row =
                    cols + ((static_cast<std::size_t>(c) * k + ki) * k + kj) * row_stride;
                for (int oy = 0; oy < OH; ++oy) {
                    const int y = oy * s + ki - p;
                    if (y < 0 || y >= H) continue;
                    double* dst = img + (static_cast<std::size_t>(c) * H + y) * W;
                    for (int ox = 0; ox < OW; ++ox) {
                        const int x = ox * s + kj - p;
                        if (x >= 0 && x < W) dst[x] += row[oy * OW + ox];
                    }
                }
            }
}

// [N,C,HW] <-> [C, N*HW] gathers so each layer runs one batch-wide GEMM
void gather_channels(const double* nchw, int n, int c, std::size_t hw, double* out) {
    for (int i = 0; i < n; ++i)
        for (int ch = 0; ch < c; ++ch)
            std::memcpy(out + (static_cast<std::size_t>(ch) * n + i) * hw,
                        nchw + (static_cast<std::size_t>(i) * c + ch) * hw, hw * sizeof(double));
}

void scatter_channels(const double* big, int n, int c, std::size_t hw, double* nchw) {
    for (int i = 0; i < n; ++i)
        for (int ch = 0; ch < c; ++ch)
            std::memcpy(nchw + (static_cast<std::size_t>(i) * c + ch) * hw,
                        big + (static_cast<std::size_t>(ch) * n + i) * hw, hw * sizeof(double));
}

void he_init(Tensor& w, int fan_in, Rng& rng) {
    const double std = std::sqrt(2.0 / fan_in);
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = rng.normal(0.0, std);
}

void xavier_init(Tensor& w, int fan_in, int fan_out, Rng& rng) {
    const double std = std::sqrt(2.0 / (fan_in + fan_out));
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = rng.normal(0.0, std);
}

void check_nchw(const Tensor& x, int channels, const char* who) {
    if (x.ndim() != 4 || x.dim(1) != channels)
        throw std::invalid_argument(std::string(who) + ": expected [N," +
                                    std::to_string(channels) + ",H,W], got " + x.shape_str());
}

}  // namespace

// ---------------------------------------------------------------------------
// Conv2d

Conv2d::Conv2d(std::string name, int in_channels, int out_channels, int kernel, int stride,
               int pad, Rng& rng)
    : in_channels_(in_channels),
      out_channels_(out_channels),
      kernel_(kernel),
      stride_(stride),
      pad_(pad),
      weight_(name + ".weight", {out_channels, in_channels * kernel * kernel}),
      bias_(name + ".bias", {out_channels}) {
    he_init(weight_.value, in_channels * kernel * kernel, rng);
}

Tensor Conv2d::forward(const Tensor& x, bool record) {
    check_nchw(x, in_channels_, "Conv2d");
    const int n = x.dim(0), h = x.dim(2), w = x.dim(3);
    if ((h + 2 * pad_ - kernel_) % stride_ != 0 || (w + 2 * pad_ - kernel_) % stride_ != 0)
        throw std::invalid_argument("Conv2d: spatial size not divisible by stride");
    const int oh = out_size(h), ow = out_size(w);
    const int kdim = in_channels_ * kernel_ * kernel_;
    const std::size_t ohw = static_cast<std::size_t>(oh) * ow;
    const std::size_t big = ohw * static_cast<std::size_t>(n);

    AlignedBuffer cols(static_cast<std::size_t>(kdim) * big);
    for (int i = 0; i < n; ++i)
        im2col(x.data() + static_cast<std::size_t>(i) * in_channels_ * h * w, in_channels_, h, w,
               kernel_, stride_, pad_, oh, ow, cols.data() + ohw * static_cast<std::size_t>(i),
               big);
    AlignedBuffer ybig(static_cast<std::size_t>(out_channels_) * big);
    CMapM wm(weight_.value.data(), out_channels_, kdim);
    CMapM cm(cols.data(), kdim, static_cast<Eigen::Index>(big));
    MapM ym(ybig.data(), out_channels_, static_cast<Eigen::Index>(big));
    ym.noalias() = wm * cm;
    for (int c = 0; c < out_channels_; ++c) ym.row(c).array() += bias_.value[c];

    Tensor y({n, out_channels_, oh, ow});
    scatter_channels(ybig.data(), n, out_channels_, ohw, y.data());
    if (record) cache_.push_back(x);
    return y;
}

Tensor Conv2d::backward(const Tensor& dy) {
    if (cache_.empty()) throw std::logic_error("Conv2d::backward without recorded forward");
    const Tensor x = std::move(cache_.back());
    cache_.pop_back();
    const int n = x.dim(0), h = x.dim(2), w = x.dim(3);
    const int oh = out_size(h), ow = out_size(w);
    const int kdim = in_channels_ * kernel_ * kernel_;
    const std::size_t ohw = static_cast<std::size_t>(oh) * ow;
    const std::size_t big = ohw * static_cast<std::size_t>(n);

    AlignedBuffer cols(static_cast<std::size_t>(kdim) * big);
    for (int i = 0; i < n; ++i)
        im2col(x.data() + static_cast<std::size_t>(i) * in_channels_ * h * w, in_channels_, h, w,
               kernel_, stride_, pad_, oh, ow, cols.data() + ohw * static_cast<std::size_t>(i),
               big);
    AlignedBuffer dybig(static_cast<std::size_t>(out_channels_) * big);
    gather_channels(dy.data(), n, out_channels_, ohw, dybig.data());

    CMapM cm(cols.data(), kdim, static_cast<Eigen::Index>(big));
    CMapM dym(dybig.data(), out_channels_, static_cast<Eigen::Index>(big));
    CMapM wm(weight_.value.data(), out_channels_, kdim);
    MapM dwm(weight_.grad.data(), out_channels_, kdim);
    dwm.noalias() += dym * cm.transpose();
    for (int c = 0; c < out_channels_; ++c) bias_.grad[c] += dym.row(c).sum();

    AlignedBuffer dcols(static_cast<std::size_t>(kdim) * big);
    MapM dcm(dcols.data(), kdim, static_cast<Eigen::Index>(big));
    dcm.noalias() = wm.transpose() * dym;
    Tensor dx(x.shape());
    for (int i = 0; i < n; ++i)
        col2im(dcols.data() + ohw * static_cast<std::size_t>(i), in_channels_, h, w, kernel_,
               stride_, pad_, oh, ow,
               dx.data() + static_cast<std::size_t>(i) * in_channels_ * h * w, big);
    return dx;
}

void Conv2d::collect_params(std::vector<Param*>& out) {
    out.push_back(&weight_);
    out.push_back(&bias_);
}

// ---------------------------------------------------------------------------
// ConvTranspose2d

ConvTranspose2d::ConvTranspose2d(std::string name, int in_channels, int out_channels, int kernel,
                                 int stride, int pad, Rng& rng)
    : in_channels_(in_channels),
      out_channels_(out_channels),
      kernel_(kernel),
      stride_(stride),
      pad_(pad),
      weight_(name + ".weight", {in_channels, out_channels * kernel * kernel}),
      bias_(name + ".bias", {out_channels}) {
    he_init(weight_.value, in_channels * kernel * kernel / (stride * stride), rng);
}

Tensor ConvTranspose2d::forward(const Tensor& x, bool record) {
    check_nchw(x, in_channels_, "ConvTranspose2d");
    const int n = x.dim(0), ih = x.dim(2), iw = x.dim(3);
    const int oh = out_size(ih), ow = out_size(iw);
    const int kdim = out_channels_ * kernel_ * kernel_;
    const std::size_t ihw = static_cast<std::size_t>(ih) * iw;
    const std::size_t ohw = static_cast<std::size_t>(oh) * ow;
    const std::size_t big = ihw * static_cast<std::size_t>(n);

    AlignedBuffer xbig(static_cast<std::size_t>(in_channels_) * big);
    gather_channels(x.data(), n, in_channels_, ihw, xbig.data());
    AlignedBuffer cols(static_cast<std::size_t>(kdim) * big);
    CMapM wm(weight_.value.data(), in_channels_, kdim);
    CMapM xm(xbig.data(), in_channels_, static_cast<Eigen::Index>(big));
    MapM cm(cols.data(), kdim, static_cast<Eigen::Index>(big));
    cm.noalias() = wm.transpose() * xm;

    Tensor y({n, out_channels_, oh, ow});
    for (int i = 0; i < n; ++i) {
        double* yn = y.data() + static_cast<std::size_t>(i) * out_channels_ * ohw;
        col2im(cols.data() + ihw * static_cast<std::size_t>(i), out_channels_, oh, ow, kernel_,
               stride_, pad_, ih, iw, yn, big);
        for (int c = 0; c < out_channels_; ++c)
            for (std::size_t j = 0; j < ohw; ++j) yn[static_cast<std::size_t>(c) * ohw + j] +=
                bias_.value[c];
    }
    if (record) cache_.push_back(x);
    return y;
}

Tensor ConvTranspose2d::backward(const Tensor& dy) {
    if (cache_.empty())
        throw std::logic_error("ConvTranspose2d::backward without recorded forward");
    const Tensor x = std::move(cache_.back());
    cache_.pop_back();
    const int n = x.dim(0), ih = x.dim(2), iw = x.dim(3);
    const int oh = out_size(ih), ow = out_size(iw);
    const int kdim = out_channels_ * kernel_ * kernel_;
    const std::size_t ihw = static_cast<std::size_t>(ih) * iw;
    const std::size_t ohw = static_cast<std::size_t>(oh) * ow;
    const std::size_t big = ihw * static_cast<std::size_t>(n);

    AlignedBuffer dcols(static_cast<std::size_t>(kdim) * big);
    for (int i = 0; i < n; ++i) {
        const double* dyn = dy.data() + static_cast<std::size_t>(i) * out_channels_ * ohw;
        im2col(dyn, out_channels_, oh, ow, kernel_, stride_, pad_, ih, iw,
               dcols.data() + ihw * static_cast<std::size_t>(i), big);
        for (int c = 0; c < out_channels_; ++c)
            for (std::size_t j = 0; j < ohw; ++j)
                bias_.grad[c] += dyn[static_cast<std::size_t>(c) * ohw + j];
    }
    AlignedBuffer xbig(static_cast<std::size_t>(in_channels_) * big);
    gather_channels(x.data(), n, in_channels_, ihw, xbig.data());

    CMapM wm(weight_.value.data(), in_channels_, kdim);
    MapM dwm(weight_.grad.data(), in_channels_, kdim);
    CMapM dcm(dcols.data(), kdim, static_cast<Eigen::Index>(big));
    CMapM xm(xbig.data(), in_channels_, static_cast<Eigen::Index>(big));
    dwm.noalias() += xm * dcm.transpose();

    AlignedBuffer dxbig(static_cast<std::size_t>(in_channels_) * big);
    MapM dxm(dxbig.data(), in_channels_, static_cast<Eigen::Index>(big));
    dxm.noalias() = wm * dcm;
    Tensor dx(x.shape());
    scatter_channels(dxbig.data(), n, in_channels_, ihw, dx.data());
    return dx;
}

void ConvTranspose2d::collect_params(std::vector<Param*>& out) {
    out.push_back(&weight_);
    out.push_back(&bias_);
}

// ---------------------------------------------------------------------------
// Dense

Dense::Dense(std::string name, int in_features, int out_features, Rng& rng)
    : in_features_(in_features),
      out_features_(out_features),
      weight_(name + ".weight", {out_features, in_features}),
      bias_(name + ".bias", {out_features}) {
    xavier_init(weight_.value, in_features, out_features, rng);
}

Tensor Dense::forward(const Tensor& x, bool record) {
    if (x.ndim() != 2 || x.dim(1) != in_features_)
        throw std::invalid_argument("Dense: expected [N," + std::to_string(in_features_) +
                                    "], got " + x.shape_str());
    const int n = x.dim(0);
    Tensor y({n, out_features_});
    CMapM xm(x.data(), n, in_features_);
    CMapM wm(weight_.value.data(), out_features_, in_features_);
    MapM ym(y.data(), n, out_features_);
    ym.noalias() = xm * wm.transpose();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < out_features_; ++j) y[static_cast<std::size_t>(i) * out_features_ + j] +=
            bias_.value[j];
    if (record) cache_.push_back(x);
    return y;
}

Tensor Dense::backward(const Tensor& dy) {
    if (cache_.empty()) throw std::logic_error("Dense::backward without recorded forward");
    const Tensor x = std::move(cache_.back());
    cache_.pop_back();
    const int n = x.dim(0);
    Tensor dx(x.shape());
    CMapM xm(x.data(), n, in_features_);
    CMapM dym(dy.data(), n, out_features_);
    CMapM wm(weight_.value.data(), out_features_, in_features_);
    MapM dwm(weight_.grad.data(), out_features_, in_features_);
    MapM dxm(dx.data(), n, in_features_);
    dwm.noalias() += dym.transpose() * xm;
    dxm.noalias() = dym * wm;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < out_features_; ++j)
            bias_.grad[j] += dy[static_cast<std::size_t>(i) * out_features_ + j];
    return dx;
}

void Dense::collect_params(std::vector<Param*>& out) {
    out.push_back(&weight_);
    out.push_back(&bias_);
}

// ---------------------------------------------------------------------------
// InstanceNorm

InstanceNorm::InstanceNorm(std::string name, int channels, double eps)
    : channels_(channels),
      eps_(eps),
      gamma_(name + ".gamma", {channels}),
      beta_(name + ".beta", {channels}) {
    gamma_.value.fill(1.0);
}

Tensor InstanceNorm::forward(const Tensor& x, bool record) {
    check_nchw(x, channels_, "InstanceNorm");
    const int n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
    const std::size_t hw = static_cast<std::size_t>(h) * w;
    Tensor y(x.shape());
    Cache cache;
    cache.xhat = Tensor(x.shape());
    cache.invstd.resize(static_cast<std::size_t>(n) * c);
    for (int i = 0; i < n; ++i)
        for (int ch = 0; ch < c; ++ch) {
            const double* plane = x.data() + (static_cast<std::size_t>(i) * c + ch) * hw;
            double mu = 0.0;
            for (std::size_t j = 0; j < hw; ++j) mu += plane[j];
            mu /= static_cast<double>(hw);
            double var = 0.0;
            for (std::size_t j = 0; j < hw; ++j) {
                const double d = plane[j] - mu;
                var += d * d;
            }
            var /= static_cast<double>(hw);
            const double invstd = 1.0 / std::sqrt(var + eps_);
            cache.invstd[static_cast<std::size_t>(i) * c + ch] = invstd;
            double* xh = cache.xhat.data() + (static_cast<std::size_t>(i) * c + ch) * hw;
            double* yp = y.data() + (static_cast<std::size_t>(i) * c + ch) * hw;
            const double g = gamma_.value[ch], b = beta_.value[ch];
            for (std::size_t j = 0; j < hw; ++j) {
                xh[j] = (plane[j] - mu) * invstd;
                yp[j] = g * xh[j] + b;
            }
        }
    if (record) cache_.push_back(std::move(cache));
    return y;
}

Tensor InstanceNorm::backward(const Tensor& dy) {
    if (cache_.empty()) throw std::logic_error("InstanceNorm::backward without recorded forward");
    Cache cache = std::move(cache_.back());
    cache_.pop_back();
    const int n = dy.dim(0), c = dy.dim(1), h = dy.dim(2), w = dy.dim(3);
    const std::size_t hw = static_cast<std::size_t>(h) * w;
    Tensor dx(dy.shape());
    for (int i = 0; i < n; ++i)
        for (int ch = 0; ch < c; ++ch) {
            const std::size_t base = (static_cast<std::size_t>(i) * c + ch) * hw;
            const double* dyp = dy.data() + base;
            const double* xh = cache.xhat.data() + base;
            const double invstd = cache.invstd[static_cast<std::size_t>(i) * c + ch];
            const double g = gamma_.value[ch];
            double sum_dy = 0.0, sum_dyxh = 0.0;
            for (std::size_t j = 0; j < hw; ++j) {
                sum_dy += dyp[j];
                sum_dyxh += dyp[j] * xh[j];
            }
            gamma_.grad[ch] += sum_dyxh;
            beta_.grad[ch] += sum_dy;
            const double m1 = sum_dy / static_cast<double>(hw);
            const double m2 = sum_dyxh / static_cast<double>(hw);
            double* dxp = dx.data() + base;
            for (std::size_t j = 0; j < hw; ++j)
                dxp[j] = g * invstd * (dyp[j] - m1 - xh[j] * m2);
        }
    return dx;
}

void InstanceNorm::collect_params(std::vector<Param*>& out) {
    out.push_back(&gamma_);
    out.push_back(&beta_);
}

// ---------------------------------------------------------------------------
// activations and pooling

Tensor LeakyRelu::forward(const Tensor& x, bool record) {
    Tensor y(x.shape());
    std::vector<std::uint8_t> mask(record ? x.size() : 0);
    for (std::size_t i = 0; i < x.size(); ++i) {
        const bool pos = x[i] > 0.0;
        y[i] = pos ? x[i] : slope_ * x[i];
        if (record) mask[i] = pos;
    }
    if (record) cache_.push_back(std::move(mask));
    return y;
}

Tensor LeakyRelu::backward(const Tensor& dy) {
    if (cache_.empty()) throw std::logic_error("LeakyRelu::backward without recorded forward");
    const auto mask = std::move(cache_.back());
    cache_.pop_back();
    Tensor dx(dy.shape());
    for (std::size_t i = 0; i < dy.size(); ++i) dx[i] = mask[i] ? dy[i] : slope_ * dy[i];
    return dx;
}

Tensor Sigmoid::forward(const Tensor& x, bool record) {
    Tensor y(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = 1.0 / (1.0 + std::exp(-x[i]));
    if (record) cache_.push_back(y);
    return y;
}

Tensor Sigmoid::backward(const Tensor& dy) {
    if (cache_.empty()) throw std::logic_error("Sigmoid::backward without recorded forward");
    const Tensor y = std::move(cache_.back());
    cache_.pop_back();
    Tensor dx(dy.shape());
    for (std::size_t i = 0; i < dy.size(); ++i) dx[i] = dy[i] * y[i] * (1.0 - y[i]);
    return dx;
}

Tensor Tanh::forward(const Tensor& x, bool record) {
    Tensor y(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = std::tanh(x[i]);
    if (record) cache_.push_back(y);
    return y;
}

Tensor Tanh::backward(const Tensor& dy) {
    if (cache_.empty()) throw std::logic_error("Tanh::backward without recorded forward");
    const Tensor y = std::move(cache_.back());
    cache_.pop_back();
    Tensor dx(dy.shape());
    for (std::size_t i = 0; i < dy.size(); ++i) dx[i] = dy[i] * (1.0 - y[i] * y[i]);
    return dx;
}

Tensor GlobalAvgPool::forward(const Tensor& x, bool record) {
    if (x.ndim() != 4) throw std::invalid_argument("GlobalAvgPool: expected NCHW");
    const int n = x.dim(0), c = x.dim(1);
    const std::size_t hw = static_cast<std::size_t>(x.dim(2)) * x.dim(3);
    Tensor y({n, c});
    for (int i = 0; i < n; ++i)
        for (int ch = 0; ch < c; ++ch) {
            const double* plane = x.data() + (static_cast<std::size_t>(i) * c + ch) * hw;
            double acc = 0.0;
            for (std::size_t j = 0; j < hw; ++j) acc += plane[j];
            y[static_cast<std::size_t>(i) * c + ch] = acc / static_cast<double>(hw);
        }
    if (record) cache_.push_back(x.shape());
    return y;
}

Tensor GlobalAvgPool::backward(const Tensor& dy) {
    if (cache_.empty()) throw std::logic_error("GlobalAvgPool::backward without recorded forward");
    const auto shape = std::move(cache_.back());
    cache_.pop_back();
    Tensor dx(shape);
    const int n = shape[0], c = shape[1];
    const std::size_t hw = static_cast<std::size_t>(shape[2]) * shape[3];
    for (int i = 0; i < n; ++i)
        for (int ch = 0; ch < c; ++ch) {
            const double g =
                dy[static_cast<std::size_t>(i) * c + ch] / static_cast<double>(hw);
            double* plane = dx.data() + (static_cast<std::size_t>(i) * c + ch) * hw;
            for (std::size_t j = 0; j < hw; ++j) plane[j] = g;
        }
    return dx;
}

// ---------------------------------------------------------------------------
// Sequential

Tensor Sequential::forward(const Tensor& x, bool record) {
    Tensor h = x;
    for (auto& layer : layers_) h = layer->forward(h, record);
    return h;
}

Tensor Sequential::backward(const Tensor& dy) {
    Tensor g = dy;
    for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) g = (*it)->backward(g);
    return g;
}

void Sequential::collect_params(std::vector<Param*>& out) {
    for (auto& layer : layers_) layer->collect_params(out);
}

// ---------------------------------------------------------------------------
// Adam

Adam::Adam(std::vector<Param*> params, double lr, double beta1, double beta2, double eps)
    : params_(std::move(params)), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
    for (const Param* p : params_) {
        m_.emplace_back(p->value.shape());
        v_.emplace_back(p->value.shape());
    }
}

void Adam::zero_grad() {
    for (Param* p : params_) p->grad.fill(0.0);
}

void Adam::step() {
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t k = 0; k < params_.size(); ++k) {
        Param* p = params_[k];
        Tensor& m = m_[k];
        Tensor& v = v_[k];
        for (std::size_t i = 0; i < p->value.size(); ++i) {
            const double g = p->grad[i];
            m[i] = beta1_ * m[i] + (1.0 - beta1_) * g;
            v[i] = beta2_ * v[i] + (1.0 - beta2_) * g * g;
            p->value[i] -= lr_ * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + eps_);
        }
    }
}

std::uint64_t params_checksum(const std::vector<Param*>& params) {
    std::uint64_t h = 1469598103934665603ULL;
    for (const Param* p : params)
        for (std::size_t i = 0; i < p->value.size(); ++i) {
            std::uint64_t bits;
            static_assert(sizeof(bits) == sizeof(double));
            std::memcpy(&bits, p->value.data() + i, sizeof(bits));
            for (int b = 0; b < 8; ++b) {
                h ^= (bits >> (8 * b)) & 0xff;
                h *= 1099511628211ULL;
            }
        }
    return h;
}

}  // namespace affectgan
