#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "affectgan/rng.hpp"
#include "affectgan/tensor.hpp"

namespace affectgan {

struct Param {
    std::string name;
    Tensor value;
    Tensor grad;

    Param(std::string n, std::vector<int> shape)
        : name(std::move(n)), value(shape), grad(std::move(shape)) {}
};

// Layers cache activations on a stack when `record` is set, so a network can
// run forward several times (e.g. a generator applied to its own output)
// before unwinding with backward calls in reverse order. backward accumulates
// parameter gradients and returns the input gradient.
class Layer {
public:
    virtual ~Layer() = default;
    virtual Tensor forward(const Tensor& x, bool record) = 0;
    virtual Tensor backward(const Tensor& dy) = 0;
    virtual void collect_params(std::vector<Param*>& out) { (void)out; }
};

class Conv2d final : public Layer {
public:
    Conv2d(std::string name, int in_channels, int out_channels, int kernel, int stride, int pad,
           Rng& rng);
    Tensor forward(const Tensor& x, bool record) override;
    Tensor backward(const Tensor& dy) override;
    void collect_params(std::vector<Param*>& out) override;

    int out_size(int in_size) const { return (in_size + 2 * pad_ - kernel_) / stride_ + 1; }

private:
    int in_channels_, out_channels_, kernel_, stride_, pad_;
    Param weight_;  // [C_out, C_in * k * k]
    Param bias_;    // [C_out]
    std::vector<Tensor> cache_;
};

class ConvTranspose2d final : public Layer {
public:
    ConvTranspose2d(std::string name, int in_channels, int out_channels, int kernel, int stride,
                    int pad, Rng& rng);
    Tensor forward(const Tensor& x, bool record) override;
    Tensor backward(const Tensor& dy) override;
    void collect_params(std::vector<Param*>& out) override;

    int out_size(int in_size) const { return (in_size - 1) * stride_ - 2 * pad_ + kernel_; }

private:
    int in_channels_, out_channels_, kernel_, stride_, pad_;
    Param weight_;  // [C_in, C_out * k * k]
    Param bias_;    // [C_out]
    std::vector<Tensor> cache_;
};

class Dense final : public Layer {
public:
    Dense(std::string name, int in_features, int out_features, Rng& rng);
    Tensor forward(const Tensor& x, bool record) override;  // x: [N, in]
    Tensor backward(const Tensor& dy) override;
    void collect_params(std::vector<Param*>& out) override;

private:
    int in_features_, out_features_;
    Param weight_;  // [out, in]
    Param bias_;    // [out]
    std::vector<Tensor> cache_;
};

// Per-sample per-channel normalization with learnable affine parameters.
class InstanceNorm final : public Layer {
public:
    explicit InstanceNorm(std::string name, int channels, double eps = 1e-5);
    Tensor forward(const Tensor& x, bool record) override;
    Tensor backward(const Tensor& dy) override;
    void collect_params(std::vector<Param*>& out) override;

private:
    struct Cache {
        Tensor xhat;
        std::vector<double> invstd;  // per (n, c)
    };
    int channels_;
    double eps_;
    Param gamma_, beta_;
    std::vector<Cache> cache_;
};

class LeakyRelu final : public Layer {
public:
    explicit LeakyRelu(double slope = 0.2) : slope_(slope) {}
    Tensor forward(const Tensor& x, bool record) override;
    Tensor backward(const Tensor& dy) override;

private:
    double slope_;
    std::vector<std::vector<std::uint8_t>> cache_;
};

class Sigmoid final : public Layer {
public:
    Tensor forward(const Tensor& x, bool record) override;
    Tensor backward(const Tensor& dy) override;

private:
    std::vector<Tensor> cache_;
};

class Tanh final : public Layer {
public:
    Tensor forward(const Tensor& x, bool record) override;
    Tensor backward(const Tensor& dy) override;

private:
    std::vector<Tensor> cache_;
};

// [N,C,H,W] -> [N,C]
class GlobalAvgPool final : public Layer {
public:
    Tensor forward(const Tensor& x, bool record) override;
    Tensor backward(const Tensor& dy) override;

private:
    std::vector<std::vector<int>> cache_;  // input shapes
};

class Sequential final : public Layer {
public:
    template <typename T, typename... Args>
    T& emplace(Args&&... args) {
        layers_.push_back(std::make_unique<T>(std::forward<Args>(args)...));
        return static_cast<T&>(*layers_.back());
    }

    Tensor forward(const Tensor& x, bool record) override;
    Tensor backward(const Tensor& dy) override;
    void collect_params(std::vector<Param*>& out) override;

    bool empty() const { return layers_.empty(); }

private:
    std::vector<std::unique_ptr<Layer>> layers_;
};

class Adam {
public:
    Adam(std::vector<Param*> params, double lr, double beta1 = 0.5, double beta2 = 0.999,
         double eps = 1e-8);
    void zero_grad();
    void step();
    double lr() const { return lr_; }

private:
    std::vector<Param*> params_;
    std::vector<Tensor> m_, v_;
    double lr_, beta1_, beta2_, eps_;
    long t_ = 0;
};

std::uint64_t params_checksum(const std::vector<Param*>& params);

}  // namespace affectgan
