#pragma once

#include <cstddef>
#include <new>
#include <string>
#include <vector>

namespace affectgan {

// 64-byte-aligned storage so vectorized kernels see the same lane split on
// every run; unaligned buffers would make results depend on heap addresses.
template <typename T>
struct AlignedAllocator {
    using value_type = T;
    static constexpr std::align_val_t alignment{64};

    AlignedAllocator() = default;
    template <typename U>
    AlignedAllocator(const AlignedAllocator<U>&) {}

    T* allocate(std::size_t n) {
        return static_cast<T*>(::operator new(n * sizeof(T), alignment));
    }
    void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, alignment); }

    template <typename U>
    bool operator==(const AlignedAllocator<U>&) const {
        return true;
    }
};

using AlignedBuffer = std::vector<double, AlignedAllocator<double>>;

// Dense row-major double tensor. Convolutional activations use NCHW order.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::vector<int> shape);
    Tensor(std::vector<int> shape, double fill);

    static Tensor zeros(std::vector<int> shape) { return Tensor(std::move(shape)); }

    const std::vector<int>& shape() const { return shape_; }
    int dim(int i) const { return shape_[static_cast<std::size_t>(i)]; }
    int ndim() const { return static_cast<int>(shape_.size()); }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    AlignedBuffer& vec() { return data_; }
    const AlignedBuffer& vec() const { return data_; }

    void fill(double v);
    void reshape(std::vector<int> shape);  // same element count

    Tensor& operator+=(const Tensor& other);
    Tensor& operator*=(double s);

    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
    bool all_finite() const;

    std::string shape_str() const;

private:
    std::vector<int> shape_;
    AlignedBuffer data_;
};

std::size_t shape_numel(const std::vector<int>& shape);

}  // namespace affectgan
