#include "affectgan/tensor.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace affectgan {

std::size_t shape_numel(const std::vector<int>& shape) {
    std::size_t n = 1;
    for (int d : shape) {
        if (d < 0) throw std::invalid_argument("tensor shape has negative extent");
        n *= static_cast<std::size_t>(d);
    }
    return n;
}

Tensor::Tensor(std::vector<int> shape) : shape_(std::move(shape)), data_(shape_numel(shape_), 0.0) {}

Tensor::Tensor(std::vector<int> shape, double fill) : shape_(std::move(shape)), data_(shape_numel(shape_), fill) {}

void Tensor::fill(double v) {
    for (double& x : data_) x = v;
}

void Tensor::reshape(std::vector<int> shape) {
    if (shape_numel(shape) != data_.size())
        throw std::invalid_argument("reshape changes element count: " + shape_str());
    shape_ = std::move(shape);
}

Tensor& Tensor::operator+=(const Tensor& other) {
    if (!same_shape(other)) throw std::invalid_argument("tensor shape mismatch in +=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
}

Tensor& Tensor::operator*=(double s) {
    for (double& x : data_) x *= s;
    return *this;
}

bool Tensor::all_finite() const {
    for (double x : data_)
        if (!std::isfinite(x)) return false;
    return true;
}

std::string Tensor::shape_str() const {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < shape_.size(); ++i) os << (i ? "x" : "") << shape_[i];
    os << "]";
    return os.str();
}

}  // namespace affectgan
