#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace wavedp {

/// Dense row-major float64 tensor. Shapes are fixed at construction;
/// all arithmetic lives on the Tape (tape.hpp), this is storage only.
class Tensor {
public:
    Tensor() = default;

    explicit Tensor(std::vector<int64_t> shape) : Tensor(std::move(shape), Init::Zero) {}

    Tensor(std::vector<int64_t> shape, std::vector<double> data)
        : Tensor(std::move(shape), Init::None) {
        if (size_ != static_cast<int64_t>(data.size()))
            throw std::invalid_argument("Tensor: shape/data size mismatch");
        std::copy(data.begin(), data.end(), data_.get());
    }

    Tensor(const Tensor& o) : Tensor(o.shape_, Init::None) {
        std::copy(o.data_.get(), o.data_.get() + size_, data_.get());
    }
    Tensor(Tensor&&) noexcept = default;
    Tensor& operator=(const Tensor& o) {
        if (this != &o) *this = Tensor(o);
        return *this;
    }
    Tensor& operator=(Tensor&&) noexcept = default;

    static Tensor zeros(std::vector<int64_t> shape) { return Tensor(std::move(shape)); }

    /// Storage for outputs that are fully overwritten by the caller.
    static Tensor uninitialized(std::vector<int64_t> shape) {
        return Tensor(std::move(shape), Init::None);
    }

    static Tensor full(std::vector<int64_t> shape, double v) {
        Tensor t(std::move(shape), Init::None);
        std::fill(t.data_.get(), t.data_.get() + t.size_, v);
        return t;
    }

    static Tensor scalar(double v) { return Tensor({1}, {v}); }

    const std::vector<int64_t>& shape() const { return shape_; }
    int64_t size() const { return size_; }
    int64_t rank() const { return static_cast<int64_t>(shape_.size()); }

    int64_t rows() const { return shape_.size() == 2 ? shape_[0] : throw_rank2(); }
    int64_t cols() const { return shape_.size() == 2 ? shape_[1] : throw_rank2(); }

    double* data() { return data_.get(); }
    const double* data() const { return data_.get(); }

    double& operator[](int64_t i) { return data_[i]; }
    double operator[](int64_t i) const { return data_[i]; }

    /// 2-D accessors (row-major).
    double& at(int64_t i, int64_t j) { return data_[i * shape_[1] + j]; }
    double at(int64_t i, int64_t j) const { return data_[i * shape_[1] + j]; }

    bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

    /// Value of a one-element tensor.
    double item() const {
        if (size() != 1) throw std::logic_error("Tensor::item: size != 1");
        return data_[0];
    }

    bool all_finite() const {
        for (int64_t i = 0; i < size_; ++i)
            if (!std::isfinite(data_[i])) return false;
        return true;
    }

    std::string shape_str() const {
        std::string s = "(";
        for (size_t i = 0; i < shape_.size(); ++i) {
            if (i) s += ",";
            s += std::to_string(shape_[i]);
        }
        return s + ")";
    }

private:
    enum class Init { Zero, None };

    Tensor(std::vector<int64_t> shape, Init init)
        : shape_(std::move(shape)), size_(checked_size(shape_)) {
        if (init == Init::Zero) {
            data_ = std::make_unique<double[]>(static_cast<size_t>(size_));
        } else {
            data_ = std::unique_ptr<double[]>(new double[static_cast<size_t>(size_)]);
        }
    }

    static int64_t checked_size(const std::vector<int64_t>& shape) {
        int64_t n = 1;
        for (int64_t d : shape) {
            if (d < 0) throw std::invalid_argument("Tensor: negative dimension");
            n *= d;
        }
        return n;
    }
    [[noreturn]] static int64_t throw_rank2() {
        throw std::logic_error("Tensor: rank-2 accessor on non-matrix");
    }

    std::vector<int64_t> shape_;
    int64_t size_ = 0;
    std::unique_ptr<double[]> data_;
};

}  // namespace wavedp
